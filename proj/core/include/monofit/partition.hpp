#pragma once

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace monofit {

/// Closed interval [lo, hi].
struct Interval {
  double lo = -1.0;
  double hi = 1.0;

  double length() const { return hi - lo; }
  bool contains(double x) const { return lo <= x && x <= hi; }
};

/// phi(x) = sqrt(1 - x^2), clamped to 0 outside (-1, 1).
double varphi(double x);
/// rho_n(x) = phi(x)/n + 1/n^2.
double rho(int n, double x);
/// delta_n(x) = min{1, n phi(x)}; exactly 0 at the endpoints.
double delta(int n, double x);

/// Pointwise metrics of a Chebyshev partition at one point.
struct PointMetrics {
  double x = 0.0;
  double varphi = 0.0;
  double rho = 0.0;
  double delta = 0.0;
  std::vector<double> psi;  // psi[j-1] = psi_j(x)
};

/// Chebyshev partition x_j = cos(j pi / n) of [-1, 1].
///
/// Intervals are numbered right to left: I_1 = [x_1, 1], I_n = [-1, x_{n-1}].
class ChebPartition {
 public:
  explicit ChebPartition(int n);

  int n() const { return n_; }

  /// x_j, with x_j = 1 for j < 0 and x_j = -1 for j > n.
  double knot(int j) const;
  /// h_j = x_{j-1} - x_j for 1 <= j <= n.
  double length(int j) const;
  Interval interval(int j) const;

  std::span<const double> knots() const { return knots_; }

  /// Smallest nu with x in I_nu.
  int locate(double x) const;
  /// Index of the piece of a right-continuous spline that owns x.
  int piece_index(double x) const;

  /// Smallest interval containing I_i and I_j.
  Interval hull(int i, int j) const;
  double hull_length(int i, int j) const;

  double dist(double x, int j) const;
  double psi(int j, double x) const;
  double rho(double x) const { return monofit::rho(n_, x); }
  double delta(double x) const { return monofit::delta(n_, x); }

  PointMetrics metrics(double x) const;

 private:
  int n_;
  std::vector<double> knots_;
  std::vector<double> lengths_;
};

/// Evaluation grid: uniform points plus Chebyshev-clustered points cos(k pi/m).
struct GridSpec {
  int uniform_points = 2000;
  int clustered_points = 2000;
  bool include_endpoints = true;
};

/// Sorted, deduplicated union described by `spec`.
std::vector<double> make_grid(const GridSpec& spec);

/// One checked inequality at one partition order.
struct InequalityRow {
  std::string inequality;
  std::string statement;
  int n = 0;
  double worst_ratio = 0.0;
  double argmax_x = 0.0;
  /// Constant stated with the inequality; 0 when the constant is unnamed.
  double bound = 0.0;
  bool explicit_constant = false;
  bool pass = false;
};

struct InequalityReport {
  std::vector<InequalityRow> rows;

  const InequalityRow* find(const std::string& id) const;
  nlohmann::json to_json() const;
};

/// Empirical check of the Chebyshev-partition inequalities over `grid`.
///
/// Explicit constants pass when the worst ratio respects the constant.
/// Unnamed constants pass when the fitted value is finite and positive;
/// stability across n is judged by `unnamed_constants_stable`.
InequalityReport verify_partition_inequalities(const ChebPartition& part,
                                               const GridSpec& grid = {});

/// Max/min of fitted values of each unnamed-constant row across reports.
struct StabilityRow {
  std::string inequality;
  double min_value = 0.0;
  double max_value = 0.0;
  double spread = 0.0;
  bool stable = false;
};

std::vector<StabilityRow> unnamed_constants_stable(
    std::span<const InequalityReport> reports, double factor = 8.0);

}  // namespace monofit
