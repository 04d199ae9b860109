#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "monofit/partition.hpp"

namespace monofit {

using RealFn = std::function<double(double)>;

/// Symmetric k-th difference of f at x with step u; 0 when x +- k u/2 leaves `domain`.
double finite_difference(const RealFn& f, double x, double u, int k,
                         Interval domain = {-1.0, 1.0});

/// Grid estimate of omega_k(f, t) from below.
///
/// Steps u = t i/density and centers on a uniform grid of density+1 points.
double modulus(const RealFn& f, int k, double t, Interval domain = {-1.0, 1.0},
               int density = 512);

/// Tabulated modulus omega_k(f, t) at increasing t.
struct ModulusTable {
  int k = 2;
  std::vector<double> t;
  std::vector<double> omega;

  /// Piecewise-linear interpolation, clamped by the last value times (s/t_max)^k.
  double operator()(double s) const;
  /// CSV with header line "t,omega_k".
  std::string to_csv() const;
};

/// Tabulate omega_k(f, .) on `ts` (sorted ascending) sharing one sweep over steps.
ModulusTable modulus_table(const RealFn& f, int k, const std::vector<double>& ts,
                           Interval domain = {-1.0, 1.0}, int density = 512);

/// Log-spaced t values on (lo, hi].
std::vector<double> log_grid(double lo, double hi, int points);

enum class MajorantKind { closed_form, tabulated, star_regularized, power_composed };

/// A k-majorant: nondecreasing, zero at 0, with t^{-k} phi(t) nonincreasing.
class Majorant {
 public:
  Majorant() = default;
  Majorant(int order, RealFn eval, MajorantKind kind = MajorantKind::closed_form,
           bool identically_zero = false);

  static Majorant zero(int order);
  static Majorant power(int order, double coefficient, int exponent);
  /// Monotone piecewise-linear interpolant in log-log space of (t, value) samples.
  static Majorant tabulated(int order, std::vector<double> t, std::vector<double> values);

  int order() const { return order_; }
  MajorantKind kind() const { return kind_; }
  bool is_zero() const { return zero_; }
  double operator()(double t) const { return t <= 0.0 ? 0.0 : eval_(t); }

  /// Scaled copy c * phi.
  Majorant scaled(double c) const;

 private:
  int order_ = 1;
  RealFn eval_ = [](double) { return 0.0; };
  MajorantKind kind_ = MajorantKind::closed_form;
  bool zero_ = true;
};

/// Result of the grid checks of the k-majorant definition.
struct MajorantCheck {
  bool zero_at_origin = false;
  bool nondecreasing = false;
  bool scaled_nonincreasing = false;
  double worst_increase_violation = 0.0;
  double worst_scaled_violation = 0.0;
  bool ok() const { return zero_at_origin && nondecreasing && scaled_nonincreasing; }
};

/// Checks on the fixed log grid of 400 points on (1e-8, 4].
MajorantCheck check_majorant(const Majorant& phi, double tol = 1e-12);

/// phi*(t) = sup_{u > t} t^m u^{-m} phi(u) with m = `k_plus_r`, on the standard grid.
Majorant star_majorant(const RealFn& phi, int k_plus_r);

/// t^r psi(t), of order r + order(psi).
Majorant compose_phi(int r, const Majorant& psi);

/// A function with r available derivatives on [-1, 1].
struct SmoothFunction {
  std::string id;
  int r = 0;
  std::vector<RealFn> d;  // d[i] = f^{(i)}, 0 <= i <= r
  bool monotone = true;

  double operator()(double x) const { return d.at(0)(x); }
  double derivative(int i, double x) const { return d.at(i)(x); }
};

struct SmoothFunctionCheck {
  bool monotone_ok = true;
  bool derivatives_ok = true;
  std::string reason;
  bool ok() const { return monotone_ok && derivatives_ok; }
};

/// Grid checks: monotonicity on 1000 points and finite-difference derivative consistency.
SmoothFunctionCheck check_smooth_function(const SmoothFunction& f);

}  // namespace monofit
