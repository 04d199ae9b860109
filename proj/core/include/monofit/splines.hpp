#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "monofit/lazy_poly.hpp"
#include "monofit/partition.hpp"
#include "monofit/report.hpp"
#include "monofit/smoothness.hpp"

namespace monofit {

/// Right-continuous piecewise polynomial on a Chebyshev partition.
///
/// Piece j (1-based) owns [x_j, x_{j-1}); piece 1 owns [x_1, 1]. Each piece is stored in
/// the local basis (x - x_j) and has degree <= k-1.
class Spline {
 public:
  Spline(ChebPartition part, int k, std::vector<LocalPolynomial> pieces);

  const ChebPartition& partition() const { return part_; }
  int n() const { return part_.n(); }
  int k() const { return k_; }
  const LocalPolynomial& piece(int j) const { return pieces_.at(j - 1); }
  const std::vector<LocalPolynomial>& pieces() const { return pieces_; }

  double operator()(double x) const;
  double derivative(double x) const;

  /// Largest |p_{j+1}(x_j) - p_j(x_j)| over interior knots.
  double max_jump() const;
  bool is_continuous(double tol = 1e-12) const;
  /// Pieces nondecreasing on their intervals and no downward jumps, within `tol`.
  bool is_monotone(double tol = 1e-12) const;

  /// Largest |S| over the knots, at least 1.
  double scale() const;

  Spline scaled(double c) const;
  Spline operator+(const Spline& o) const;
  Spline operator-(const Spline& o) const;

  /// {n, k, pieces: [[c_0..c_{k-1}]], convention: "right-continuous"}.
  nlohmann::json to_json() const;

 private:
  ChebPartition part_;
  int k_;
  std::vector<LocalPolynomial> pieces_;
};

/// Minimum of p' over [a, b]: exact for deg p <= 3, else over 256 points plus ends.
double min_derivative(const LocalPolynomial& p, double a, double b);

/// How sup norms of piece differences are taken.
///
/// `exact` adds the critical points of the difference when k <= 4; `grid` uses only the
/// uniform grid and the endpoints, so two implementations can agree bit for bit.
enum class SupMode { exact, grid };

/// max over [a, b] of |p|; grid of `points` uniform nodes (ends included).
double sup_norm(const LocalPolynomial& p, double a, double b, SupMode mode = SupMode::exact,
                int points = 64);

/// b_{i,j}(S, phi) = ||p_i - p_j||_{I_i} / phi(h_j) * (h_j / h_{i,j})^k.
///
/// Raises degenerate-majorant when phi(h_j) = 0 and the numerator is not negligible.
double b_ij(const Spline& s, const Majorant& phi, int i, int j, SupMode mode = SupMode::exact);

/// max b_{i,j} over pairs with I_i, I_j inside `a`.
double b_k_max(const Spline& s, const Majorant& phi, Interval a = {-1.0, 1.0},
               SupMode mode = SupMode::exact);

/// Hypothesis check and value of b_k for a spline that approximates f.
///
/// Rows: "bk" with the value of b_k(S, phi); the note is "hypotheses-fail" when either
/// omega_k(f, t) <= phi(t) or |f - S| <= phi(rho_n) fails on the grid.
FittedConstantsReport verify_bk_by_approximation(const RealFn& f, const Spline& s,
                                                 const Majorant& phi,
                                                 const std::vector<double>& grid);

/// Both sides of b_k(S, phi) <= c ||rho_n S' / phi(rho_n)||.
struct BkDerivativeCheck {
  double bk = 0.0;
  double derivative_norm = 0.0;
  /// bk / derivative_norm; 0 when both sides vanish.
  double ratio = 0.0;
};

BkDerivativeCheck verify_bk_by_derivative(const Spline& s, const Majorant& phi,
                                          const std::vector<double>& grid);

/// Endpoint floor constants D_+ and D_-.
struct EndpointFloors {
  double d_plus = 0.0;
  double d_minus = 0.0;
  int i_plus = 0;  // 0 when no nonzero derivative exists
  int i_minus = 0;
};

EndpointFloors endpoint_floors(const SmoothFunction& f);

/// Output of the monotone spline fit.
struct SplineFit {
  Spline spline;
  double a_plus = 0.0;
  double a_minus = 0.0;
  /// omega_1(f^(r), |I_1|+|I_2|) / (r! (|I_1|+|I_2|)) and its mirror.
  double a_plus_bound = 0.0;
  double a_minus_bound = 0.0;
  /// Interior pieces replaced by the slope-limited fallback.
  int limited_pieces = 0;
};

/// Continuous nondecreasing spline in Sigma_{r+2,n} interpolating f at every knot.
///
/// End pieces on [x_2, 1] and [-1, x_{n-2}] are Taylor polynomials of degree r plus one
/// free coefficient fixed by S(x_2) = f(x_2), S(x_{n-2}) = f(x_{n-2}). Interior pieces
/// interpolate f at r+2 equispaced nodes of I_j; a piece that is not monotone is
/// replaced by a slope-limited quadratic (r = 1) or cubic Hermite (r >= 2) piece.
/// Raises NeedsLargerN naming the side when an end piece is not monotone.
SplineFit monotone_spline_fit(const SmoothFunction& f, const ChebPartition& part);

/// Random continuous nondecreasing spline with quadratic pieces (linear when k = 2).
///
/// Secant slopes are log-normal; each quadratic takes a left slope uniform in [0, 2s].
Spline random_monotone_spline(const ChebPartition& part, int k, std::uint64_t seed);

/// Doubles n (from `n`) until the fit succeeds or n exceeds `cap`.
///
/// `trace` receives every order tried.
SplineFit monotone_spline_fit_doubling(const SmoothFunction& f, int n, int cap,
                                       std::vector<int>* trace = nullptr);

}  // namespace monofit
