#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "monofit/smoothness.hpp"

namespace monofit {

/// Anything that evaluates like a polynomial on [-1, 1] with a known degree bound.
class Polynomial {
 public:
  virtual ~Polynomial() = default;

  virtual double value(double x) const = 0;
  virtual double derivative(double x) const = 0;
  /// Analytic degree bound.
  virtual int degree() const = 0;

  double operator()(double x) const { return value(x); }
  /// Values at many points; overridden where a shared sweep is cheaper.
  virtual void values(std::span<const double> xs, std::span<double> out) const;
  virtual void derivatives(std::span<const double> xs, std::span<double> out) const;
};

using PolyPtr = std::shared_ptr<const Polynomial>;

/// Default degree cap for dense Chebyshev arithmetic.
inline constexpr int kDefaultDegreeCap = 200000;

/// Dense polynomial sum c_k T_k(x).
class ChebSeries final : public Polynomial {
 public:
  ChebSeries() = default;
  explicit ChebSeries(std::vector<double> coeffs, int degree_cap = kDefaultDegreeCap);

  static ChebSeries constant(double c) { return ChebSeries({c}); }
  /// Converts monomial coefficients a_0 + a_1 x + ... to the Chebyshev basis.
  static ChebSeries from_monomial(std::span<const double> a);

  const std::vector<double>& coeffs() const { return c_; }
  /// Index of the last nonzero coefficient (0 for the zero series).
  int degree() const override;

  /// Clenshaw recurrence.
  double value(double x) const override;
  double derivative(double x) const override;

  ChebSeries differentiate() const;
  /// Antiderivative vanishing at -1.
  ChebSeries antidifferentiate() const;

  ChebSeries operator+(const ChebSeries& o) const;
  ChebSeries operator-(const ChebSeries& o) const;
  ChebSeries operator*(const ChebSeries& o) const;
  ChebSeries operator*(double s) const;

  int degree_cap() const { return cap_; }

 private:
  std::vector<double> c_;
  int cap_ = kDefaultDegreeCap;
};

/// Chebyshev coefficients of the degree-N interpolant of p at cos(k pi/N), k = 0..N.
///
/// Exact, up to rounding, when deg p <= N.
ChebSeries chebyshev_interpolant(const Polynomial& p, int degree);

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Largest rule built directly; larger requests go composite.
inline constexpr int kGaussNodeCap = 512;

/// Cached m-point rule, 1 <= m <= kGaussNodeCap. Thread-safe.
const GaussRule& gauss_rule(int m);

/// Integral of f over [a, b], exact for polynomials of degree <= poly_degree.
///
/// Above the node cap the interval is split into equal panels, each using the cap rule.
double gauss_integrate(const RealFn& f, double a, double b, int poly_degree);

/// Result of a grid check of p' >= 0.
struct MonotoneReport {
  double min_derivative = 0.0;
  double argmin = 0.0;
  double max_abs_derivative = 0.0;
  std::size_t points = 0;
  bool pass = false;
};

/// Samples p' at max(4 deg, 2000) points cos(k pi/(m-1)).
///
/// Passes when min p' >= -tol * max(1, max |p'|).
MonotoneReport check_monotone(const Polynomial& p, double tol = 1e-9);

/// The abscissae check_monotone uses for a polynomial of the given degree.
std::vector<double> monotone_grid(int degree);

/// p' sampled on `xs`, in parallel chunks.
std::vector<double> sample_derivative(const Polynomial& p, const std::vector<double>& xs);

/// The check_monotone verdict for derivative samples `d` taken at `xs`.
MonotoneReport monotone_report(const std::vector<double>& xs, const std::vector<double>& d,
                               double tol = 1e-9);

/// Integrand given in angle form, y = cos(theta).
class Kernel {
 public:
  virtual ~Kernel() = default;

  /// K(cos theta).
  virtual double at_angle(double theta) const = 0;
  /// Polynomial degree of K in y.
  virtual int degree() const = 0;

  double operator()(double y) const;
};

/// base + scale * integral_{-1}^{x} K(y) dy.
///
/// The integral is taken in theta over panels of width pi/panels, split further so that
/// each sub-panel carries at most 64 Gauss nodes; full sub-panels are prefix-summed.
class KernelPoly final : public Polynomial {
 public:
  KernelPoly(std::shared_ptr<const Kernel> kernel, int panels, double base = 0.0,
             double scale = 1.0);

  double value(double x) const override;
  double derivative(double x) const override;
  int degree() const override { return kernel_->degree() + 1; }
  void values(std::span<const double> xs, std::span<double> out) const override;

  /// integral_{-1}^{x} K.
  double cumulative(double x) const;
  /// integral_{-1}^{1} K.
  double total() const { return plan_->prefix.back(); }

  double base() const { return base_; }
  double scale() const { return scale_; }
  const Kernel& kernel() const { return *kernel_; }
  int nodes_per_subpanel() const { return plan_->nodes; }
  std::size_t subpanels() const { return plan_->edges.size() - 1; }

  /// Copy sharing the integration plan with a different affine map.
  KernelPoly rescaled(double base, double scale) const;

 private:
  struct Plan {
    std::vector<double> edges;   // theta, decreasing uniformly from pi to 0
    std::vector<double> prefix;  // prefix[i] = integral over [edges[i], pi]
    std::vector<bool> negligible;  // subpanel i carries at most 1e-17 of the total mass
    int nodes = 16;
  };

  double partial(double theta_lo, double theta_hi, double* abs_sum = nullptr) const;

  std::shared_ptr<const Kernel> kernel_;
  std::shared_ptr<const Plan> plan_;
  double base_ = 0.0;
  double scale_ = 1.0;
};

}  // namespace monofit
