#pragma once

#include <cmath>
#include <memory>
#include <vector>

#include "monofit/partition.hpp"
#include "monofit/polynomials.hpp"
#include "monofit/report.hpp"

namespace monofit {

/// Exponent profile for the indicator constructions.
///
/// `theoretical` follows the exponent formulas tied to (alpha, beta); `practical`
/// fixes mu = 6 and takes xi = max(2, ceil(alpha/2)) so that degrees stay small.
enum class Profile { theoretical, practical };

const char* to_string(Profile p);
Profile profile_from_string(const std::string& s);

/// tau integrates (1-y^2)^xi t^mu; tau_tilde adds the factor (y - x_j)(x_{j-1} - y).
enum class IndicatorForm { tau, tau_tilde };

struct IndicatorParams {
  int xi = 2;
  int mu = 6;
};

IndicatorParams tau_params(double alpha, double beta, Profile profile);
IndicatorParams tau_tilde_params(double alpha, double beta, Profile profile);

/// t_j(x) = (cos 2n acos x / (x - x0_j))^2 + (sin 2n acos x / (x - xbar_j))^2, and the
/// integrand built from it.
///
/// With y = cos(theta) both quotients collapse to sin(2n e)/sin(e/2) over a sine of a
/// half-sum, so the removable singularities need no special casing.
class IndicatorKernel final : public Kernel {
 public:
  IndicatorKernel(const ChebPartition& part, int j, IndicatorParams params = {},
                  IndicatorForm form = IndicatorForm::tau);

  int j() const { return j_; }
  int n() const { return n_; }
  double xbar() const { return std::cos(theta_bar_); }
  double x0() const { return std::cos(theta0_); }
  IndicatorParams params() const { return params_; }
  IndicatorForm form() const { return form_; }

  /// t_j at y = cos(theta).
  double t_at_angle(double theta) const;
  double t(double x) const;
  /// t_j(xbar_j), the scale divided out before raising to mu.
  double t_scale() const { return t_bar_; }

  /// (1-y^2)^xi (t/t_scale)^mu, times (y-x_j)(x_{j-1}-y)/h_j^2 for tau_tilde.
  double at_angle(double theta) const override;
  int degree() const override;

 private:
  int n_, j_;
  IndicatorParams params_;
  IndicatorForm form_;
  double theta0_, theta_bar_;
  double xj_, xj1_, hj_;
  double t_bar_ = 1.0;
};

/// tau_j or tau_tilde_j, normalized so that the value is 0 at -1 and 1 at 1.
class IndicatorPoly final : public Polynomial {
 public:
  IndicatorPoly(const ChebPartition& part, int j, IndicatorParams params, IndicatorForm form);

  double value(double x) const override { return body_.value(x); }
  double derivative(double x) const override { return body_.derivative(x); }
  int degree() const override { return body_.degree(); }

  int j() const { return kernel_->j(); }
  int n() const { return kernel_->n(); }
  IndicatorForm form() const { return kernel_->form(); }
  IndicatorParams params() const { return kernel_->params(); }
  const IndicatorKernel& kernel() const { return *kernel_; }

  /// log of the normalizing constant d_j (or its tilde analogue) in unscaled units.
  double log_d_norm() const;

 private:
  std::shared_ptr<const IndicatorKernel> kernel_;
  KernelPoly body_;
};

using IndicatorPtr = std::shared_ptr<const IndicatorPoly>;

/// tau_j for 1 <= j <= n-1. Degrees above the cap raise a capacity error.
IndicatorPtr build_tau(const ChebPartition& part, int j, double alpha, double beta,
                       Profile profile, int degree_cap = kDefaultDegreeCap);
IndicatorPtr build_tau_tilde(const ChebPartition& part, int j, double alpha, double beta,
                             Profile profile, int degree_cap = kDefaultDegreeCap);

/// Indicator polynomials for every 1 <= j <= n-1, built in parallel.
std::vector<IndicatorPtr> build_all(const ChebPartition& part, IndicatorParams params,
                                    IndicatorForm form);

/// Exponents used when fitting the indicator bounds.
struct IndicatorExponents {
  double floor_delta = 0.0;  // exponent of delta in the derivative floor
  double floor_psi = 0.0;    // exponent of psi in the derivative floor
  double delta = 0.0;        // exponent of delta in the upper bounds
  double psi = 0.0;          // exponent of psi in the upper bounds
};

/// Stated exponents for `theoretical`; exponents implied by (xi, mu) for `practical`.
IndicatorExponents indicator_exponents(const IndicatorPoly& ip, double alpha, double beta,
                                       Profile profile);

/// Fitted constants of the derivative floor (tau only), the first-derivative bound and
/// the indicator error bound on `grid`.
FittedConstantsReport verify_indicator_bounds(const ChebPartition& part,
                                              const IndicatorPoly& ip, double alpha,
                                              double beta, Profile profile,
                                              const std::vector<double>& grid);

/// Largest h_j tau_tilde_j'(x) over grid points outside (x_j, x_{j-1}); <= 0 in exact
/// arithmetic.
double tilde_sign_violation(const ChebPartition& part, const IndicatorPoly& ip,
                            const std::vector<double>& grid);

}  // namespace monofit
