#include "monofit/indicators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "monofit/errors.hpp"
#include "monofit/parallel.hpp"

namespace monofit {

const char* to_string(Profile p) {
  return p == Profile::theoretical ? "theoretical" : "practical";
}

Profile profile_from_string(const std::string& s) {
  if (s == "theoretical") return Profile::theoretical;
  if (s == "practical") return Profile::practical;
  fail(ErrorKind::invalid_argument, "unknown profile '" + s + "'");
}

namespace {

// Practical profile: mu fixed, xi just large enough for the delta^alpha endpoint factor.
IndicatorParams practical_params(double alpha) {
  return {std::max(2, static_cast<int>(std::ceil(alpha / 2.0))), 6};
}

}  // namespace

IndicatorParams tau_params(double alpha, double beta, Profile profile) {
  if (profile == Profile::practical) return practical_params(alpha);
  require(alpha >= 1.0 && beta >= 1.0, "theoretical profile needs alpha, beta >= 1");
  return {static_cast<int>(std::ceil(3.0 * alpha)),
          static_cast<int>(std::ceil(10.0 * alpha + 10.0 * beta))};
}

IndicatorParams tau_tilde_params(double alpha, double beta, Profile profile) {
  if (profile == Profile::practical) return practical_params(alpha);
  require(alpha > 0.0 && beta > 0.0, "theoretical profile needs alpha, beta > 0");
  return {static_cast<int>(std::ceil(alpha / 2.0)),
          static_cast<int>(std::ceil(beta + 5.0 * alpha)) + 25};
}

IndicatorKernel::IndicatorKernel(const ChebPartition& part, int j, IndicatorParams params,
                                 IndicatorForm form)
    : n_(part.n()), j_(j), params_(params), form_(form) {
  require(j >= 1 && j <= n_ - 1, "indicator index out of range");
  require(params.xi >= 0 && params.mu >= 1, "indicator exponents out of range");
  const double step = std::numbers::pi / n_;
  theta_bar_ = (j - 0.5) * step;
  theta0_ = (2 * j < n_) ? (j - 0.25) * step : (j - 0.75) * step;
  xj_ = part.knot(j);
  xj1_ = part.knot(j - 1);
  hj_ = part.length(j);
  t_bar_ = t_at_angle(theta_bar_);
}

double IndicatorKernel::t_at_angle(double theta) const {
  // cos(2n theta)/(cos theta - cos theta0) = -/+ sin(2n e)/(2 sin(e/2) sin((theta+theta0)/2))
  // with e = theta - theta0, using cos(2n theta0) = 0; likewise for the sine term.
  const double two_n = 2.0 * n_;
  auto ratio = [two_n](double e) {
    const double s = std::sin(0.5 * e);
    return s == 0.0 ? 2.0 * two_n : std::sin(two_n * e) / s;
  };
  const double a = ratio(theta - theta0_) / std::sin(0.5 * (theta + theta0_));
  const double b = ratio(theta - theta_bar_) / std::sin(0.5 * (theta + theta_bar_));
  return 0.25 * (a * a + b * b);
}

double IndicatorKernel::t(double x) const {
  return t_at_angle(std::acos(std::clamp(x, -1.0, 1.0)));
}

double IndicatorKernel::at_angle(double theta) const {
  const double s = std::sin(theta);
  double w = std::pow(s * s, params_.xi) * std::pow(t_at_angle(theta) / t_bar_, params_.mu);
  if (form_ == IndicatorForm::tau_tilde) {
    const double y = std::cos(theta);
    w *= (y - xj_) * (xj1_ - y) / (hj_ * hj_);
  }
  return w;
}

int IndicatorKernel::degree() const {
  const int base = 2 * params_.xi + params_.mu * (4 * n_ - 2);
  return form_ == IndicatorForm::tau_tilde ? base + 2 : base;
}

namespace {

KernelPoly normalized(std::shared_ptr<const IndicatorKernel> kernel, int panels) {
  KernelPoly raw(kernel, panels);
  const double total = raw.total();
  if (!(total > 0.0) || !std::isfinite(total))
    fail(ErrorKind::capacity, "indicator normalization out of floating-point range");
  return raw.rescaled(0.0, 1.0 / total);
}

}  // namespace

IndicatorPoly::IndicatorPoly(const ChebPartition& part, int j, IndicatorParams params,
                             IndicatorForm form)
    : kernel_(std::make_shared<IndicatorKernel>(part, j, params, form)),
      body_(normalized(kernel_, part.n())) {}

double IndicatorPoly::log_d_norm() const {
  double v = -std::log(body_.scale()) + kernel_->params().mu * std::log(kernel_->t_scale());
  if (form() == IndicatorForm::tau_tilde) {
    // Undo the 1/h_j^2 applied to the extra quadratic factor.
    const double h = std::cos(std::numbers::pi * (j() - 1) / n()) -
                     std::cos(std::numbers::pi * j() / n());
    v += 2.0 * std::log(h);
  }
  return v;
}

namespace {

IndicatorPtr build(const ChebPartition& part, int j, IndicatorParams params,
                   IndicatorForm form, int degree_cap) {
  const long degree = 2L * params.xi + static_cast<long>(params.mu) * (4L * part.n() - 2) +
                      (form == IndicatorForm::tau_tilde ? 3 : 1);
  if (degree > degree_cap)
    fail(ErrorKind::capacity, "indicator degree " + std::to_string(degree) +
                                  " exceeds cap " + std::to_string(degree_cap) +
                                  "; use the practical profile");
  return std::make_shared<IndicatorPoly>(part, j, params, form);
}

}  // namespace

IndicatorPtr build_tau(const ChebPartition& part, int j, double alpha, double beta,
                       Profile profile, int degree_cap) {
  return build(part, j, tau_params(alpha, beta, profile), IndicatorForm::tau, degree_cap);
}

IndicatorPtr build_tau_tilde(const ChebPartition& part, int j, double alpha, double beta,
                             Profile profile, int degree_cap) {
  return build(part, j, tau_tilde_params(alpha, beta, profile), IndicatorForm::tau_tilde,
               degree_cap);
}

std::vector<IndicatorPtr> build_all(const ChebPartition& part, IndicatorParams params,
                                    IndicatorForm form) {
  std::vector<IndicatorPtr> out(std::max(0, part.n() - 1));
  parallel_for(out.size(), [&](std::size_t i) {
    out[i] = std::make_shared<IndicatorPoly>(part, static_cast<int>(i) + 1, params, form);
  });
  return out;
}

IndicatorExponents indicator_exponents(const IndicatorPoly& ip, double alpha, double beta,
                                       Profile profile) {
  const IndicatorParams p = ip.params();
  if (profile == Profile::theoretical)
    return {8.0 * alpha, 30.0 * (alpha + beta), alpha, beta};
  // Exponents the construction itself delivers for the given (xi, mu).
  return {2.0 * p.xi, 2.0 * p.mu + 2.0 * p.xi, 2.0 * p.xi,
          std::max(1.0, 2.0 * p.mu - 3.0 * p.xi - 3.0)};
}

FittedConstantsReport verify_indicator_bounds(const ChebPartition& part,
                                              const IndicatorPoly& ip, double alpha,
                                              double beta, Profile profile,
                                              const std::vector<double>& grid) {
  const int j = ip.j();
  const double h = part.length(j);
  const double xj = part.knot(j);
  const IndicatorExponents e = indicator_exponents(ip, alpha, beta, profile);
  const bool tilde = ip.form() == IndicatorForm::tau_tilde;
  const std::string lemma = tilde ? "indicator_tilde" : "indicator";

  double floor_min = INFINITY, deriv_max = 0.0, err_max = 0.0;
  for (double x : grid) {
    const double d = part.delta(x), psi = part.psi(j, x);
    const double dp = ip.derivative(x) * h;
    const double chi = x >= xj ? 1.0 : 0.0;
    const double err = std::abs(chi - ip.value(x));
    const double upper = std::pow(d, e.delta) * std::pow(psi, e.psi);
    if (upper > 0.0) {
      deriv_max = std::max(deriv_max, std::abs(dp) / upper);
      err_max = std::max(err_max, err / upper);
    } else if (std::abs(dp) > 1e-12 || err > 1e-10) {
      deriv_max = err_max = INFINITY;
    }
    if (!tilde) {
      const double lower = std::pow(d, e.floor_delta) * std::pow(psi, e.floor_psi);
      if (lower > 0.0) floor_min = std::min(floor_min, dp / lower);
    }
  }
  FittedConstantsReport rep;
  auto row = [&](const std::string& bound, double value, bool lower) {
    FittedConstant r;
    r.lemma = lemma;
    r.bound = bound;
    r.n = part.n();
    r.j_lo = r.j_hi = j;
    r.fitted_constant = value;
    r.lower = lower;
    r.note = to_string(profile);
    rep.rows.push_back(r);
  };
  if (!tilde) row("derivative_floor", floor_min, true);
  row("derivative_bound", deriv_max, false);
  row("indicator_error", err_max, false);
  return rep;
}

double tilde_sign_violation(const ChebPartition& part, const IndicatorPoly& ip,
                            const std::vector<double>& grid) {
  const int j = ip.j();
  const double lo = part.knot(j), hi = part.knot(j - 1), h = part.length(j);
  double worst = -INFINITY;
  for (double x : grid)
    if (x <= lo || x >= hi) worst = std::max(worst, ip.derivative(x) * h);
  return worst;
}

}  // namespace monofit
