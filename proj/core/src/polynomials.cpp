#include "monofit/polynomials.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "monofit/errors.hpp"
#include "monofit/parallel.hpp"

namespace monofit {

void Polynomial::values(std::span<const double> xs, std::span<double> out) const {
  for (std::size_t i = 0; i < xs.size(); ++i) out[i] = value(xs[i]);
}

void Polynomial::derivatives(std::span<const double> xs, std::span<double> out) const {
  for (std::size_t i = 0; i < xs.size(); ++i) out[i] = derivative(xs[i]);
}

// ---------------------------------------------------------------------------------------
// ChebSeries

ChebSeries::ChebSeries(std::vector<double> coeffs, int degree_cap)
    : c_(std::move(coeffs)), cap_(degree_cap) {
  if (c_.empty()) c_.push_back(0.0);
  if (static_cast<long>(c_.size()) - 1 > cap_)
    fail(ErrorKind::capacity, "Chebyshev series degree " + std::to_string(c_.size() - 1) +
                                  " exceeds cap " + std::to_string(cap_));
}

ChebSeries ChebSeries::from_monomial(std::span<const double> a) {
  if (a.empty()) return constant(0.0);
  // Horner in the Chebyshev basis: x T_0 = T_1, x T_k = (T_{k+1} + T_{k-1}) / 2.
  std::vector<double> r{a.back()};
  for (std::size_t k = a.size() - 1; k-- > 0;) {
    std::vector<double> next(r.size() + 1, 0.0);
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i == 0) {
        next[1] += r[0];
      } else {
        next[i + 1] += 0.5 * r[i];
        next[i - 1] += 0.5 * r[i];
      }
    }
    next[0] += a[k];
    r = std::move(next);
  }
  return ChebSeries(std::move(r));
}

int ChebSeries::degree() const {
  for (std::size_t k = c_.size(); k-- > 0;)
    if (c_[k] != 0.0) return static_cast<int>(k);
  return 0;
}

double ChebSeries::value(double x) const {
  double b1 = 0.0, b2 = 0.0;
  for (std::size_t k = c_.size(); k-- > 1;) {
    const double b0 = c_[k] + 2.0 * x * b1 - b2;
    b2 = b1;
    b1 = b0;
  }
  return c_[0] + x * b1 - b2;
}

double ChebSeries::derivative(double x) const { return differentiate().value(x); }

ChebSeries ChebSeries::differentiate() const {
  const std::size_t n = c_.size();
  if (n <= 1) return ChebSeries({0.0}, cap_);
  std::vector<double> d(n - 1, 0.0);
  // d_{k-1} = d_{k+1} + 2 k c_k, halved at k = 1.
  for (std::size_t k = n - 1; k >= 1; --k) {
    const double upper = (k + 1 < n - 1) ? d[k + 1] : 0.0;
    d[k - 1] = upper + 2.0 * static_cast<double>(k) * c_[k];
  }
  d[0] *= 0.5;
  return ChebSeries(std::move(d), cap_);
}

ChebSeries ChebSeries::antidifferentiate() const {
  const std::size_t n = c_.size();
  std::vector<double> a(n + 1, 0.0);
  auto c = [&](std::size_t k) { return k < n ? c_[k] : 0.0; };
  a[1] = c(0) - 0.5 * c(2);
  for (std::size_t k = 2; k <= n; ++k) a[k] = (c(k - 1) - c(k + 1)) / (2.0 * k);
  ChebSeries out(std::move(a), cap_);
  out.c_[0] = -out.value(-1.0);
  return out;
}

ChebSeries ChebSeries::operator+(const ChebSeries& o) const {
  std::vector<double> r(std::max(c_.size(), o.c_.size()), 0.0);
  for (std::size_t k = 0; k < c_.size(); ++k) r[k] += c_[k];
  for (std::size_t k = 0; k < o.c_.size(); ++k) r[k] += o.c_[k];
  return ChebSeries(std::move(r), std::min(cap_, o.cap_));
}

ChebSeries ChebSeries::operator-(const ChebSeries& o) const { return *this + o * -1.0; }

ChebSeries ChebSeries::operator*(const ChebSeries& o) const {
  const int cap = std::min(cap_, o.cap_);
  const long deg = static_cast<long>(c_.size() + o.c_.size()) - 2;
  if (deg > cap)
    fail(ErrorKind::capacity,
         "product degree " + std::to_string(deg) + " exceeds cap " + std::to_string(cap));
  std::vector<double> r(static_cast<std::size_t>(deg) + 1, 0.0);
  // 2 T_m T_n = T_{m+n} + T_{|m-n|}
  for (std::size_t m = 0; m < c_.size(); ++m) {
    if (c_[m] == 0.0) continue;
    for (std::size_t k = 0; k < o.c_.size(); ++k) {
      const double p = 0.5 * c_[m] * o.c_[k];
      r[m + k] += p;
      r[m > k ? m - k : k - m] += p;
    }
  }
  return ChebSeries(std::move(r), cap);
}

ChebSeries ChebSeries::operator*(double s) const {
  std::vector<double> r = c_;
  for (double& v : r) v *= s;
  return ChebSeries(std::move(r), cap_);
}

// ---------------------------------------------------------------------------------------
// Gauss-Legendre

namespace {

GaussRule build_rule(int m) {
  GaussRule rule;
  rule.nodes.resize(m);
  rule.weights.resize(m);
  for (int i = 0; i < (m + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (m + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= m; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = m * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[m - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[m - 1 - i] = w;
  }
  if (m % 2 == 1) rule.nodes[m / 2] = 0.0;
  return rule;
}

}  // namespace

const GaussRule& gauss_rule(int m) {
  require(m >= 1 && m <= kGaussNodeCap, "Gauss rule size out of range");
  static std::mutex mutex;
  static std::map<int, GaussRule> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(m);
  if (it == cache.end()) it = cache.emplace(m, build_rule(m)).first;
  return it->second;
}

double gauss_integrate(const RealFn& f, double a, double b, int poly_degree) {
  require(a <= b, "integration bounds reversed");
  if (a == b) return 0.0;
  const int need = std::max(1, (poly_degree + 2) / 2);
  const int panels = (need + kGaussNodeCap - 1) / kGaussNodeCap;
  const int m = std::min(need, kGaussNodeCap);
  const GaussRule& rule = gauss_rule(m);
  const double w = (b - a) / panels;
  double sum = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * w;
    const double mid = lo + 0.5 * w, half = 0.5 * w;
    double s = 0.0;
    for (int i = 0; i < m; ++i) s += rule.weights[i] * f(mid + half * rule.nodes[i]);
    sum += half * s;
  }
  return sum;
}

// ---------------------------------------------------------------------------------------
// Monotonicity check

std::vector<double> monotone_grid(int degree) {
  const std::size_t m = std::max<std::size_t>(4 * static_cast<std::size_t>(std::max(degree, 0)), 2000);
  std::vector<double> xs(m);
  for (std::size_t k = 0; k < m; ++k)
    xs[k] = std::cos(std::numbers::pi * static_cast<double>(k) / static_cast<double>(m - 1));
  return xs;
}

std::vector<double> sample_derivative(const Polynomial& p, const std::vector<double>& xs) {
  const std::size_t m = xs.size();
  std::vector<double> d(m);
  constexpr std::size_t kChunk = 256;
  const std::size_t chunks = (m + kChunk - 1) / kChunk;
  parallel_for(chunks, [&](std::size_t c) {
    const std::size_t lo = c * kChunk, len = std::min(kChunk, m - lo);
    p.derivatives(std::span<const double>(xs).subspan(lo, len),
                  std::span<double>(d).subspan(lo, len));
  });
  return d;
}

MonotoneReport monotone_report(const std::vector<double>& xs, const std::vector<double>& d,
                               double tol) {
  require(xs.size() == d.size(), "sample count mismatch");
  MonotoneReport rep;
  rep.points = xs.size();
  rep.min_derivative = INFINITY;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    rep.max_abs_derivative = std::max(rep.max_abs_derivative, std::abs(d[k]));
    if (d[k] < rep.min_derivative) {
      rep.min_derivative = d[k];
      rep.argmin = xs[k];
    }
  }
  rep.pass = std::isfinite(rep.min_derivative) &&
             rep.min_derivative >= -tol * std::max(1.0, rep.max_abs_derivative);
  return rep;
}

MonotoneReport check_monotone(const Polynomial& p, double tol) {
  const std::vector<double> xs = monotone_grid(p.degree());
  return monotone_report(xs, sample_derivative(p, xs), tol);
}

// ---------------------------------------------------------------------------------------
// Kernel integrals

double Kernel::operator()(double y) const { return at_angle(std::acos(std::clamp(y, -1.0, 1.0))); }

KernelPoly::KernelPoly(std::shared_ptr<const Kernel> kernel, int panels, double base,
                       double scale)
    : kernel_(std::move(kernel)), base_(base), scale_(scale) {
  require(kernel_ != nullptr, "kernel is null");
  require(panels >= 1, "panel count must be positive");
  // K(cos t) sin t is a trigonometric polynomial of degree deg K + 1.
  const double width = std::numbers::pi / panels;
  const double oscill = 0.5 * (kernel_->degree() + 1) * width;
  const int split = std::max(1, static_cast<int>(std::ceil(oscill / 48.0)));
  auto plan = std::make_shared<Plan>();
  plan->nodes = static_cast<int>(std::ceil(oscill / split)) + 16;
  const int count = panels * split;
  plan->edges.resize(count + 1);
  for (int i = 0; i <= count; ++i)
    plan->edges[i] = std::numbers::pi * (1.0 - static_cast<double>(i) / count);
  plan->edges.back() = 0.0;
  plan_ = plan;
  plan->prefix.assign(count + 1, 0.0);
  std::vector<double> mass(count, 0.0);
  double total_mass = 0.0;
  for (int i = 0; i < count; ++i) {
    plan->prefix[i + 1] =
        plan->prefix[i] + partial(plan->edges[i + 1], plan->edges[i], &mass[i]);
    total_mass += mass[i];
  }
  plan->negligible.resize(count);
  for (int i = 0; i < count; ++i) plan->negligible[i] = mass[i] <= 1e-17 * total_mass;
}

double KernelPoly::partial(double theta_lo, double theta_hi, double* abs_sum) const {
  if (theta_hi <= theta_lo) return 0.0;
  const GaussRule& rule = gauss_rule(plan_->nodes);
  const double mid = 0.5 * (theta_lo + theta_hi), half = 0.5 * (theta_hi - theta_lo);
  double s = 0.0, a = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double t = mid + half * rule.nodes[i];
    const double v = rule.weights[i] * kernel_->at_angle(t) * std::sin(t);
    s += v;
    a += std::abs(v);
  }
  if (abs_sum) *abs_sum = half * a;
  return half * s;
}

double KernelPoly::cumulative(double x) const {
  if (x <= -1.0) return 0.0;
  if (x >= 1.0) return total();
  const double theta = std::acos(x);
  const auto& e = plan_->edges;
  const std::size_t count = e.size() - 1;
  const double step = std::numbers::pi / static_cast<double>(count);
  std::size_t i = static_cast<std::size_t>((std::numbers::pi - theta) / step);
  i = std::min(i, count - 1);
  while (i > 0 && e[i] < theta) --i;
  while (i + 1 < count && e[i + 1] > theta) ++i;
  const auto& prefix = plan_->prefix;
  // A negligible subpanel is filled linearly; the error is below its mass.
  if (plan_->negligible[i])
    return prefix[i] + (prefix[i + 1] - prefix[i]) * (e[i] - theta) / (e[i] - e[i + 1]);
  return prefix[i] + partial(theta, e[i]);
}

double KernelPoly::value(double x) const { return base_ + scale_ * cumulative(x); }

double KernelPoly::derivative(double x) const { return scale_ * (*kernel_)(x); }

void KernelPoly::values(std::span<const double> xs, std::span<double> out) const {
  for (std::size_t i = 0; i < xs.size(); ++i) out[i] = value(xs[i]);
}

KernelPoly KernelPoly::rescaled(double base, double scale) const {
  KernelPoly copy = *this;
  copy.base_ = base;
  copy.scale_ = scale;
  return copy;
}

ChebSeries chebyshev_interpolant(const Polynomial& p, int degree) {
  require(degree >= 0, "interpolant degree must be nonnegative");
  if (degree == 0) return ChebSeries::constant(p.value(0.0));
  const int n = degree;
  std::vector<double> cosine(static_cast<std::size_t>(2 * n));
  for (int m = 0; m < 2 * n; ++m) cosine[static_cast<std::size_t>(m)] = std::cos(std::numbers::pi * m / n);
  std::vector<double> xs(static_cast<std::size_t>(n) + 1), fx(xs.size());
  for (int k = 0; k <= n; ++k) xs[static_cast<std::size_t>(k)] = cosine[static_cast<std::size_t>(k)];
  xs.front() = 1.0;
  xs.back() = -1.0;
  p.values(xs, fx);
  fx.front() *= 0.5;
  fx.back() *= 0.5;
  std::vector<double> c(xs.size());
  parallel_for(c.size(), [&](std::size_t j) {
    double sum = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k)
      sum += fx[k] * cosine[(j * k) % static_cast<std::size_t>(2 * n)];
    c[j] = sum * 2.0 / n;
  });
  c.front() *= 0.5;
  c.back() *= 0.5;
  return ChebSeries(std::move(c), std::max(kDefaultDegreeCap, n));
}

}  // namespace monofit
