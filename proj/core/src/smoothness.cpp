#include "monofit/smoothness.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "monofit/errors.hpp"

namespace monofit {

namespace {

double binomial(int k, int i) {
  double c = 1.0;
  for (int m = 1; m <= i; ++m) c = c * (k - i + m) / m;
  return c;
}

const std::vector<double>& standard_grid() {
  static const std::vector<double> grid = log_grid(1e-8, 4.0, 400);
  return grid;
}

}  // namespace

double finite_difference(const RealFn& f, double x, double u, int k, Interval domain) {
  require(u > 0.0, "difference step must be positive");
  require(k >= 1, "difference order must be positive");
  const double half = 0.5 * k * u;
  const double slack = 1e-14 * std::max(1.0, domain.length());
  if (x - half < domain.lo - slack || x + half > domain.hi + slack) return 0.0;
  double sum = 0.0;
  for (int i = 0; i <= k; ++i) {
    const double arg = std::clamp(x + (0.5 * k - i) * u, domain.lo, domain.hi);
    const double term = binomial(k, i) * f(arg);
    sum += (i % 2 == 0) ? term : -term;
  }
  return sum;
}

double modulus(const RealFn& f, int k, double t, Interval domain, int density) {
  require(t > 0.0, "modulus step must be positive");
  require(density >= 1, "modulus density must be positive");
  double best = 0.0;
  for (int i = 1; i <= density; ++i) {
    const double u = t * i / density;
    const double half = 0.5 * k * u;
    const double lo = domain.lo + half;
    const double hi = domain.hi - half;
    if (lo > hi) break;
    for (int m = 0; m <= density; ++m) {
      const double x = (m == density) ? hi : lo + (hi - lo) * m / density;
      best = std::max(best, std::abs(finite_difference(f, x, u, k, domain)));
    }
  }
  return best;
}

double ModulusTable::operator()(double s) const {
  if (t.empty() || s <= 0.0) return 0.0;
  if (s <= t.front()) return omega.front() * std::pow(s / t.front(), k);
  if (s >= t.back()) return omega.back();
  const auto it = std::upper_bound(t.begin(), t.end(), s);
  const std::size_t hi = static_cast<std::size_t>(it - t.begin());
  const std::size_t lo = hi - 1;
  const double w = (s - t[lo]) / (t[hi] - t[lo]);
  return omega[lo] + w * (omega[hi] - omega[lo]);
}

std::string ModulusTable::to_csv() const {
  std::ostringstream os;
  os << "t,omega_" << k << "\n" << std::setprecision(17);
  for (std::size_t i = 0; i < t.size(); ++i) os << t[i] << "," << omega[i] << "\n";
  return os.str();
}

ModulusTable modulus_table(const RealFn& f, int k, const std::vector<double>& ts,
                           Interval domain, int density) {
  ModulusTable table;
  table.k = k;
  table.t = ts;
  table.omega.reserve(ts.size());
  double running = 0.0;
  for (double s : ts) {
    // omega is nondecreasing in t, so the running max is still a lower estimate.
    running = std::max(running, modulus(f, k, s, domain, density));
    table.omega.push_back(running);
  }
  return table;
}

std::vector<double> log_grid(double lo, double hi, int points) {
  require(lo > 0.0 && hi > lo && points >= 2, "bad log grid");
  std::vector<double> g(points);
  const double a = std::log(lo), b = std::log(hi);
  // Open at lo: the first point sits one step above it.
  for (int i = 0; i < points; ++i) g[i] = std::exp(a + (b - a) * (i + 1) / points);
  g.back() = hi;
  return g;
}

Majorant::Majorant(int order, RealFn eval, MajorantKind kind, bool identically_zero)
    : order_(order), eval_(std::move(eval)), kind_(kind), zero_(identically_zero) {
  require(order >= 0, "majorant order must be nonnegative");
}

Majorant Majorant::zero(int order) {
  return Majorant(order, [](double) { return 0.0; }, MajorantKind::closed_form, true);
}

Majorant Majorant::power(int order, double coefficient, int exponent) {
  require(exponent >= 0 && exponent <= order, "power exceeds majorant order");
  if (coefficient == 0.0) return zero(order);
  return Majorant(order, [coefficient, exponent](double t) {
    return coefficient * std::pow(t, exponent);
  });
}

Majorant Majorant::tabulated(int order, std::vector<double> t, std::vector<double> values) {
  require(t.size() == values.size() && t.size() >= 2, "tabulated majorant needs samples");
  const bool all_zero =
      std::all_of(values.begin(), values.end(), [](double v) { return v <= 0.0; });
  if (all_zero) return zero(order);
  // A k-majorant vanishing at one positive point vanishes everywhere, so samples are > 0.
  std::vector<double> lt(t.size()), lv(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    lt[i] = std::log(t[i]);
    lv[i] = std::log(std::max(values[i], 1e-300));
  }
  auto eval = [order, lt = std::move(lt), lv = std::move(lv)](double s) {
    const double ls = std::log(s);
    if (ls <= lt.front()) return std::exp(lv.front() + order * (ls - lt.front()));
    if (ls >= lt.back()) return std::exp(lv.back());
    const auto it = std::upper_bound(lt.begin(), lt.end(), ls);
    const std::size_t hi = static_cast<std::size_t>(it - lt.begin());
    const std::size_t lo = hi - 1;
    const double w = (ls - lt[lo]) / (lt[hi] - lt[lo]);
    return std::exp(lv[lo] + w * (lv[hi] - lv[lo]));
  };
  return Majorant(order, std::move(eval), MajorantKind::tabulated, false);
}

Majorant Majorant::scaled(double c) const {
  require(c >= 0.0, "majorant scale must be nonnegative");
  if (zero_ || c == 0.0) return zero(order_);
  auto base = eval_;
  return Majorant(order_, [base, c](double t) { return c * base(t); }, kind_, false);
}

MajorantCheck check_majorant(const Majorant& phi, double tol) {
  MajorantCheck out;
  out.zero_at_origin = phi(0.0) == 0.0;
  const auto& g = standard_grid();
  double scale = 0.0;
  for (double t : g) scale = std::max(scale, std::abs(phi(t)));
  out.nondecreasing = true;
  out.scaled_nonincreasing = true;
  const int k = phi.order();
  for (std::size_t i = 0; i + 1 < g.size(); ++i) {
    const double a = phi(g[i]), b = phi(g[i + 1]);
    const double drop = a - b;
    if (drop > tol * scale) {
      out.nondecreasing = false;
      out.worst_increase_violation = std::max(out.worst_increase_violation, drop);
    }
    const double sa = a / std::pow(g[i], k), sb = b / std::pow(g[i + 1], k);
    const double rise = sb - sa;
    if (rise > tol * std::max(sa, sb)) {
      out.scaled_nonincreasing = false;
      out.worst_scaled_violation =
          std::max(out.worst_scaled_violation, rise / std::max(sa, 1e-300));
    }
  }
  return out;
}

Majorant star_majorant(const RealFn& phi, int k_plus_r) {
  require(k_plus_r >= 1, "majorant order must be positive");
  const auto& g = standard_grid();
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) v[i] = phi(g[i]);
  require(phi(0.0) == 0.0, "majorant candidate must vanish at 0");
  double scale = 0.0;
  for (double x : v) scale = std::max(scale, std::abs(x));
  for (std::size_t i = 0; i + 1 < v.size(); ++i)
    require(v[i + 1] >= v[i] - 1e-12 * scale, "majorant candidate is decreasing");
  if (scale == 0.0) return Majorant::zero(k_plus_r);
  // star(t_i) = max_{l >= i} (t_i / t_l)^m phi(t_l), swept from the right.
  std::vector<double> star(g.size());
  double best = 0.0;  // max_{l >= i} t_l^{-m} phi(t_l), in log form below
  double best_log = -INFINITY;
  for (std::size_t i = g.size(); i-- > 0;) {
    if (v[i] > 0.0) best_log = std::max(best_log, std::log(v[i]) - k_plus_r * std::log(g[i]));
    best = std::isfinite(best_log) ? std::exp(best_log + k_plus_r * std::log(g[i])) : 0.0;
    star[i] = std::max(best, v[i]);
  }
  Majorant m = Majorant::tabulated(k_plus_r, g, star);
  return Majorant(k_plus_r, [m](double t) { return m(t); }, MajorantKind::star_regularized,
                  m.is_zero());
}

Majorant compose_phi(int r, const Majorant& psi) {
  require(r >= 0, "power must be nonnegative");
  if (r == 0) return psi;
  if (psi.is_zero()) return Majorant::zero(r + psi.order());
  return Majorant(
      r + psi.order(), [r, psi](double t) { return std::pow(t, r) * psi(t); },
      MajorantKind::power_composed, false);
}

SmoothFunctionCheck check_smooth_function(const SmoothFunction& f) {
  SmoothFunctionCheck out;
  if (static_cast<int>(f.d.size()) != f.r + 1) {
    out.derivatives_ok = false;
    out.reason = "derivative list does not match r";
    return out;
  }
  constexpr int kPoints = 1000;
  std::vector<double> v(kPoints);
  double lo = INFINITY, hi = -INFINITY;
  for (int i = 0; i < kPoints; ++i) {
    v[i] = f(-1.0 + 2.0 * i / (kPoints - 1));
    lo = std::min(lo, v[i]);
    hi = std::max(hi, v[i]);
  }
  const double range = std::max(hi - lo, 1e-300);
  if (f.monotone) {
    for (int i = 0; i + 1 < kPoints; ++i) {
      if (v[i + 1] < v[i] - 1e-12 * range) {
        out.monotone_ok = false;
        out.reason = "not nondecreasing on the check grid";
        break;
      }
    }
  }
  constexpr double h = 1e-5;
  for (int i = 0; i < f.r && out.derivatives_ok; ++i) {
    double scale = 1.0;
    for (int m = 0; m <= 200; ++m)
      scale = std::max(scale, std::abs(f.d[i + 1](-1.0 + 2.0 * m / 200)));
    for (int m = 1; m < 200; ++m) {
      const double x = -0.995 + 1.99 * m / 200.0 + 1.234e-4;
      const double fd = (f.d[i](x + h) - f.d[i](x - h)) / (2.0 * h);
      if (std::abs(fd - f.d[i + 1](x)) > 1e-6 * scale) {
        out.derivatives_ok = false;
        out.reason = "derivative " + std::to_string(i + 1) + " inconsistent";
        break;
      }
    }
  }
  return out;
}

}  // namespace monofit
