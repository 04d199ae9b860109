#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>

#include "monofit/errors.hpp"
#include "monofit/monotone.hpp"
#include "monofit/parallel.hpp"

namespace monofit {

nlohmann::json ApproximateReport::to_json() const {
  nlohmann::json j = {{"f_id", f_id},
                      {"r", r},
                      {"n_requested", n_requested},
                      {"n_effective", n_effective},
                      {"N_realized", n_realized},
                      {"trace", trace},
                      {"monotone_pass", monotone_pass},
                      {"min_derivative", min_derivative},
                      {"endpoint_err", endpoint_err},
                      {"sup_ratio_pointwise", sup_ratio_pointwise},
                      {"sup_ratio_endpoint", sup_ratio_endpoint},
                      {"sup_error", sup_error},
                      {"varsigma", varsigma},
                      {"degree", degree},
                      {"global_polynomial", global_polynomial}};
  if (!global_polynomial) {
    j["constants"] = projection.constants.to_json();
    j["escalations"] = projection.escalations;
    j["direct"] = projection.direct;
    j["anchor_blend"] = projection.blend;
    j["assembled_min_derivative"] = projection.assembled_min_derivative;
    j["flattened"] = {{"right", projection.flattened_right}, {"left", projection.flattened_left}};
    j["classification"] = projection.cls.to_json();
  }
  return j;
}

Majorant omega2_majorant(const SmoothFunction& f) {
  const RealFn& g = f.d.at(static_cast<std::size_t>(f.r));
  const std::vector<double> ts = log_grid(1e-4, 2.0, 40);
  const ModulusTable table = modulus_table(g, 2, ts, {-1.0, 1.0}, 256);
  double size = 0.0;
  for (int i = 0; i <= 200; ++i) size = std::max(size, std::abs(g(-1.0 + i / 100.0)));
  const double top = *std::max_element(table.omega.begin(), table.omega.end());
  // Second differences of a linear function are rounding noise.
  if (top <= 1e-12 * std::max(1.0, size)) return Majorant::zero(2);
  return star_majorant([table](double t) { return t <= 0.0 ? 0.0 : table(t); }, 2);
}

PointwiseRatios pointwise_ratios(const SmoothFunction& f, const Polynomial& p, int n,
                                 const RealFn& omega, int points) {
  const double zone = 1.0 / (static_cast<double>(n) * n);
  std::vector<double> xs;
  xs.reserve(static_cast<std::size_t>(points) * 2);
  for (int i = 0; i < points; ++i) xs.push_back(std::cos(std::numbers::pi * i / (points - 1)));
  for (int i = 0; i <= points / 4; ++i) {
    const double t = zone * i / (points / 4);
    xs.push_back(1.0 - t);
    xs.push_back(-1.0 + t);
  }
  double lo = INFINITY, hi = -INFINITY;
  for (double x : xs) {
    lo = std::min(lo, f(x));
    hi = std::max(hi, f(x));
  }
  const double tiny = 1e-12 * std::max(1.0, hi - lo);
  std::vector<double> rp(xs.size(), 0.0), re(xs.size(), 0.0);
  parallel_for(xs.size(), [&](std::size_t i) {
    const double x = xs[i];
    const double err = std::abs(f(x) - p.value(x));
    const double w = std::sqrt(std::max(0.0, 1.0 - x * x));
    const double om = omega(w / n);
    const double d1 = std::pow(w / n, f.r) * om;
    rp[i] = d1 > 0.0 ? err / d1 : (err > tiny ? INFINITY : 0.0);
    if (1.0 - std::abs(x) <= zone) {
      const double d2 = std::pow(w, 2.0 * f.r) * om;
      re[i] = d2 > 0.0 ? err / d2 : (err > tiny ? INFINITY : 0.0);
    }
  });
  return {*std::max_element(rp.begin(), rp.end()), *std::max_element(re.begin(), re.end())};
}

namespace {

std::optional<LocalPolynomial> global_piece(const Spline& s) {
  // The widest piece has the best-conditioned coefficients. The others are compared with it
  // on their own intervals only; extrapolating them over [-1, 1] would magnify their
  // rounding-level coefficient noise by roughly h_j^{-k}.
  const ChebPartition& part = s.partition();
  int widest = 1;
  for (int j = 2; j <= s.n(); ++j)
    if (part.length(j) > part.length(widest)) widest = j;
  const LocalPolynomial& g = s.piece(widest);
  const double size = std::max({1.0, std::abs(g.value(-1.0)), std::abs(g.value(1.0))});
  for (int j = 1; j <= s.n(); ++j) {
    const LocalPolynomial& p = s.piece(j);
    const double a = part.knot(j), b = part.knot(j - 1);
    for (int i = 0; i <= 16; ++i) {
      const double x = a + (b - a) * i / 16.0;
      if (std::abs(p.value(x) - g.value(x)) > 1e-12 * size) return std::nullopt;
    }
  }
  return g;
}

struct Attempt {
  PolyPtr p;
  Spline spline;
  ApproximateReport report;
};

Attempt attempt(const SmoothFunction& f, int r, int n, const Majorant& psi,
                const CalibrationConstants& base) {
  const ChebPartition part(n);
  SplineFit fit = monotone_spline_fit(f, part);
  Attempt out{nullptr, fit.spline, {}};
  ApproximateReport& rep = out.report;
  if (auto g = global_piece(fit.spline)) {
    out.p = std::make_shared<LocalPolynomial>(*g);
    rep.global_polynomial = true;
    rep.degree = g->degree();
    rep.monotone_pass = check_monotone(*out.p).pass;
    return out;
  }
  const Majorant phi = compose_phi(r, psi);
  const double varsigma = b_k_max(fit.spline, phi);
  rep.varsigma = varsigma;
  const Majorant phi_hat = phi.scaled(varsigma);
  const EndpointFloors floors = endpoint_floors(f);
  const double scale = std::pow(3.0, 1.0 - r) / varsigma;
  Projection proj =
      monotone_projection(fit.spline, phi_hat, base, {floors.d_plus * scale, floors.d_minus * scale});
  out.p = proj.p;
  rep.degree = proj.degree;
  rep.monotone_pass = proj.monotone.pass;
  rep.min_derivative = proj.monotone.min_derivative;
  rep.projection = std::move(proj);
  return out;
}

}  // namespace

Approximation approximate(const SmoothFunction& f, int r, int n, const ApproximateConfig& cfg) {
  require(r >= 1, "r must be positive");
  require(f.r >= r, "f must provide r derivatives");
  const int k = r + 2;
  const double alpha = 2.0 * r + 2.0;
  CalibrationConstants base = cfg.constants.value_or(default_constants(k, alpha, cfg.profile));
  base.k = k;
  base.alpha = alpha;
  base.profile = cfg.profile;
  const Majorant psi = omega2_majorant(f);

  int n_eff = (std::max(n, 1) + base.c3 - 1) / base.c3 * base.c3;
  n_eff = std::max(n_eff, base.c3 * (base.c4 + 1));
  std::vector<int> trace;
  std::string last, detail;
  while (n_eff <= cfg.n_cap) {
    trace.push_back(n_eff);
    try {
      Attempt a = attempt(f, r, n_eff, psi, base);
      ApproximateReport& rep = a.report;
      rep.f_id = f.id;
      rep.r = r;
      rep.n_requested = n;
      rep.n_effective = n_eff;
      rep.n_realized = n_eff;
      rep.trace = trace;
      rep.endpoint_err = std::max(std::abs(a.p->value(1.0) - f(1.0)),
                                  std::abs(a.p->value(-1.0) - f(-1.0)));
      const PointwiseRatios pr =
          pointwise_ratios(f, *a.p, n_eff, [&psi](double t) { return psi(t); }, cfg.report_points);
      rep.sup_ratio_pointwise = pr.pointwise;
      rep.sup_ratio_endpoint = pr.endpoint;
      double sup = 0.0;
      for (int i = 0; i < cfg.report_points; ++i) {
        const double x = std::cos(std::numbers::pi * i / (cfg.report_points - 1));
        sup = std::max(sup, std::abs(f(x) - a.p->value(x)));
      }
      rep.sup_error = sup;
      return {a.p, a.spline, psi, std::move(rep)};
    } catch (const NeedsLargerN& e) {
      last = e.what();
      detail = e.detail();
      n_eff *= 2;
    }
  }
  throw NeedsLargerN("no order up to " + std::to_string(cfg.n_cap) + " succeeded: " + last,
                     trace, detail);
}

}  // namespace monofit
