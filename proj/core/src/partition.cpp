#include "monofit/partition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

#include "monofit/errors.hpp"

namespace monofit {

double varphi(double x) {
  const double s = (1.0 - x) * (1.0 + x);
  return s > 0.0 ? std::sqrt(s) : 0.0;
}

double rho(int n, double x) {
  const double nn = static_cast<double>(n);
  return varphi(x) / nn + 1.0 / (nn * nn);
}

double delta(int n, double x) { return std::min(1.0, n * varphi(x)); }

ChebPartition::ChebPartition(int n) : n_(n) {
  require(n >= 1, "partition order must be positive");
  knots_.resize(n + 1);
  for (int j = 0; j <= n; ++j) knots_[j] = std::cos(j * std::numbers::pi / n);
  // Pin the symmetric values so that reflections are exact.
  knots_[0] = 1.0;
  knots_[n] = -1.0;
  if (n % 2 == 0) knots_[n / 2] = 0.0;
  lengths_.resize(n);
  for (int j = 1; j <= n; ++j) lengths_[j - 1] = knots_[j - 1] - knots_[j];
}

double ChebPartition::knot(int j) const {
  if (j < 0) return 1.0;
  if (j > n_) return -1.0;
  return knots_[j];
}

double ChebPartition::length(int j) const {
  require(j >= 1 && j <= n_, "interval index out of range");
  return lengths_[j - 1];
}

Interval ChebPartition::interval(int j) const {
  require(j >= 1 && j <= n_, "interval index out of range");
  return {knots_[j], knots_[j - 1]};
}

int ChebPartition::locate(double x) const {
  require(x >= -1.0 && x <= 1.0, "point outside [-1, 1]");
  // First j >= 1 with x_j <= x.
  auto it = std::partition_point(knots_.begin() + 1, knots_.end(),
                                 [x](double k) { return k > x; });
  return static_cast<int>(it - knots_.begin());
}

int ChebPartition::piece_index(double x) const { return locate(x); }

Interval ChebPartition::hull(int i, int j) const {
  require(i >= 1 && i <= n_ && j >= 1 && j <= n_, "interval index out of range");
  return {knots_[std::max(i, j)], knots_[std::min(i, j) - 1]};
}

double ChebPartition::hull_length(int i, int j) const { return hull(i, j).length(); }

double ChebPartition::dist(double x, int j) const {
  const Interval I = interval(j);
  return std::max({0.0, I.lo - x, x - I.hi});
}

double ChebPartition::psi(int j, double x) const {
  const double h = length(j);
  return h / (std::abs(x - knots_[j]) + h);
}

PointMetrics ChebPartition::metrics(double x) const {
  require(x >= -1.0 && x <= 1.0, "point outside [-1, 1]");
  PointMetrics m;
  m.x = x;
  m.varphi = monofit::varphi(x);
  m.rho = rho(x);
  m.delta = delta(x);
  m.psi.resize(n_);
  for (int j = 1; j <= n_; ++j) m.psi[j - 1] = psi(j, x);
  return m;
}

std::vector<double> make_grid(const GridSpec& spec) {
  std::vector<double> g;
  g.reserve(spec.uniform_points + spec.clustered_points + 2);
  if (spec.uniform_points >= 2) {
    for (int i = 0; i < spec.uniform_points; ++i)
      g.push_back(-1.0 + 2.0 * i / (spec.uniform_points - 1));
  }
  if (spec.clustered_points >= 2) {
    const int m = spec.clustered_points - 1;
    for (int k = 0; k <= m; ++k) g.push_back(std::cos(k * std::numbers::pi / m));
  }
  g.push_back(-1.0);
  g.push_back(1.0);
  for (double& x : g) x = std::clamp(x, -1.0, 1.0);
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  if (!spec.include_endpoints) {
    g.erase(std::remove_if(g.begin(), g.end(),
                           [](double x) { return x == -1.0 || x == 1.0; }),
            g.end());
  }
  return g;
}

const InequalityRow* InequalityReport::find(const std::string& id) const {
  for (const auto& r : rows)
    if (r.inequality == id) return &r;
  return nullptr;
}

nlohmann::json InequalityReport::to_json() const {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json row = {{"inequality", r.inequality}, {"statement", r.statement},
                          {"worst_ratio", r.worst_ratio}, {"argmax_x", r.argmax_x},
                          {"n", r.n},                     {"pass", r.pass}};
    if (r.explicit_constant) row["bound"] = r.bound;
    out.push_back(std::move(row));
  }
  return out;
}

namespace {

// Tracks the extremum of a ratio and where it happened.
struct Extremum {
  bool maximize = true;
  double value;
  double where = 0.0;
  explicit Extremum(bool max_mode)
      : maximize(max_mode),
        value(max_mode ? -std::numeric_limits<double>::infinity()
                       : std::numeric_limits<double>::infinity()) {}
  void offer(double v, double x) {
    if (maximize ? v > value : v < value) {
      value = v;
      where = x;
    }
  }
};

InequalityRow explicit_row(const std::string& id, const std::string& statement, int n,
                           const Extremum& e, double bound, bool strict) {
  InequalityRow r;
  r.inequality = id;
  r.statement = statement;
  r.n = n;
  r.worst_ratio = e.value;
  r.argmax_x = e.where;
  r.bound = bound;
  r.explicit_constant = true;
  r.pass = strict ? e.value < bound : e.value <= bound;
  return r;
}

InequalityRow fitted_row(const std::string& id, const std::string& statement, int n,
                         const Extremum& e) {
  InequalityRow r;
  r.inequality = id;
  r.statement = statement;
  r.n = n;
  r.worst_ratio = e.value;
  r.argmax_x = e.where;
  r.pass = std::isfinite(e.value) && e.value > 0.0;
  return r;
}

}  // namespace

InequalityReport verify_partition_inequalities(const ChebPartition& part,
                                               const GridSpec& spec) {
  const std::vector<double> grid = make_grid(spec);
  require(grid.size() >= 100, "inequality grid needs at least 100 points");
  const int n = part.n();
  InequalityReport rep;

  Extremum rho_over_h(true), h_over_rho(true), phi_over_rho(true);
  Extremum knot_gap(true), sq_first(true), sq_second(true);
  Extremum aux_explicit(true), aux_fitted(true);
  Extremum knot_rho_low(false), knot_rho_high(true);
  Extremum dist_low(true), dist_high(true), dist_linear(true);
  Extremum psi_sum(true), rho_dist_sum(true);
  Extremum endpoint_upper(true), endpoint_lower(false);

  for (double x : grid) {
    const double r = part.rho(x);
    const double phi = varphi(x);
    const double d = part.delta(x);
    phi_over_rho.offer(phi / n / r, x);
    double s_psi = 0.0, s_rho = 0.0;
    for (int j = 1; j <= n; ++j) {
      const double h = part.length(j);
      const double xj = part.knot(j);
      const double ax = std::abs(x - xj);
      const double ps = part.psi(j, x);
      const double ds = part.dist(x, j);
      if (part.interval(j).contains(x)) {
        rho_over_h.offer(r / h, x);
        h_over_rho.offer(h / r, x);
      }
      const double rj = part.rho(xj);
      sq_first.offer(r * r / (rj * (ax + rj)), x);
      sq_second.offer(rj * (ax + rj) / (h * (ax + r)), x);
      const double q = r / (r + ax);
      aux_explicit.offer(q * q * (r + ax) / h, x);
      aux_fitted.offer(q * q / ps, x);
      knot_rho_low.offer(rj / (ps * ps * r), x);
      knot_rho_high.offer(rj * ps / r, x);
      dist_low.offer((r + ds) / (r + ax), x);
      dist_high.offer((r + ax) / (r + ds), x);
      dist_linear.offer(ax / (4.0 * ds + 15.0 * r), x);
      s_psi += ps * ps;
      const double qd = r / (r + ds);
      s_rho += qd * qd * qd * qd;
      const double factor = (1.0 + part.knot(j - 1)) * (1.0 - xj);
      const double lhs = (1.0 - x) * (1.0 + x) / factor;
      if (d > 0.0) {
        endpoint_upper.offer(lhs * ps * ps / (d * d), x);
        endpoint_lower.offer(lhs / (ps * ps * d * d), x);
      } else {
        endpoint_upper.offer(0.0, x);
      }
    }
    // Knot-distance bound uses 0 <= j <= n and excludes (x_{j+1}, x_{j-1}).
    for (int j = 0; j <= n; ++j) {
      const double lo = part.knot(j + 1), hi = part.knot(j - 1);
      const bool inside = (x > lo && x < hi) || (j == 0 && x > lo) || (j == n && x < hi);
      if (inside) continue;
      knot_gap.offer(r / std::abs(x - part.knot(j)), x);
    }
    psi_sum.offer(s_psi, x);
    rho_dist_sum.offer(s_rho, x);
  }

  Extremum neighbor(true), prod_min(true), prod_max(true);
  for (int j = 1; j <= n; ++j) {
    const double h = part.length(j);
    if (j > 1) neighbor.offer(part.length(j - 1) / h, part.knot(j));
    if (j < n) neighbor.offer(part.length(j + 1) / h, part.knot(j));
    const double factor = (1.0 + part.knot(j - 1)) * (1.0 - part.knot(j));
    prod_min.offer(2.0 / (static_cast<double>(n) * n * factor), part.knot(j));
    const double rj = part.rho(part.knot(j));
    prod_max.offer(factor / (static_cast<double>(n) * n * rj * rj), part.knot(j));
  }

  // Knot spacing: (j2-j1)/2 <= (x_{j1}-x_{j2})/h_{i+1} <= (j2-j1)^2.
  Extremum spacing_low(true), spacing_high(true);
  for (int j1 = 0; j1 < n; ++j1) {
    for (int j2 = j1 + 1; j2 <= n; ++j2) {
      const double span = part.knot(j1) - part.knot(j2);
      const double m = j2 - j1;
      for (int i = j1; i < j2; ++i) {
        const double ratio = span / part.length(i + 1);
        spacing_low.offer(m / 2.0 / ratio, part.knot(i));
        spacing_high.offer(ratio / (m * m), part.knot(i));
      }
    }
  }

  // Two-point bounds on a thinned grid.
  Extremum two_point(true), shift(true);
  const std::size_t stride = std::max<std::size_t>(1, grid.size() / 400);
  for (std::size_t a = 0; a < grid.size(); a += stride) {
    const double x = grid[a];
    const double rx = part.rho(x);
    for (std::size_t b = 0; b < grid.size(); b += stride) {
      const double y = grid[b];
      const double ry = part.rho(y);
      const double gap = std::abs(x - y);
      two_point.offer(ry * ry / (rx * (gap + rx)), x);
      shift.offer((gap + ry) / (gap + rx), x);
    }
  }

  rep.rows.push_back(explicit_row("mesh_lower", "phi/n < rho < h_j on I_j", n,
                                  rho_over_h, 1.0, true));
  rep.rows.push_back(explicit_row("mesh_phi", "phi/n < rho", n, phi_over_rho, 1.0, true));
  rep.rows.push_back(explicit_row("mesh_upper", "h_j < 5 rho on I_j", n, h_over_rho, 5.0, true));
  rep.rows.push_back(
      explicit_row("mesh_neighbor", "h_{j+-1} < 3 h_j", n, neighbor, 3.0, true));
  rep.rows.push_back(explicit_row("rho_two_point", "rho(y)^2 < 4 rho(x)(|x-y| + rho(x))",
                                  n, two_point, 4.0, true));
  rep.rows.push_back(explicit_row("rho_shift", "|x-y| + rho(y) < 2(|x-y| + rho(x))", n,
                                  shift, 2.0, true));
  rep.rows.push_back(explicit_row("rho_knot_gap",
                                  "rho(x) <= |x - x_j| off (x_{j+1}, x_{j-1})", n,
                                  knot_gap, 1.0, false));
  rep.rows.push_back(explicit_row("rho_knot_square",
                                  "rho(x)^2 < 4 rho(x_j)(|x-x_j| + rho(x_j))", n,
                                  sq_first, 4.0, true));
  rep.rows.push_back(explicit_row("rho_knot_length",
                                  "rho(x_j)(|x-x_j| + rho(x_j)) < 2 h_j(|x-x_j| + rho(x))",
                                  n, sq_second, 2.0, true));
  rep.rows.push_back(explicit_row("rho_psi_explicit",
                                  "(rho/(rho+|x-x_j|))^2 < 8 h_j/(rho+|x-x_j|)", n,
                                  aux_explicit, 8.0, true));
  rep.rows.push_back(fitted_row("rho_psi_fitted", "(rho/(rho+|x-x_j|))^2 <= c psi_j", n,
                                aux_fitted));
  rep.rows.push_back(fitted_row("rho_knot_lower", "c psi_j^2 rho <= rho(x_j)", n,
                                knot_rho_low));
  rep.rows.push_back(fitted_row("rho_knot_upper", "rho(x_j) <= c psi_j^{-1} rho", n,
                                knot_rho_high));
  rep.rows.push_back(explicit_row("dist_lower", "rho + dist <= rho + |x - x_j|", n,
                                  dist_low, 1.0, false));
  rep.rows.push_back(explicit_row("dist_upper", "rho + |x - x_j| <= 16(rho + dist)", n,
                                  dist_high, 16.0, false));
  rep.rows.push_back(explicit_row("dist_linear", "|x - x_j| <= 4 dist + 15 rho", n,
                                  dist_linear, 1.0, false));
  rep.rows.push_back(fitted_row("psi_square_sum", "sum_j psi_j^2 <= c", n, psi_sum));
  rep.rows.push_back(
      fitted_row("rho_dist_sum", "sum_j (rho/(rho + dist))^4 <= c", n, rho_dist_sum));
  rep.rows.push_back(explicit_row("endpoint_upper",
                                  "(1-x^2)/((1+x_{j-1})(1-x_j)) <= 2 delta^2 psi_j^{-2}", n,
                                  endpoint_upper, 2.0, false));
  rep.rows.push_back(fitted_row("endpoint_lower",
                                "(1-x^2)/((1+x_{j-1})(1-x_j)) >= c psi_j^2 delta^2", n,
                                endpoint_lower));
  rep.rows.push_back(explicit_row("knot_product_min", "(1+x_{j-1})(1-x_j) >= 2/n^2", n,
                                  prod_min, 1.0, false));
  // Stated with constant 2, which fails at j = n: there rho(x_n) = 1/n^2 and the ratio
  // tends to pi^2. Only an unnamed constant is needed downstream.
  rep.rows.push_back(fitted_row("knot_product_max", "(1+x_{j-1})(1-x_j) <= c n^2 rho(x_j)^2",
                                n, prod_max));
  rep.rows.push_back(explicit_row("spacing_lower",
                                  "(j2-j1)/2 <= (x_{j1}-x_{j2})/h_{i+1}", n, spacing_low,
                                  1.0, false));
  rep.rows.push_back(explicit_row("spacing_upper",
                                  "(x_{j1}-x_{j2})/h_{i+1} <= (j2-j1)^2", n, spacing_high,
                                  1.0, false));
  return rep;
}

std::vector<StabilityRow> unnamed_constants_stable(
    std::span<const InequalityReport> reports, double factor) {
  std::map<std::string, StabilityRow> acc;
  std::vector<std::string> order;
  for (const auto& rep : reports) {
    for (const auto& r : rep.rows) {
      if (r.explicit_constant) continue;
      auto [it, fresh] = acc.try_emplace(r.inequality);
      if (fresh) {
        it->second.inequality = r.inequality;
        it->second.min_value = r.worst_ratio;
        it->second.max_value = r.worst_ratio;
        order.push_back(r.inequality);
      } else {
        it->second.min_value = std::min(it->second.min_value, r.worst_ratio);
        it->second.max_value = std::max(it->second.max_value, r.worst_ratio);
      }
    }
  }
  std::vector<StabilityRow> out;
  for (const auto& id : order) {
    StabilityRow s = acc[id];
    s.spread = s.min_value > 0.0 ? s.max_value / s.min_value
                                 : std::numeric_limits<double>::infinity();
    s.stable = std::isfinite(s.spread) && s.spread <= factor;
    out.push_back(s);
  }
  return out;
}

}  // namespace monofit
