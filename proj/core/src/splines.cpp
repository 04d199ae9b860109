#include "monofit/splines.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "monofit/errors.hpp"
#include "monofit/parallel.hpp"

namespace monofit {

namespace {

constexpr double kKnotTol = 1e-14;

double factorial(int m) {
  double f = 1.0;
  for (int i = 2; i <= m; ++i) f *= i;
  return f;
}

// Real roots of a + b u + c u^2 (c may be 0).
std::vector<double> quadratic_roots(double a, double b, double c) {
  std::vector<double> out;
  if (c == 0.0) {
    if (b != 0.0) out.push_back(-a / b);
    return out;
  }
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return out;
  const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
  if (q != 0.0) {
    out.push_back(q / c);
    out.push_back(a / q);
  } else {
    out.push_back(0.0);
  }
  return out;
}

// Solves the small dense system m x = rhs in place (partial pivoting).
std::vector<double> solve(std::vector<std::vector<double>> m, std::vector<double> rhs) {
  const std::size_t n = rhs.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(m[r][c]) > std::abs(m[p][c])) p = r;
    std::swap(m[c], m[p]);
    std::swap(rhs[c], rhs[p]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = m[r][c] / m[c][c];
      for (std::size_t k = c; k < n; ++k) m[r][k] -= f * m[c][k];
      rhs[r] -= f * rhs[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t r = n; r-- > 0;) {
    double s = rhs[r];
    for (std::size_t k = r + 1; k < n; ++k) s -= m[r][k] * x[k];
    x[r] = s / m[r][r];
  }
  return x;
}

}  // namespace

// ---------------------------------------------------------------------------------------
// Spline

Spline::Spline(ChebPartition part, int k, std::vector<LocalPolynomial> pieces)
    : part_(std::move(part)), k_(k), pieces_(std::move(pieces)) {
  require(k >= 1, "spline order must be positive");
  require(static_cast<int>(pieces_.size()) == part_.n(), "one piece per interval required");
  for (const auto& p : pieces_) require(p.degree() <= k - 1, "piece degree exceeds k-1");
}

double Spline::operator()(double x) const {
  x = std::clamp(x, -1.0, 1.0);
  return pieces_[part_.piece_index(x) - 1].value(x);
}

double Spline::derivative(double x) const {
  x = std::clamp(x, -1.0, 1.0);
  return pieces_[part_.piece_index(x) - 1].derivative(x);
}

double Spline::max_jump() const {
  double worst = 0.0;
  for (int j = 1; j < n(); ++j) {
    const double x = part_.knot(j);
    worst = std::max(worst, std::abs(piece(j + 1).value(x) - piece(j).value(x)));
  }
  return worst;
}

bool Spline::is_continuous(double tol) const { return max_jump() <= tol * scale(); }

double Spline::scale() const {
  double s = 1.0;
  for (int j = 1; j <= n(); ++j) {
    s = std::max(s, std::abs(piece(j).value(part_.knot(j))));
    s = std::max(s, std::abs(piece(j).value(part_.knot(j - 1))));
  }
  return s;
}

bool Spline::is_monotone(double tol) const {
  double slope = 1.0;
  for (int j = 1; j <= n(); ++j) {
    slope = std::max(slope, std::abs(piece(j).derivative(part_.knot(j))));
    slope = std::max(slope, std::abs(piece(j).derivative(part_.knot(j - 1))));
  }
  for (int j = 1; j <= n(); ++j) {
    if (min_derivative(piece(j), part_.knot(j), part_.knot(j - 1)) < -tol * slope) return false;
  }
  for (int j = 1; j < n(); ++j) {
    const double x = part_.knot(j);
    if (piece(j).value(x) - piece(j + 1).value(x) < -tol * scale()) return false;
  }
  return true;
}

Spline Spline::scaled(double c) const {
  std::vector<LocalPolynomial> p;
  p.reserve(pieces_.size());
  for (const auto& q : pieces_) p.push_back(q * c);
  return Spline(part_, k_, std::move(p));
}

Spline Spline::operator+(const Spline& o) const { return *this - o.scaled(-1.0); }

Spline Spline::operator-(const Spline& o) const {
  require(o.n() == n(), "spline partitions differ");
  std::vector<LocalPolynomial> p;
  p.reserve(pieces_.size());
  for (std::size_t j = 0; j < pieces_.size(); ++j) p.push_back(pieces_[j] - o.pieces_[j]);
  return Spline(part_, std::max(k_, o.k_), std::move(p));
}

nlohmann::json Spline::to_json() const {
  nlohmann::json pieces = nlohmann::json::array();
  for (const auto& p : pieces_) {
    std::vector<double> c = p.coeffs();
    c.resize(static_cast<std::size_t>(k_), 0.0);
    pieces.push_back(c);
  }
  return {{"n", n()}, {"k", k_}, {"pieces", pieces}, {"convention", "right-continuous"}};
}

// ---------------------------------------------------------------------------------------
// Norms and b functionals

double min_derivative(const LocalPolynomial& p, double a, double b) {
  double best = std::min(p.derivative(a), p.derivative(b));
  if (p.degree() <= 3) {
    // p' is at most quadratic; its extremum sits at the vertex.
    const auto& c = p.coeffs();
    if (c.size() >= 4 && c[3] != 0.0) {
      const double u = -c[2] / (3.0 * c[3]);
      const double x = p.center() + u;
      if (x > a && x < b) best = std::min(best, p.derivative(x));
    }
    return best;
  }
  for (int i = 1; i < 256; ++i) best = std::min(best, p.derivative(a + (b - a) * i / 256.0));
  return best;
}

double sup_norm(const LocalPolynomial& p, double a, double b, SupMode mode, int points) {
  require(points >= 2, "sup norm needs at least two points");
  double best = 0.0;
  for (int i = 0; i < points; ++i) {
    const double x = (i == points - 1) ? b : a + (b - a) * i / (points - 1);
    best = std::max(best, std::abs(p.value(x)));
  }
  if (mode == SupMode::exact && p.degree() <= 3) {
    const auto& c = p.coeffs();
    auto coef = [&](std::size_t i) { return i < c.size() ? c[i] : 0.0; };
    for (double u : quadratic_roots(coef(1), 2.0 * coef(2), 3.0 * coef(3))) {
      const double x = p.center() + u;
      if (x > a && x < b) best = std::max(best, std::abs(p.value(x)));
    }
  }
  return best;
}

double b_ij(const Spline& s, const Majorant& phi, int i, int j, SupMode mode) {
  const ChebPartition& part = s.partition();
  require(i >= 1 && i <= s.n() && j >= 1 && j <= s.n(), "b_ij index out of range");
  if (i == j) return 0.0;
  const LocalPolynomial diff = s.piece(i) - s.piece(j);
  const double num = sup_norm(diff, part.knot(i), part.knot(i - 1), mode);
  const double hj = part.length(j);
  const double den = phi(hj);
  if (den <= 0.0) {
    if (num <= 1e-14 * s.scale()) return 0.0;
    fail(ErrorKind::degenerate_majorant, "majorant vanishes at h_" + std::to_string(j) +
                                             " while pieces " + std::to_string(i) + " and " +
                                             std::to_string(j) + " differ");
  }
  return num / den * std::pow(hj / part.hull_length(i, j), s.k());
}

double b_k_max(const Spline& s, const Majorant& phi, Interval a, SupMode mode) {
  const ChebPartition& part = s.partition();
  std::vector<int> inside;
  for (int i = 1; i <= s.n(); ++i)
    if (part.knot(i) >= a.lo - kKnotTol && part.knot(i - 1) <= a.hi + kKnotTol)
      inside.push_back(i);
  require(!inside.empty(), "set contains no whole partition interval");
  std::vector<double> best(inside.size(), 0.0);
  parallel_for(inside.size(), [&](std::size_t u) {
    for (int j : inside) best[u] = std::max(best[u], b_ij(s, phi, inside[u], j, mode));
  });
  return *std::max_element(best.begin(), best.end());
}

FittedConstantsReport verify_bk_by_approximation(const RealFn& f, const Spline& s,
                                                 const Majorant& phi,
                                                 const std::vector<double>& grid) {
  const ChebPartition& part = s.partition();
  bool ok = true;
  for (double t : log_grid(1e-3, 2.0, 24)) {
    if (modulus(f, s.k(), t, {-1.0, 1.0}, 128) > phi(t) * (1.0 + 1e-9) + 1e-14) {
      ok = false;
      break;
    }
  }
  for (double x : grid) {
    if (!ok) break;
    if (std::abs(f(x) - s(x)) > phi(part.rho(x)) * (1.0 + 1e-9) + 1e-14) ok = false;
  }
  FittedConstant row;
  row.lemma = "bk_by_approximation";
  row.bound = "bk";
  row.n = s.n();
  row.j_lo = 1;
  row.j_hi = s.n();
  row.fitted_constant = ok ? b_k_max(s, phi) : INFINITY;
  row.note = ok ? "" : "hypotheses-fail";
  FittedConstantsReport rep;
  rep.rows.push_back(row);
  return rep;
}

BkDerivativeCheck verify_bk_by_derivative(const Spline& s, const Majorant& phi,
                                          const std::vector<double>& grid) {
  require(s.is_continuous(1e-10), "spline must be continuous");
  const ChebPartition& part = s.partition();
  BkDerivativeCheck out;
  if (s.k() == 1) return out;  // both sides vanish identically
  out.bk = b_k_max(s, phi);
  const auto knots = part.knots();
  for (double x : grid) {
    const bool at_knot = std::any_of(knots.begin(), knots.end(),
                                     [x](double k) { return std::abs(k - x) <= kKnotTol; });
    if (at_knot) continue;
    const double r = part.rho(x);
    const double den = phi(r);
    if (den > 0.0) out.derivative_norm = std::max(out.derivative_norm, r * std::abs(s.derivative(x)) / den);
  }
  if (out.bk == 0.0)
    out.ratio = 0.0;
  else
    out.ratio = out.derivative_norm > 0.0 ? out.bk / out.derivative_norm : INFINITY;
  return out;
}

// ---------------------------------------------------------------------------------------
// Monotone spline fit

EndpointFloors endpoint_floors(const SmoothFunction& f) {
  EndpointFloors out;
  const double rf = factorial(f.r);
  for (int side = 0; side < 2; ++side) {
    const double x = side == 0 ? 1.0 : -1.0;
    double scale = 1.0;
    for (int i = 1; i <= f.r; ++i) scale = std::max(scale, std::abs(f.derivative(i, x)));
    for (int i = 1; i <= f.r; ++i) {
      const double v = f.derivative(i, x);
      if (std::abs(v) > 1e-12 * scale) {
        (side == 0 ? out.i_plus : out.i_minus) = i;
        (side == 0 ? out.d_plus : out.d_minus) = std::abs(v) / (2.0 * rf);
        break;
      }
    }
  }
  return out;
}

namespace {

// Taylor polynomial of degree r at `end` plus a (x - end)^{r+1}, matching f at `at`.
LocalPolynomial hermite_end(const SmoothFunction& f, double end, double at, double* a_out) {
  std::vector<double> c(static_cast<std::size_t>(f.r) + 2, 0.0);
  for (int i = 0; i <= f.r; ++i) c[i] = f.derivative(i, end) / factorial(i);
  LocalPolynomial taylor(end, c);
  const double a = (f(at) - taylor.value(at)) / std::pow(at - end, f.r + 1);
  c[static_cast<std::size_t>(f.r) + 1] = a;
  *a_out = a;
  return {end, std::move(c)};
}

// Degree r+1 interpolant of f at r+2 equispaced nodes of [lo, hi], about lo.
LocalPolynomial equispaced_interpolant(const SmoothFunction& f, double lo, double hi) {
  const int m = f.r + 2;
  const double h = hi - lo;
  std::vector<std::vector<double>> v(m, std::vector<double>(m));
  std::vector<double> rhs(m);
  for (int i = 0; i < m; ++i) {
    const double u = static_cast<double>(i) / (m - 1);
    double p = 1.0;
    for (int k = 0; k < m; ++k, p *= u) v[i][k] = p;
    rhs[i] = (i == 0) ? f(lo) : (i == m - 1) ? f(hi) : f(lo + h * u);
  }
  std::vector<double> c = solve(std::move(v), std::move(rhs));
  double hk = 1.0;
  for (int k = 0; k < m; ++k, hk *= h) c[k] /= hk;
  return {lo, std::move(c)};
}

LocalPolynomial limited_piece(const SmoothFunction& f, const LocalPolynomial& candidate,
                              double lo, double hi) {
  const double h = hi - lo;
  const double fa = f(lo), fb = f(hi);
  const double s = std::max(0.0, (fb - fa) / h);
  if (f.r == 1) {
    const double m = std::clamp(candidate.derivative(lo), 0.0, 2.0 * s);
    return {lo, {fa, m, (s - m) / h}};
  }
  double ma = std::max(0.0, f.derivative(1, lo));
  double mb = std::max(0.0, f.derivative(1, hi));
  if (s == 0.0) {
    ma = mb = 0.0;
  } else {
    const double a = ma / s, b = mb / s;
    const double rr = a * a + b * b;
    if (rr > 9.0) {
      const double t = 3.0 / std::sqrt(rr);
      ma *= t;
      mb *= t;
    }
  }
  return {lo, {fa, ma, (3.0 * s - 2.0 * ma - mb) / h, (ma + mb - 2.0 * s) / (h * h)}};
}

}  // namespace

SplineFit monotone_spline_fit(const SmoothFunction& f, const ChebPartition& part) {
  require(f.r >= 1, "spline fit needs r >= 1");
  require(static_cast<int>(f.d.size()) == f.r + 1, "derivative list does not match r");
  const int n = part.n();
  require(n >= 4, "spline fit needs n >= 4");
  SplineFit out{Spline(part, f.r + 2, std::vector<LocalPolynomial>(n)), 0, 0, 0, 0, 0};

  const double x2 = part.knot(2), xm = part.knot(n - 2);
  double a_plus = 0.0, a_minus = 0.0;
  const LocalPolynomial right = hermite_end(f, 1.0, x2, &a_plus);
  const LocalPolynomial left = hermite_end(f, -1.0, xm, &a_minus);
  const double slope_scale = std::max(1.0, std::max(std::abs(f.derivative(1, 1.0)),
                                                    std::abs(f.derivative(1, -1.0))));
  if (min_derivative(right, x2, 1.0) < -1e-12 * slope_scale)
    throw NeedsLargerN("right end piece is not monotone at n = " + std::to_string(n), {n},
                       "right");
  if (min_derivative(left, -1.0, xm) < -1e-12 * slope_scale)
    throw NeedsLargerN("left end piece is not monotone at n = " + std::to_string(n), {n},
                       "left");

  std::vector<LocalPolynomial> pieces(n);
  pieces[0] = right.recentered(part.knot(1));
  pieces[1] = right.recentered(x2);
  pieces[n - 2] = left.recentered(part.knot(n - 1));
  pieces[n - 1] = left.recentered(-1.0);
  int limited = 0;
  for (int j = 3; j <= n - 2; ++j) {
    const double lo = part.knot(j), hi = part.knot(j - 1);
    LocalPolynomial p = equispaced_interpolant(f, lo, hi);
    const double scale = std::max(1.0, std::abs(f(hi) - f(lo)) / (hi - lo));
    if (min_derivative(p, lo, hi) < -1e-12 * scale) {
      p = limited_piece(f, p, lo, hi);
      ++limited;
    }
    pieces[j - 1] = p;
  }

  out.spline = Spline(part, f.r + 2, std::move(pieces));
  out.a_plus = a_plus;
  out.a_minus = a_minus;
  out.limited_pieces = limited;
  const double rf = factorial(f.r);
  const RealFn top = f.d[f.r];
  const double wp = 1.0 - x2, wm = xm + 1.0;
  out.a_plus_bound = modulus(top, 1, wp, {x2, 1.0}, 256) / (rf * wp);
  out.a_minus_bound = modulus(top, 1, wm, {-1.0, xm}, 256) / (rf * wm);
  return out;
}

SplineFit monotone_spline_fit_doubling(const SmoothFunction& f, int n, int cap,
                                       std::vector<int>* trace) {
  std::vector<int> tried;
  std::string detail;
  for (int m = n; m <= cap; m *= 2) {
    tried.push_back(m);
    if (trace) trace->push_back(m);
    try {
      return monotone_spline_fit(f, ChebPartition(m));
    } catch (const NeedsLargerN& e) {
      detail = e.detail();
    }
  }
  throw NeedsLargerN("no monotone end pieces up to n = " + std::to_string(cap), tried, detail);
}

Spline random_monotone_spline(const ChebPartition& part, int k, std::uint64_t seed) {
  require(k >= 2, "random splines need k >= 2");
  std::mt19937_64 rng(seed);
  std::lognormal_distribution<double> slope(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int n = part.n();
  std::vector<LocalPolynomial> pieces(n);
  double value = unit(rng) - 0.5;
  for (int j = n; j >= 1; --j) {
    const double h = part.length(j);
    const double s = slope(rng);
    const double rise = s * h;
    if (k == 2) {
      pieces[j - 1] = LocalPolynomial(part.knot(j), {value, s});
    } else {
      const double m = 2.0 * s * unit(rng);
      pieces[j - 1] = LocalPolynomial(part.knot(j), {value, m, (rise - m * h) / (h * h)});
    }
    value += rise;
  }
  return Spline(part, k, std::move(pieces));
}

}  // namespace monofit
