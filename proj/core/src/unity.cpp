#include "monofit/unity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "monofit/errors.hpp"
#include "monofit/parallel.hpp"

namespace monofit {

namespace {

/// upper - lower with missing operands read as 1 and 0.
class UnityMember final : public Polynomial {
 public:
  UnityMember(IndicatorPtr upper, IndicatorPtr lower)
      : upper_(std::move(upper)), lower_(std::move(lower)) {}

  double value(double x) const override {
    return (upper_ ? upper_->value(x) : 1.0) - (lower_ ? lower_->value(x) : 0.0);
  }
  double derivative(double x) const override {
    return (upper_ ? upper_->derivative(x) : 0.0) - (lower_ ? lower_->derivative(x) : 0.0);
  }
  int degree() const override {
    return std::max(upper_ ? upper_->degree() : 0, lower_ ? lower_->degree() : 0);
  }

 private:
  IndicatorPtr upper_, lower_;
};

bool negligible(const LocalPolynomial& diff, const LocalPolynomial& a, const LocalPolynomial& b) {
  double scale = 0.0;
  for (double c : a.coeffs()) scale = std::max(scale, std::abs(c));
  for (double c : b.coeffs()) scale = std::max(scale, std::abs(c));
  for (double c : diff.coeffs())
    if (std::abs(c) > 1e-14 * scale) return false;
  return true;
}

}  // namespace

UnityIndicatorOrders unity_indicator_orders(double alpha2, double beta2) {
  const double alpha1 = alpha2, beta1 = alpha2 + beta2;
  return {std::ceil(alpha1), 2.0 * beta1 + alpha1 + 1.0};
}

UnityBasis::UnityBasis(int n, int n1, double alpha2, double beta2, Profile profile)
    : coarse_(std::max(n, 1)), fine_(std::max(n1, 1)), alpha2_(alpha2), beta2_(beta2),
      profile_(profile) {
  if (n < 2 || n1 <= n || n1 % n != 0)
    fail(ErrorKind::invalid_argument, "n1 must be a multiple of n larger than n (n=" +
                                          std::to_string(n) + ", n1=" + std::to_string(n1) +
                                          ")");
  const int d = n1 / n;
  const UnityIndicatorOrders o = unity_indicator_orders(alpha2, beta2);
  taus_.resize(static_cast<std::size_t>(n - 1));
  parallel_for(taus_.size(), [&](std::size_t i) {
    taus_[i] = build_tau(fine_, d * (static_cast<int>(i) + 1), o.alpha, o.beta, profile);
  });
}

PolyPtr UnityBasis::member(int j) const {
  require(j >= 1 && j <= n(), "unity member index out of range");
  IndicatorPtr upper = j < n() ? taus_[j - 1] : nullptr;
  IndicatorPtr lower = j > 1 ? taus_[j - 2] : nullptr;
  return std::make_shared<UnityMember>(std::move(upper), std::move(lower));
}

double UnityBasis::member_value(int j, double x) const {
  const double up = j < n() ? taus_.at(j - 1)->value(x) : 1.0;
  const double lo = j > 1 ? taus_.at(j - 2)->value(x) : 0.0;
  return up - lo;
}

double UnityBasis::member_derivative(int j, double x) const {
  const double up = j < n() ? taus_.at(j - 1)->derivative(x) : 0.0;
  const double lo = j > 1 ? taus_.at(j - 2)->derivative(x) : 0.0;
  return up - lo;
}

double UnityBasis::sum(double x) const {
  double s = 0.0;
  for (int j = 1; j <= n(); ++j) s += member_value(j, x);
  return s;
}

Interval UnityBasis::domain(int j) const {
  if (j == 1) return {-1.0, coarse_.knot(1)};
  if (j == n()) return {coarse_.knot(n() - 1), 1.0};
  return {-1.0, 1.0};
}

UnityBasis build_unity(int n, int n1, double alpha2, double beta2, Profile profile) {
  return UnityBasis(n, n1, alpha2, beta2, profile);
}

// ---------------------------------------------------------------------------------------

SimultaneousApproximant::SimultaneousApproximant(const Spline& s,
                                                 std::shared_ptr<const UnityBasis> basis)
    : basis_(std::move(basis)), last_(s.piece(s.n())), k_(s.k()) {
  for (int j = 1; j < s.n(); ++j) {
    LocalPolynomial diff = s.piece(j) - s.piece(j + 1);
    if (!negligible(diff, s.piece(j), s.piece(j + 1))) terms_.push_back({j, std::move(diff)});
  }
}

double SimultaneousApproximant::value(double x) const {
  double v = last_.value(x);
  for (const Term& t : terms_) v += t.diff.value(x) * basis_->boundary(t.j).value(x);
  return v;
}

double SimultaneousApproximant::derivative(double x) const {
  double v = last_.derivative(x);
  for (const Term& t : terms_) {
    const IndicatorPoly& tau = basis_->boundary(t.j);
    v += t.diff.derivative(x) * tau.value(x) + t.diff.value(x) * tau.derivative(x);
  }
  return v;
}

int SimultaneousApproximant::degree() const {
  return terms_.empty() ? last_.degree() : k_ - 1 + basis_->degree();
}

std::shared_ptr<const SimultaneousApproximant> simultaneous_approximant(
    const Spline& s, std::shared_ptr<const UnityBasis> basis) {
  require(basis != nullptr, "unity basis is null");
  if (s.n() != basis->n())
    fail(ErrorKind::invalid_argument, "spline order " + std::to_string(s.n()) +
                                          " does not match unity basis order " +
                                          std::to_string(basis->n()));
  return std::make_shared<SimultaneousApproximant>(s, std::move(basis));
}

// ---------------------------------------------------------------------------------------
// Checks

namespace {

/// tau_{dj}(x) for j = 1..n-1 at every grid point, row-major by point.
std::vector<double> boundary_table(const UnityBasis& basis, const std::vector<double>& grid) {
  const std::size_t m = static_cast<std::size_t>(basis.n() - 1);
  std::vector<double> out(grid.size() * m);
  parallel_for(grid.size(), [&](std::size_t i) {
    for (std::size_t j = 0; j < m; ++j)
      out[i * m + j] = basis.boundary(static_cast<int>(j) + 1).value(grid[i]);
  });
  return out;
}

}  // namespace

double unity_sum_error(const UnityBasis& basis, const std::vector<double>& grid) {
  std::vector<double> err(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) { err[i] = std::abs(basis.sum(grid[i]) - 1.0); });
  return err.empty() ? 0.0 : *std::max_element(err.begin(), err.end());
}

UnityEndMonotonicity unity_end_monotonicity(const UnityBasis& basis,
                                            const std::vector<double>& grid) {
  UnityEndMonotonicity out{INFINITY, -INFINITY};
  for (double x : grid) {
    out.min_first = std::min(out.min_first, basis.member_derivative(1, x));
    out.max_last = std::max(out.max_last, basis.member_derivative(basis.n(), x));
  }
  return out;
}

UnityDecayExponents unity_decay_exponents(const UnityBasis& basis) {
  if (basis.profile() == Profile::theoretical)
    return {basis.alpha2(), basis.alpha2() + basis.beta2()};
  const IndicatorExponents e = indicator_exponents(basis.boundary(1), 0.0, 0.0, Profile::practical);
  return {e.delta, e.psi};
}

FittedConstantsReport verify_unity_decay(const UnityBasis& basis,
                                         const std::vector<double>& grid) {
  const int n = basis.n();
  const std::size_t m = static_cast<std::size_t>(n - 1);
  const std::vector<double> tab = boundary_table(basis, grid);
  const UnityDecayExponents e = unity_decay_exponents(basis);
  const ChebPartition& part = basis.coarse();
  const ChebPartition& fine = basis.fine();
  double worst = 0.0;
  int worst_j = 1;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = grid[i];
    const double d = part.delta(x), r1 = fine.rho(x);
    for (int j = 1; j <= n; ++j) {
      if (!basis.domain(j).contains(x)) continue;
      const double up = j < n ? tab[i * m + j - 1] : 1.0;
      const double lo = j > 1 ? tab[i * m + j - 2] : 0.0;
      const double v = std::abs(up - lo);
      const double bound =
          std::pow(d, e.delta) * std::pow(r1 / (r1 + part.dist(x, j)), e.decay);
      double ratio;
      if (bound > 0.0)
        ratio = v / bound;
      else
        ratio = v > 1e-12 ? INFINITY : 0.0;
      if (ratio > worst) {
        worst = ratio;
        worst_j = j;
      }
    }
  }
  FittedConstantsReport rep;
  FittedConstant r;
  r.lemma = "unity";
  r.bound = "member_decay";
  r.n = n;
  r.j_lo = r.j_hi = worst_j;
  r.fitted_constant = worst;
  r.note = "n1=" + std::to_string(basis.n1());
  rep.rows.push_back(r);
  return rep;
}

FittedConstantsReport verify_simultaneous(const Spline& s, const Polynomial& d,
                                          const UnityBasis& basis, const Majorant& phi,
                                          const std::vector<double>& grid,
                                          SimultaneousCheck options) {
  const ChebPartition& part = s.partition();
  const double bk = b_k_max(s, phi);
  const double bk_a = b_k_max(s, phi, options.a);
  const double ratio_n = static_cast<double>(basis.n()) / basis.n1();
  const auto& knots = part.knots();
  std::vector<double> value_ratio(grid.size(), 0.0), deriv_ratio(grid.size(), 0.0);
  parallel_for(grid.size(), [&](std::size_t i) {
    const double x = grid[i];
    if (std::abs(x) >= 1.0) return;
    const double rho = part.rho(x), dl = std::pow(part.delta(x), options.gamma);
    const double ve = std::abs(s(x) - d.value(x));
    const double vb = dl * phi(rho) * bk;
    value_ratio[i] = vb > 0.0 ? ve / vb : (ve > 1e-12 * s.scale() ? INFINITY : 0.0);

    if (!(options.a.lo < x && x < options.a.hi)) return;
    for (double k : knots)
      if (std::abs(x - k) < 1e-13) return;
    double dist_out = INFINITY;
    if (options.a.lo > -1.0) dist_out = std::min(dist_out, x - options.a.lo);
    if (options.a.hi < 1.0) dist_out = std::min(dist_out, options.a.hi - x);
    const double global =
        std::isfinite(dist_out) ? bk * ratio_n * std::pow(rho / dist_out, options.gamma + 1.0)
                                : 0.0;
    const double de = std::abs(s.derivative(x) - d.derivative(x));
    const double db = dl * phi(rho) / rho * (bk_a + global);
    deriv_ratio[i] = db > 0.0 ? de / db : (de > 1e-10 * s.scale() ? INFINITY : 0.0);
  });
  FittedConstantsReport rep;
  auto row = [&](const std::string& bound, const std::vector<double>& v) {
    FittedConstant r;
    r.lemma = "simultaneous";
    r.bound = bound;
    r.n = part.n();
    r.j_lo = 1;
    r.j_hi = part.n();
    r.fitted_constant = v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
    r.note = "n1=" + std::to_string(basis.n1());
    rep.rows.push_back(r);
  };
  row("value_error", value_ratio);
  row("derivative_error", deriv_ratio);
  return rep;
}

}  // namespace monofit
