// Acceptance run: one PASS/FAIL line per criterion, exit status 1 when any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "monofit/errors.hpp"
#include "monofit/harness.hpp"
#include "monofit/monotone.hpp"
#include "monofit/unity.hpp"

using namespace monofit;

namespace {

using Clock = std::chrono::steady_clock;

int failures = 0;

void report(int id, bool ok, const std::string& title, const std::string& detail) {
  std::printf("%s %2d %s: %s\n", ok ? "PASS" : "FAIL", id, title.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

double ratio_spread(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) return INFINITY;
  return std::max(a, b) / std::min(a, b);
}

const Majorant kCube = Majorant::power(3, 1.0, 3);

// Runs `body`, turning a library error into a failed criterion.
void guarded(std::vector<std::pair<int, std::string>> ids, const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    for (const auto& [id, title] : ids) report(id, false, title, std::string("error: ") + e.what());
  }
}

// Approximations of the corpus at n in {24, 48}, shared by criteria 2-4 and 9.
std::map<std::pair<std::string, int>, Approximation> corpus_runs;

void exactness() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  std::string where;
  for (const char* id : {"x", "x2"}) {
    const SmoothFunction f = corpus_function(id, 1);
    for (int n : {12, 24, 48, 96}) {
      const Approximation a = approximate(f, 1, n);
      double err = 0.0;
      for (int i = 0; i <= 4000; ++i) {
        const double x = -1.0 + i / 2000.0;
        err = std::max(err, std::abs(f(x) - a.p->value(x)));
      }
      if (err >= worst) {
        worst = err;
        where = std::string(id) + " n=" + std::to_string(a.report.n_realized);
      }
    }
  }
  const double t = seconds_since(t0);
  report(1, worst <= 1e-9 && t < 10.0, "exactness for x and x^2+2x",
         "worst sup error " + fmt(worst) + " (" + where + "), " + fmt(t) + " s");
}

void monotone_corpus() {
  const auto t0 = Clock::now();
  int bad = 0, total = 0;
  double worst_end = 0.0, worst_min = INFINITY;
  std::string first_bad;
  for (const CorpusEntry& e : default_corpus()) {
    const SmoothFunction f = corpus_function(e.id, e.r);
    const double range = std::abs(f(1.0) - f(-1.0));
    for (int n : {24, 48}) {
      ++total;
      try {
        Approximation a = approximate(f, e.r, n);
        const MonotoneReport m = check_monotone(*a.p, 1e-9);
        const double end = std::max(std::abs(a.p->value(1.0) - f(1.0)),
                                    std::abs(a.p->value(-1.0) - f(-1.0))) /
                           range;
        worst_end = std::max(worst_end, end);
        worst_min = std::min(worst_min, m.min_derivative);
        if (!m.pass || end > 1e-9) {
          ++bad;
          if (first_bad.empty()) first_bad = e.id + " n=" + std::to_string(n);
        }
        corpus_runs.emplace(std::pair{e.id, n}, std::move(a));
      } catch (const Error& err) {
        ++bad;
        if (first_bad.empty()) first_bad = e.id + " n=" + std::to_string(n) + " " + err.what();
      }
    }
  }
  const double t = seconds_since(t0);
  std::string detail = std::to_string(total - bad) + "/" + std::to_string(total) +
                       " monotone and interpolating, worst relative end error " +
                       fmt(worst_end) + ", least P' " + fmt(worst_min) + ", " + fmt(t) + " s";
  if (!first_bad.empty()) detail += ", first failure " + first_bad;
  report(2, bad == 0 && t < 600.0, "corpus monotone with end interpolation", detail);
}

// Criteria 3 and 4 with the closed-form omega_2(3x^2, t) = 6t^2.
void cubic_ratios() {
  const SmoothFunction f = corpus_function("x3", 1);
  const RealFn omega = [](double t) { return 6.0 * t * t; };
  std::vector<PointwiseRatios> r;
  std::vector<int> ns;
  for (int n : {24, 48}) {
    auto it = corpus_runs.find({"x3", n});
    const Approximation a = it != corpus_runs.end() ? it->second : approximate(f, 1, n);
    ns.push_back(a.report.n_realized);
    r.push_back(pointwise_ratios(f, *a.p, a.report.n_realized, omega, 4000));
  }
  const std::string at = " at n=" + std::to_string(ns[0]) + "," + std::to_string(ns[1]);
  const double sp = ratio_spread(r[0].pointwise, r[1].pointwise);
  report(3, sp <= 4.0, "pointwise ratio for x^3 stable",
         "ratios " + fmt(r[0].pointwise) + ", " + fmt(r[1].pointwise) + at + ", spread " + fmt(sp));
  const double se = ratio_spread(r[0].endpoint, r[1].endpoint);
  report(4, se <= 4.0, "endpoint-zone ratio for x^3 stable",
         "ratios " + fmt(r[0].endpoint) + ", " + fmt(r[1].endpoint) + at + ", spread " + fmt(se));
}

void unity() {
  const std::vector<double> grid = make_grid({2000, 0, true});
  double worst = 0.0;
  for (auto [n, n1] : {std::pair{8, 32}, std::pair{16, 64}}) {
    const UnityBasis b(n, n1, 4.0, 9.0, Profile::practical);
    worst = std::max(worst, unity_sum_error(b, grid));
  }
  report(5, worst <= 1e-8, "partition of unity sums to one",
         "max |sum - 1| " + fmt(worst) + " over 2000 points");
}

void bk_derivative() {
  const std::vector<double> grid = make_grid({});
  std::vector<double> fitted;
  for (int n : {8, 16}) {
    const ChebPartition part(n);
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 50; ++seed)
      worst = std::max(worst, verify_bk_by_derivative(random_monotone_spline(part, 3, 100 + seed),
                                                      kCube, grid)
                                  .ratio);
    fitted.push_back(worst);
  }
  const double sp = ratio_spread(fitted[0], fitted[1]);
  report(6, sp <= 8.0, "b_k bounded by the scaled derivative",
         "fitted c " + fmt(fitted[0]) + " (n=8), " + fmt(fitted[1]) + " (n=16) over 100 splines, spread " +
             fmt(sp));
}

void small_derivative() {
  const std::vector<double> grid = make_grid({});
  const double alpha = 2.0;
  std::vector<double> fitted;
  int not_monotone = 0;
  for (int n : {8, 16}) {
    const ChebPartition part(n);
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const Spline s = random_small_derivative_spline(part, 3, kCube, 300 + seed);
      const auto p = small_derivative_poly(s, kCube, alpha, Profile::practical, true);
      if (!check_monotone(*p, 1e-9).pass) ++not_monotone;
      const double tiny = 1e-12 * std::max(1.0, s.scale());
      for (double x : grid) {
        const double bound = std::pow(part.delta(x), alpha) * kCube(part.rho(x));
        const double err = std::abs(s(x) - p->value(x));
        if (bound == 0.0) {
          if (err > tiny) worst = INFINITY;
          continue;
        }
        worst = std::max(worst, err / bound);
      }
    }
    fitted.push_back(worst);
  }
  const double sp = ratio_spread(fitted[0], fitted[1]);
  report(7, not_monotone == 0 && sp <= 8.0, "small-derivative polynomial",
         std::to_string(20 - not_monotone) + "/20 monotone, ratios " + fmt(fitted[0]) + ", " +
             fmt(fitted[1]) + ", spread " + fmt(sp));
}

void correction() {
  struct Case {
    int n;
    KnotRange e;
    std::vector<int> j;
  };
  const std::vector<Case> cases{{24, {7, 18}, {12, 13}},
                                {24, {3, 14}, {8}},
                                {48, {13, 36}, {24, 25}},
                                {48, {5, 16}, {10, 11, 12}},
                                {48, {20, 43}, {30, 31, 32, 33}}};
  const std::vector<double> grid = make_grid({});
  int bad = 0;
  double min_lambda = INFINITY, worst_end = 0.0, min_floor = INFINITY, worst_dip = 0.0;
  for (const Case& c : cases) {
    const ChebPartition part(c.n);
    const Correction q =
        correction_poly_auto(part, c.e, c.j, kCube, 4.0, 9.0, Profile::practical);
    const FittedConstantsReport rep = verify_correction(part, q, kCube, 4.0, 9.0, 3, grid);
    const double end = std::max(std::abs(q.q->value(1.0)), std::abs(q.q->value(-1.0)));
    const double floor = rep.find("derivative_floor")->fitted_constant;
    const double dip = rep.find("dip_bound")->fitted_constant;
    min_lambda = std::min(min_lambda, q.lambda);
    worst_end = std::max(worst_end, end);
    min_floor = std::min(min_floor, floor);
    worst_dip = std::max(worst_dip, dip);
    if (!(q.lambda > 0.0) || end > 1e-10 || !(floor > 0.0) || dip > 1.0 + 1e-6) ++bad;
  }
  report(8, bad == 0, "correcting polynomial structure",
         std::to_string(cases.size()) + " cases, least lambda " + fmt(min_lambda) + ", |Q(+-1)| <= " +
             fmt(worst_end) + ", least floor " + fmt(min_floor) + ", worst dip ratio " + fmt(worst_dip));
}

void decomposition() {
  const std::vector<double> grid = make_grid({});
  int instances = 0, bad = 0;
  double worst = 0.0;
  auto check = [&](const Spline& s, const Decomposition& d) {
    ++instances;
    double err = 0.0;
    for (double x : grid) err = std::max(err, std::abs(d.s3(x) + d.s4(x) - s(x)));
    worst = std::max(worst, err);
    if (err > 1e-11 || !d.s3.is_monotone(1e-11) || !d.s4.is_monotone(1e-11)) ++bad;
  };
  for (int n : {24, 48}) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const Spline s = random_monotone_spline(ChebPartition(n), 3, 500 + seed);
      const Majorant phi = kCube.scaled(b_k_max(s, kCube));
      CalibrationConstants c = default_constants(3, 4.0, Profile::practical);
      c.c3 = 4;
      c.c4 = 1;
      c.c2 = std::max(estimate_c2(s, phi, c), 1e-2);
      check(s, decompose(s, classify(s, phi, c)));
    }
  }
  // Splits the pipeline itself made on the corpus.
  for (const auto& [key, a] : corpus_runs)
    if (a.report.projection.parts) check(a.spline, *a.report.projection.parts);
  report(9, bad == 0 && instances > 0, "decomposition identity",
         std::to_string(instances - bad) + "/" + std::to_string(instances) +
             " instances, worst |S3 + S4 - S| " + fmt(worst));
}

// Brute-force b_ij: the 64-node grid of SupMode::grid, hull from the raw knots.
double oracle_bij(const Spline& s, const Majorant& phi, int i, int j) {
  if (i == j) return 0.0;
  const ChebPartition& part = s.partition();
  const double a = part.knot(i), b = part.knot(i - 1);
  const LocalPolynomial diff = s.piece(i) - s.piece(j);
  double num = 0.0;
  for (int q = 0; q < 64; ++q) {
    const double x = q == 63 ? b : a + (b - a) * q / 63;
    num = std::max(num, std::abs(diff.value(x)));
  }
  const double hj = part.knot(j - 1) - part.knot(j);
  const double hull = std::max(part.knot(i - 1), part.knot(j - 1)) - std::min(a, part.knot(j));
  return num / phi(hj) * std::pow(hj / hull, s.k());
}

void oracles() {
  int mismatches = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const int n = 8 + 4 * static_cast<int>(seed % 4);
    const Spline s = random_monotone_spline(ChebPartition(n), 3, 700 + seed);
    double mx = 0.0;
    for (int i = 1; i <= n; ++i)
      for (int j = 1; j <= n; ++j) {
        const double o = oracle_bij(s, kCube, i, j);
        if (b_ij(s, kCube, i, j, SupMode::grid) != o) ++mismatches;
        mx = std::max(mx, o);
      }
    if (b_k_max(s, kCube, {-1.0, 1.0}, SupMode::grid) != mx) ++mismatches;
  }

  const RealFn sq = [](double x) { return x * x; };
  const RealFn dcube = [](double x) { return 3.0 * x * x; };
  bool refinement = true;
  double worst_rel = 0.0;
  for (double t : {0.01, 0.05, 0.1, 0.3, 0.5}) {
    for (const auto& [f, c] : {std::pair{sq, 2.0}, std::pair{dcube, 6.0}}) {
      double prev = 0.0;
      for (int density : {64, 128, 256, 512}) {
        const double w = modulus(f, 2, t, {-1.0, 1.0}, density);
        if (w < prev * (1.0 - 1e-12)) refinement = false;
        prev = w;
      }
      worst_rel = std::max(worst_rel, std::abs(prev - c * t * t) / (c * t * t));
    }
  }
  report(10, mismatches == 0 && refinement && worst_rel <= 0.02, "oracle equivalence",
         std::to_string(mismatches) + " b_ij mismatches over 50 splines, refinement " +
             (refinement ? "monotone" : "not monotone") + ", worst closed-form deviation " +
             fmt(worst_rel));
}

void partition_suite() {
  const auto t0 = Clock::now();
  std::vector<InequalityReport> reports;
  int explicit_fail = 0;
  std::string first;
  for (int n : {4, 8, 16, 32, 64}) {
    reports.push_back(verify_partition_inequalities(ChebPartition(n)));
    for (const InequalityRow& r : reports.back().rows)
      if (r.explicit_constant && !r.pass) {
        ++explicit_fail;
        if (first.empty()) first = r.inequality + " n=" + std::to_string(n);
      }
  }
  int unstable = 0;
  for (const StabilityRow& r : unnamed_constants_stable(reports, 8.0))
    if (!r.stable) {
      ++unstable;
      if (first.empty()) first = r.inequality + " spread " + fmt(r.spread);
    }
  const double t = seconds_since(t0);
  std::string detail = std::to_string(explicit_fail) + " explicit failures, " +
                       std::to_string(unstable) + " unstable unnamed constants, " + fmt(t) + " s";
  if (!first.empty()) detail += ", first " + first;
  report(11, explicit_fail == 0 && unstable == 0 && t < 60.0, "partition inequality suite",
         detail);
}

}  // namespace

int main() {
  guarded({{1, "exactness for x and x^2+2x"}}, exactness);
  guarded({{2, "corpus monotone with end interpolation"}}, monotone_corpus);
  guarded({{3, "pointwise ratio for x^3 stable"}, {4, "endpoint-zone ratio for x^3 stable"}}, cubic_ratios);
  guarded({{5, "partition of unity sums to one"}}, unity);
  guarded({{6, "b_k bounded by the scaled derivative"}}, bk_derivative);
  guarded({{7, "small-derivative polynomial"}}, small_derivative);
  guarded({{8, "correcting polynomial structure"}}, correction);
  guarded({{9, "decomposition identity"}}, decomposition);
  guarded({{10, "oracle equivalence"}}, oracles);
  guarded({{11, "partition inequality suite"}}, partition_suite);
  std::printf("%s: %d criteria failed\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
  return failures == 0 ? 0 : 1;
}
