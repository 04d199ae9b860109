#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "monofit/errors.hpp"
#include "monofit/splines.hpp"

using namespace monofit;

namespace {

SmoothFunction cubic() {
  return {"x3", 1, {[](double x) { return x * x * x; }, [](double x) { return 3 * x * x; }}};
}

SmoothFunction exp_fn() {
  return {"exp", 2,
          {[](double x) { return std::exp(x); }, [](double x) { return std::exp(x); },
           [](double x) { return std::exp(x); }}};
}

// Independent b_ij: grid of 64 nodes, hull from the raw knots.
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

}  // namespace

TEST(Spline, EvaluatesRightContinuously) {
  const ChebPartition part(4);
  std::vector<LocalPolynomial> pieces;
  for (int j = 1; j <= 4; ++j) pieces.emplace_back(part.knot(j), std::vector<double>{double(j)});
  const Spline s(part, 2, pieces);
  EXPECT_EQ(s(part.knot(1)), 1.0);
  EXPECT_EQ(s(1.0), 1.0);
  EXPECT_EQ(s(part.knot(2)), 2.0);
  EXPECT_EQ(s(-1.0), 4.0);
  EXPECT_NEAR(s.max_jump(), 1.0, 1e-15);
  EXPECT_FALSE(s.is_continuous());
  EXPECT_FALSE(s.is_monotone());
}

TEST(Spline, ArithmeticAndJson) {
  const Spline s = random_monotone_spline(ChebPartition(8), 3, 11);
  const Spline d = s + s.scaled(2.0) - s;
  for (double x : {-0.9, -0.2, 0.3, 0.95}) EXPECT_NEAR(d(x), 2.0 * s(x), 1e-13);
  const auto j = s.to_json();
  EXPECT_EQ(j.at("n"), 8);
  EXPECT_EQ(j.at("k"), 3);
  EXPECT_EQ(j.at("pieces").size(), 8u);
}

TEST(Spline, RandomSplinesAreContinuousAndMonotone) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Spline s = random_monotone_spline(ChebPartition(16), 3, seed);
    EXPECT_TRUE(s.is_continuous(1e-12));
    EXPECT_TRUE(s.is_monotone(1e-12));
    for (const auto& p : s.pieces()) EXPECT_LE(p.degree(), 2);
  }
  const Spline a = random_monotone_spline(ChebPartition(8), 3, 5);
  const Spline b = random_monotone_spline(ChebPartition(8), 3, 5);
  EXPECT_EQ(a.to_json(), b.to_json());
}

TEST(SupNorm, ExactFindsInteriorExtremum) {
  const LocalPolynomial p(0.0, {0.0, 1.0, 0.0, -1.0});  // x - x^3
  const double peak = 2.0 / (3.0 * std::sqrt(3.0));
  EXPECT_NEAR(sup_norm(p, 0.0, 1.0, SupMode::exact), peak, 1e-15);
  EXPECT_LE(sup_norm(p, 0.0, 1.0, SupMode::grid, 4), peak);
  EXPECT_NEAR(sup_norm(p, 0.0, 1.0, SupMode::grid, 2), 0.0, 1e-15);
}

TEST(Bij, GridModeMatchesOracleBitForBit) {
  const Majorant phi = Majorant::power(3, 1.0, 2);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const int n = 8 + 2 * static_cast<int>(seed % 5);
    const Spline s = random_monotone_spline(ChebPartition(n), 3, 1000 + seed);
    double mx = 0.0;
    for (int i = 1; i <= n; ++i)
      for (int j = 1; j <= n; ++j) {
        const double o = oracle_bij(s, phi, i, j);
        ASSERT_EQ(b_ij(s, phi, i, j, SupMode::grid), o) << seed << " " << i << " " << j;
        mx = std::max(mx, o);
      }
    EXPECT_EQ(b_k_max(s, phi, {-1.0, 1.0}, SupMode::grid), mx);
    EXPECT_GE(b_k_max(s, phi), mx);
  }
}

TEST(Bij, DegenerateMajorant) {
  const Spline s = random_monotone_spline(ChebPartition(8), 3, 3);
  EXPECT_EQ(b_ij(s, Majorant::zero(3), 2, 2), 0.0);
  try {
    b_ij(s, Majorant::zero(3), 1, 5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::degenerate_majorant);
  }
}

TEST(Bij, RestrictedToSubset) {
  const Spline s = random_monotone_spline(ChebPartition(12), 3, 9);
  const Majorant phi = Majorant::power(3, 1.0, 2);
  EXPECT_LE(b_k_max(s, phi, {0.0, 1.0}), b_k_max(s, phi));
  EXPECT_THROW(b_k_max(s, phi, {0.01, 0.02}), Error);
}

TEST(BkDerivative, RatioStable) {
  const Majorant phi = Majorant::power(3, 1.0, 2);
  const std::vector<double> grid = make_grid({});
  // One fitted constant per order: the worst ratio over the instances.
  std::vector<double> fitted;
  for (int n : {8, 16}) {
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto c = verify_bk_by_derivative(random_monotone_spline(ChebPartition(n), 3, seed), phi, grid);
      EXPECT_GT(c.derivative_norm, 0.0);
      worst = std::max(worst, c.ratio);
    }
    fitted.push_back(worst);
  }
  EXPECT_LE(spread(fitted), 8.0);
}

TEST(BkApproximation, HypothesesReported) {
  const SplineFit fit = monotone_spline_fit(exp_fn(), ChebPartition(16));
  const std::vector<double> grid = make_grid({});
  const auto bad = verify_bk_by_approximation(exp_fn().d[0], fit.spline, Majorant::power(4, 1e-12, 4), grid);
  EXPECT_EQ(bad.rows.at(0).note, "hypotheses-fail");
  const auto good = verify_bk_by_approximation(exp_fn().d[0], fit.spline, Majorant::power(4, 10.0, 4), grid);
  EXPECT_EQ(good.rows.at(0).note, "");
  EXPECT_TRUE(std::isfinite(good.rows.at(0).fitted_constant));
}

TEST(SplineFit, InterpolatesAtKnotsAndIsMonotone) {
  for (const SmoothFunction& f : {cubic(), exp_fn()}) {
    for (int n : {8, 16, 32}) {
      const ChebPartition part(n);
      const SplineFit fit = monotone_spline_fit(f, part);
      EXPECT_EQ(fit.spline.k(), f.r + 2);
      EXPECT_TRUE(fit.spline.is_continuous(1e-11)) << f.id << n;
      EXPECT_TRUE(fit.spline.is_monotone(1e-11)) << f.id << n;
      // The end pieces span two intervals, so x_1 and x_{n-1} are not nodes.
      for (int j = 0; j <= n; ++j)
        if (j != 1 && j != n - 1) EXPECT_NEAR(fit.spline(part.knot(j)), f(part.knot(j)), 1e-12);
    }
  }
}

TEST(SplineFit, ErrorShrinksWithN) {
  double prev = INFINITY;
  for (int n : {8, 16, 32}) {
    const SplineFit fit = monotone_spline_fit(exp_fn(), ChebPartition(n));
    double err = 0.0;
    for (int i = 0; i <= 2000; ++i) {
      const double x = -1.0 + i / 1000.0;
      err = std::max(err, std::abs(fit.spline(x) - std::exp(x)));
    }
    EXPECT_LT(err, prev / 4.0);
    prev = err;
  }
}

TEST(SplineFit, DoublingRecordsTrace) {
  std::vector<int> trace;
  const SplineFit fit = monotone_spline_fit_doubling(cubic(), 8, 64, &trace);
  ASSERT_FALSE(trace.empty());
  EXPECT_EQ(trace.front(), 8);
  EXPECT_EQ(trace.back(), fit.spline.n());
}

TEST(EndpointFloors, FirstNonzeroDerivative) {
  const EndpointFloors fl = endpoint_floors(cubic());
  EXPECT_EQ(fl.i_plus, 1);
  EXPECT_EQ(fl.i_minus, 1);
  EXPECT_GT(fl.d_plus, 0.0);
  const SmoothFunction flat{"flat", 1, {[](double) { return 0.0; }, [](double) { return 0.0; }}};
  const EndpointFloors z = endpoint_floors(flat);
  EXPECT_EQ(z.i_plus, 0);
  EXPECT_EQ(z.i_minus, 0);
}

TEST(MinDerivative, CubicExact) {
  const LocalPolynomial p(0.0, {0.0, 0.0, 0.0, 1.0});
  EXPECT_NEAR(min_derivative(p, -1.0, 1.0), 0.0, 1e-15);
  const LocalPolynomial q(0.0, {0.0, 1.0, -1.0});
  EXPECT_NEAR(min_derivative(q, 0.0, 1.0), -1.0, 1e-15);
}
