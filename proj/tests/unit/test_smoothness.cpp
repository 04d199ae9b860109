#include <gtest/gtest.h>

#include <cmath>

#include "monofit/errors.hpp"
#include "monofit/smoothness.hpp"

using namespace monofit;

namespace {

/// Independent grid sup of |Delta^k_u f(x)| over u in (0, t] and admissible x.
double brute_modulus(const RealFn& f, int k, double t, int steps, int centers) {
  double best = 0.0;
  for (int i = 1; i <= steps; ++i) {
    const double u = t * i / steps;
    for (int c = 0; c <= centers; ++c) {
      const double x = -1.0 + 2.0 * c / centers;
      if (x - k * u / 2.0 < -1.0 || x + k * u / 2.0 > 1.0) continue;
      double sum = 0.0;
      for (int m = 0; m <= k; ++m) {
        const double binom = std::tgamma(k + 1.0) / (std::tgamma(m + 1.0) * std::tgamma(k - m + 1.0));
        sum += ((k - m) % 2 ? -1.0 : 1.0) * binom * f(x + (m - k / 2.0) * u);
      }
      best = std::max(best, std::abs(sum));
    }
  }
  return best;
}

}  // namespace

TEST(FiniteDifference, ClosedForms) {
  const RealFn sq = [](double x) { return x * x; };
  EXPECT_NEAR(finite_difference(sq, 0.0, 0.2, 2), 0.08, 1e-15);
  const RealFn lin = [](double x) { return 3.0 * x - 1.0; };
  for (double x : {-0.5, 0.0, 0.3}) EXPECT_NEAR(finite_difference(lin, x, 0.1, 2), 0.0, 1e-15);
  EXPECT_EQ(finite_difference(sq, 0.95, 0.2, 2), 0.0);
}

TEST(Modulus, ClosedForms) {
  EXPECT_NEAR(modulus([](double x) { return x; }, 2, 0.5), 0.0, 1e-15);
  EXPECT_NEAR(modulus([](double x) { return x * x; }, 2, 0.1), 0.02, 1e-15);
  // At x = 0 with step 0.5 the second difference of |x| is |0.5| - 0 + |-0.5| = 1.
  const RealFn abs_fn = [](double x) { return std::abs(x); };
  EXPECT_NEAR(modulus(abs_fn, 2, 0.5), 1.0, 1e-15);
  EXPECT_NEAR(brute_modulus(abs_fn, 2, 0.5, 64, 512), 1.0, 1e-15);
}

TEST(Modulus, DerivativeOfCubeMatchesSixTSquared) {
  const RealFn d = [](double x) { return 3.0 * x * x; };
  for (double t : {0.01, 0.1, 0.5}) {
    const double w = modulus(d, 2, t, {-1.0, 1.0}, 512);
    EXPECT_LE(w, 6.0 * t * t * (1.0 + 1e-9));
    EXPECT_GE(w, 0.98 * 6.0 * t * t) << "t=" << t;
  }
}

TEST(Modulus, NondecreasingUnderGridRefinement) {
  const RealFn f = [](double x) { return std::abs(x) * x * x + std::sin(3.0 * x); };
  for (double t : {0.05, 0.3, 1.1}) {
    double previous = 0.0;
    for (int density : {64, 128, 256, 512}) {
      const double w = modulus(f, 2, t, {-1.0, 1.0}, density);
      EXPECT_GE(w, previous);
      previous = w;
    }
  }
}

TEST(Modulus, TableAgreesWithPointEvaluations) {
  const RealFn f = [](double x) { return x * std::abs(x); };
  const auto ts = log_grid(1e-3, 1.0, 12);
  const ModulusTable table = modulus_table(f, 2, ts);
  ASSERT_EQ(table.t.size(), ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i)
    EXPECT_NEAR(table.omega[i], modulus(f, 2, ts[i]), 1e-14);
  EXPECT_EQ(table.to_csv().rfind("t,omega_2\n", 0), 0u);
}

TEST(Majorant, PowerLawIsAMajorant) {
  for (int k : {1, 2, 3}) EXPECT_TRUE(check_majorant(Majorant::power(k, 2.0, k)).ok());
  // t^{k+1} is not of order k.
  EXPECT_THROW(Majorant::power(2, 1.0, 3), Error);
  const Majorant steep(2, [](double t) { return t * t * t; });
  EXPECT_FALSE(check_majorant(steep).ok());
}

TEST(Majorant, StarRegularization) {
  const int m = 3;
  const RealFn pow3 = [](double t) { return t * t * t; };
  const Majorant star = star_majorant(pow3, m);
  for (double t : log_grid(1e-3, 2.0, 30)) EXPECT_NEAR(star(t), pow3(t), 1e-12 * pow3(t));

  const RealFn capped = [](double t) { return std::min(t, 1.0) * t * t; };
  const Majorant capped_star = star_majorant(capped, m);
  for (double t : log_grid(1e-3, 2.0, 30)) {
    EXPECT_GE(capped_star(t), capped(t) * (1.0 - 1e-12));
    EXPECT_LE(capped_star(t), 4.0 * capped(t));
  }
  EXPECT_TRUE(check_majorant(capped_star).ok());

  const Majorant zero = star_majorant([](double) { return 0.0; }, 2);
  EXPECT_EQ(zero(0.5), 0.0);
}

TEST(Majorant, Composition) {
  const Majorant psi = Majorant::power(1, 1.0, 1);
  const Majorant phi = compose_phi(1, psi);
  EXPECT_EQ(phi.order(), 2);
  for (double t : {0.1, 0.5, 1.5}) EXPECT_NEAR(phi(t), t * t, 1e-15);
  const Majorant same = compose_phi(0, psi);
  EXPECT_EQ(same.order(), psi.order());
  EXPECT_NEAR(same(0.3), 0.3, 1e-15);

  // omega_2(f'', .) of x^4 is 24 t^2; composing with t^2 keeps the majorant checks.
  const auto ts = log_grid(1e-4, 2.0, 40);
  const ModulusTable table = modulus_table([](double x) { return 12.0 * x * x; }, 2, ts);
  const Majorant tab = star_majorant([table](double t) { return table(t); }, 2);
  const Majorant phi4 = compose_phi(2, tab);
  EXPECT_EQ(phi4.order(), 4);
  EXPECT_TRUE(check_majorant(phi4, 1e-9).ok());
}

TEST(SmoothFunction, Checks) {
  SmoothFunction good{"cube", 1, {[](double x) { return x * x * x; }, [](double x) { return 3.0 * x * x; }}, true};
  EXPECT_TRUE(check_smooth_function(good).ok());

  SmoothFunction decreasing{"neg", 1, {[](double x) { return -x; }, [](double) { return -1.0; }}, true};
  EXPECT_FALSE(check_smooth_function(decreasing).monotone_ok);

  SmoothFunction wrong{"wrong", 1, {[](double x) { return x * x * x; }, [](double x) { return x; }}, true};
  EXPECT_FALSE(check_smooth_function(wrong).derivatives_ok);
}
