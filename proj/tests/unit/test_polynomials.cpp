#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "monofit/errors.hpp"
#include "monofit/lazy_poly.hpp"
#include "monofit/polynomials.hpp"

using namespace monofit;

namespace {

std::vector<double> random_coeffs(int degree, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> c(static_cast<std::size_t>(degree) + 1);
  for (auto& v : c) v = u(rng);
  return c;
}

/// sum c_k cos(k acos x), the trigonometric definition of the Chebyshev sum.
double trig_oracle(const std::vector<double>& c, double x) {
  const double theta = std::acos(x);
  double sum = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) sum += c[k] * std::cos(static_cast<double>(k) * theta);
  return sum;
}

/// (1 - y^2)^3 with a closed-form antiderivative.
class CubeBump final : public Kernel {
 public:
  double at_angle(double theta) const override { return std::pow(std::sin(theta), 6); }
  int degree() const override { return 6; }
};

double cube_bump_integral(double x) {
  auto prim = [](double y) {
    return y - std::pow(y, 3) + 3.0 * std::pow(y, 5) / 5.0 - std::pow(y, 7) / 7.0;
  };
  return prim(x) - prim(-1.0);
}

/// ((1 + y)/2)^200: almost all mass sits near y = 1.
class SteepPower final : public Kernel {
 public:
  double at_angle(double theta) const override { return std::pow(std::cos(theta / 2.0), 400); }
  int degree() const override { return 200; }
};

}  // namespace

TEST(ChebSeries, BasicValues) {
  EXPECT_DOUBLE_EQ(ChebSeries({0.0, 1.0}).value(0.3), 0.3);
  EXPECT_DOUBLE_EQ(ChebSeries({0.0, 0.0, 1.0}).value(0.5), -0.5);
  const auto c = random_coeffs(30, 1);
  const ChebSeries s(c);
  double sum = 0.0, alt = 0.0, abs_sum = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    sum += c[k];
    alt += (k % 2 ? -1.0 : 1.0) * c[k];
    abs_sum += std::abs(c[k]);
  }
  EXPECT_NEAR(s.value(1.0), sum, 1e-12 * abs_sum);
  EXPECT_NEAR(s.value(-1.0), alt, 1e-12 * abs_sum);
}

TEST(ChebSeries, MatchesTrigonometricOracle) {
  const auto c = random_coeffs(50, 2);
  const ChebSeries s(c);
  for (int i = 0; i < 100; ++i) {
    const double x = -1.0 + 2.0 * (i + 0.5) / 100.0;
    EXPECT_NEAR(s.value(x), trig_oracle(c, x), 1e-10);
  }
}

TEST(ChebSeries, Arithmetic) {
  const ChebSeries t1({0.0, 1.0});
  const ChebSeries sq = t1 * t1;
  ASSERT_GE(sq.coeffs().size(), 3u);
  EXPECT_NEAR(sq.coeffs()[0], 0.5, 1e-15);
  EXPECT_NEAR(sq.coeffs()[1], 0.0, 1e-15);
  EXPECT_NEAR(sq.coeffs()[2], 0.5, 1e-15);

  const ChebSeries d = ChebSeries({0.0, 0.0, 1.0}).differentiate();
  for (int i = 0; i < 10; ++i) {
    const double x = -0.9 + 0.2 * i;
    EXPECT_NEAR(d.value(x), 4.0 * x, 1e-13);
  }

  const ChebSeries s(random_coeffs(64, 3));
  const ChebSeries back = s.antidifferentiate().differentiate();
  for (int i = 0; i <= 20; ++i) {
    const double x = -1.0 + 0.1 * i;
    EXPECT_NEAR(back.value(x), s.value(x), 1e-12);
  }
  EXPECT_NEAR(s.antidifferentiate().value(-1.0), 0.0, 1e-14);

  const std::vector<double> cube{0.0, 0.0, 0.0, 1.0};
  const ChebSeries c3 = ChebSeries::from_monomial(cube);
  EXPECT_NEAR(c3.coeffs()[1], 0.75, 1e-15);
  EXPECT_NEAR(c3.coeffs()[3], 0.25, 1e-15);
}

TEST(ChebSeries, CapacityError) {
  try {
    ChebSeries(std::vector<double>(12, 1.0), 10);
    FAIL() << "expected a capacity error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::capacity);
  }
}

TEST(Gauss, Integrals) {
  const RealFn one = [](double) { return 1.0; };
  EXPECT_NEAR(gauss_integrate(one, -1.0, 1.0, 0), 2.0, 1e-15);
  EXPECT_NEAR(gauss_integrate([](double y) { return 2.0 * y * y - 1.0; }, -1.0, 1.0, 2), -2.0 / 3.0, 1e-15);
  EXPECT_NEAR(gauss_integrate([](double y) { return std::pow(1.0 - y * y, 3); }, -1.0, 1.0, 6),
              32.0 / 35.0, 1e-15);
  // Above the node cap the rule goes composite.
  EXPECT_NEAR(gauss_integrate([](double y) { return std::pow(y, 1500); }, -1.0, 1.0, 1500),
              2.0 / 1501.0, 1e-13);
}

TEST(CheckMonotone, SimpleCases) {
  const LocalPolynomial x(0.0, {0.0, 1.0});
  const MonotoneReport up = check_monotone(x);
  EXPECT_TRUE(up.pass);
  EXPECT_DOUBLE_EQ(up.min_derivative, 1.0);
  EXPECT_EQ(up.points, 2000u);

  const LocalPolynomial sq(0.0, {0.0, 0.0, 1.0});
  const MonotoneReport down = check_monotone(sq);
  EXPECT_FALSE(down.pass);
  EXPECT_LT(down.argmin, -0.99);
  EXPECT_NEAR(down.min_derivative, -2.0, 1e-12);

  EXPECT_EQ(monotone_grid(1000).size(), 4000u);
}

TEST(KernelPoly, IntegratesKernelExactly) {
  const auto kernel = std::make_shared<CubeBump>();
  const KernelPoly p(kernel, 3, 0.25, 2.0);
  EXPECT_EQ(p.degree(), 7);
  EXPECT_NEAR(p.total(), 32.0 / 35.0, 1e-14);
  for (int i = 0; i <= 40; ++i) {
    const double x = -1.0 + 0.05 * i;
    EXPECT_NEAR(p.cumulative(x), cube_bump_integral(x), 1e-14);
    EXPECT_NEAR(p.value(x), 0.25 + 2.0 * cube_bump_integral(x), 1e-13);
    EXPECT_NEAR(p.derivative(x), 2.0 * std::pow(1.0 - x * x, 3), 1e-13);
  }
  EXPECT_TRUE(check_monotone(p).pass);
}

TEST(KernelPoly, NegligibleSubpanelsStayBelowTotalTolerance) {
  const KernelPoly p(std::make_shared<SteepPower>(), 64);
  // integral_{-1}^{x} ((1+y)/2)^200 dy = 2 ((1+x)/2)^201 / 201.
  const double total = 2.0 / 201.0;
  EXPECT_NEAR(p.total(), total, 1e-14 * total);
  for (double x : {-0.5, 0.0, 0.5, 0.9, 0.99, 1.0}) {
    const double exact = 2.0 * std::pow((1.0 + x) / 2.0, 201) / 201.0;
    // Subpanels under 1e-17 of the mass are only accurate relative to the total.
    EXPECT_NEAR(p.cumulative(x), exact, 1e-14 * total) << "x=" << x;
    if (exact > 1e-6 * total) EXPECT_NEAR(p.cumulative(x), exact, 1e-10 * exact) << "x=" << x;
  }
}

TEST(ChebyshevInterpolant, RecoversPolynomials) {
  const LocalPolynomial cube(0.0, {0.0, 0.0, 0.0, 1.0});
  const ChebSeries c = chebyshev_interpolant(cube, 3);
  EXPECT_NEAR(c.coeffs()[0], 0.0, 1e-15);
  EXPECT_NEAR(c.coeffs()[1], 0.75, 1e-15);
  EXPECT_NEAR(c.coeffs()[2], 0.0, 1e-15);
  EXPECT_NEAR(c.coeffs()[3], 0.25, 1e-15);

  const ChebSeries s(random_coeffs(120, 4));
  const ChebSeries back = chebyshev_interpolant(s, 120);
  for (std::size_t k = 0; k < s.coeffs().size(); ++k) EXPECT_NEAR(back.coeffs()[k], s.coeffs()[k], 1e-13);
}

TEST(LocalPolynomial, RecenterAndCombine) {
  const LocalPolynomial p(0.3, {1.0, -2.0, 0.5, 4.0});
  const LocalPolynomial q = p.recentered(-0.7);
  for (double x : {-1.0, -0.2, 0.4, 1.0}) {
    EXPECT_NEAR(q.value(x), p.value(x), 1e-13);
    EXPECT_NEAR(q.derivative(x), p.derivative(x), 1e-13);
  }
  const LocalPolynomial r(0.0, {0.5, 1.0});
  const LocalPolynomial diff = p - r;
  const LocalPolynomial anti = p.antidifferentiate(2.0);
  EXPECT_NEAR(anti.value(0.3), 2.0, 1e-15);
  for (double x : {-0.9, 0.1, 0.8}) {
    EXPECT_NEAR(diff.value(x), p.value(x) - r.value(x), 1e-13);
    EXPECT_NEAR(anti.derivative(x), p.value(x), 1e-13);
  }

  auto sum = std::make_shared<PolySum>(1.0);
  sum->add(2.0, std::make_shared<LocalPolynomial>(p));
  sum->add(-1.0, std::make_shared<LocalPolynomial>(r));
  const PolyProduct prod(std::make_shared<LocalPolynomial>(p), std::make_shared<LocalPolynomial>(r));
  EXPECT_EQ(sum->degree(), 3);
  EXPECT_EQ(prod.degree(), 4);
  for (double x : {-0.5, 0.25}) {
    EXPECT_NEAR(sum->value(x), 1.0 + 2.0 * p.value(x) - r.value(x), 1e-13);
    EXPECT_NEAR(prod.derivative(x), p.derivative(x) * r.value(x) + p.value(x) * r.derivative(x), 1e-13);
  }
}
