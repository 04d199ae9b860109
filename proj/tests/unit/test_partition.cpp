#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "monofit/partition.hpp"

using namespace monofit;

TEST(Partition, KnotsForSmallOrders) {
  const ChebPartition two(2);
  EXPECT_EQ(two.knot(0), 1.0);
  EXPECT_NEAR(two.knot(1), 0.0, 1e-16);
  EXPECT_EQ(two.knot(2), -1.0);

  const ChebPartition four(4);
  EXPECT_NEAR(four.knot(1), 0.7071067811865476, 1e-16);
  EXPECT_EQ(four.knot(-3), 1.0);
  EXPECT_EQ(four.knot(7), -1.0);
}

TEST(Partition, LengthsPositiveSumToTwoAndNeighboursComparable) {
  for (int n : {4, 8, 16, 32, 64, 128}) {
    const ChebPartition part(n);
    double total = 0.0;
    for (int j = 1; j <= n; ++j) {
      EXPECT_GT(part.knot(j - 1), part.knot(j));
      EXPECT_GT(part.length(j), 0.0);
      total += part.length(j);
      if (j > 1) EXPECT_LT(part.length(j - 1), 3.0 * part.length(j));
      if (j < n) EXPECT_LT(part.length(j + 1), 3.0 * part.length(j));
    }
    EXPECT_NEAR(total, 2.0, 1e-14) << "n=" << n;
  }
}

TEST(Partition, RhoDeltaPsiRanges) {
  EXPECT_DOUBLE_EQ(rho(4, 0.0), 0.3125);
  for (int n : {4, 9, 32}) {
    EXPECT_DOUBLE_EQ(rho(n, 1.0), 1.0 / (n * n));
    EXPECT_DOUBLE_EQ(rho(n, -1.0), 1.0 / (n * n));
    EXPECT_EQ(delta(n, 1.0), 0.0);
    EXPECT_EQ(delta(n, -1.0), 0.0);
    const ChebPartition part(n);
    for (double x : make_grid({200, 200, true})) {
      const double r = rho(n, x);
      EXPECT_GE(r, 1.0 / (n * n));
      EXPECT_LE(r, 1.0 / n + 1.0 / (n * n) + 1e-15);
      EXPECT_EQ(delta(n, x) == 1.0, n * varphi(x) >= 1.0);
      for (int j = 1; j <= n; ++j) {
        EXPECT_GT(part.psi(j, x), 0.0);
        EXPECT_LE(part.psi(j, x), 1.0);
      }
    }
  }
  EXPECT_EQ(ChebPartition(4).psi(1, ChebPartition(4).knot(1)), 1.0);
}

TEST(Partition, HullAndLocate) {
  const ChebPartition part(4);
  EXPECT_EQ(part.hull(3, 3).lo, part.interval(3).lo);
  EXPECT_EQ(part.hull(3, 3).hi, part.interval(3).hi);
  EXPECT_DOUBLE_EQ(part.hull_length(3, 3), part.length(3));
  EXPECT_DOUBLE_EQ(part.hull(1, 4).lo, -1.0);
  EXPECT_DOUBLE_EQ(part.hull(1, 4).hi, 1.0);
  EXPECT_DOUBLE_EQ(part.hull_length(1, 4), 2.0);
  EXPECT_DOUBLE_EQ(part.hull(2, 3).lo, part.knot(3));
  EXPECT_DOUBLE_EQ(part.hull(2, 3).hi, part.knot(1));
  EXPECT_NEAR(part.hull_length(2, 3), part.length(2) + part.length(3), 1e-15);

  EXPECT_EQ(part.locate(1.0), 1);
  EXPECT_EQ(part.locate(-1.0), 4);
  EXPECT_EQ(part.locate(part.knot(2)), 2);
}

TEST(Partition, GridIsSortedAndCoversEndpoints) {
  const auto g = make_grid({});
  ASSERT_GE(g.size(), 3000u);
  EXPECT_EQ(g.front(), -1.0);
  EXPECT_EQ(g.back(), 1.0);
  for (std::size_t i = 1; i < g.size(); ++i) EXPECT_LT(g[i - 1], g[i]);
}

TEST(PartitionInequalities, ExplicitConstantsHoldOnDenseGrid) {
  for (int n : {4, 8, 16, 32, 64}) {
    const InequalityReport rep = verify_partition_inequalities(ChebPartition(n));
    for (const auto& row : rep.rows)
      if (row.explicit_constant) EXPECT_TRUE(row.pass) << row.inequality << " n=" << n;
    const InequalityRow* mesh = rep.find("mesh_upper");
    ASSERT_NE(mesh, nullptr);
    EXPECT_LT(mesh->worst_ratio, 5.0);
  }
}

TEST(PartitionInequalities, RhoBelowDistanceOutsideNeighbours) {
  // Brute force: rho(x) <= |x - x_j| whenever x is outside (x_{j+1}, x_{j-1}).
  const int n = 8;
  const ChebPartition part(n);
  for (double x : make_grid({1000, 0, true}))
    for (int j = 1; j < n; ++j)
      if (x >= part.knot(j - 1) || x <= part.knot(j + 1))
        EXPECT_LE(part.rho(x), std::abs(x - part.knot(j)) + 1e-15);
}

TEST(PartitionInequalities, PsiSquareSumMatchesBruteForceAndIsStable) {
  const auto grid = make_grid({});
  std::vector<double> fitted;
  for (int n : {4, 8, 16, 32}) {
    const ChebPartition part(n);
    double oracle = 0.0;
    for (double x : grid) {
      double sum = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double h = part.length(j);
        const double psi = h / (std::abs(x - part.knot(j)) + h);
        sum += psi * psi;
      }
      oracle = std::max(oracle, sum);
    }
    const InequalityRow* row = verify_partition_inequalities(part).find("psi_square_sum");
    ASSERT_NE(row, nullptr);
    EXPECT_NEAR(row->worst_ratio, oracle, 1e-12 * oracle);
    fitted.push_back(row->worst_ratio);
  }
  EXPECT_LE(*std::max_element(fitted.begin(), fitted.end()) /
                *std::min_element(fitted.begin(), fitted.end()),
            2.0);
}

TEST(PartitionInequalities, KnotProductStepNeedsMoreThanTwoAtLastInterval) {
  // At j = n the product is 2 h_n while n^2 rho(x_n)^2 = 1/n^2; the ratio tends to pi^2.
  for (int n : {8, 64}) {
    const ChebPartition part(n);
    const double at_last = (1.0 + part.knot(n - 1)) * 2.0 * n * n;
    const InequalityRow* row = verify_partition_inequalities(part).find("knot_product_max");
    ASSERT_NE(row, nullptr);
    EXPECT_FALSE(row->explicit_constant);
    EXPECT_GE(row->worst_ratio, at_last * (1.0 - 1e-12));
    EXPECT_GT(row->worst_ratio, 2.0);
    EXPECT_LT(row->worst_ratio, std::numbers::pi * std::numbers::pi + 1e-9);
  }
}

TEST(PartitionInequalities, UnnamedConstantsStableAcrossOrders) {
  std::vector<InequalityReport> reports;
  for (int n : {4, 8, 16, 32, 64}) reports.push_back(verify_partition_inequalities(ChebPartition(n)));
  for (const auto& row : unnamed_constants_stable(reports, 8.0))
    EXPECT_TRUE(row.stable) << row.inequality << " spread " << row.spread;
}
