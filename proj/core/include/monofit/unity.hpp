#pragma once

#include <vector>

#include "monofit/indicators.hpp"
#include "monofit/partition.hpp"
#include "monofit/polynomials.hpp"
#include "monofit/report.hpp"
#include "monofit/smoothness.hpp"
#include "monofit/splines.hpp"

namespace monofit {

/// Partition of unity on the coarse partition built from indicators on a finer one.
///
/// Member j is tau_{dj} - tau_{d(j-1)} over the fine partition of order n1 = d n, with
/// tau_0 = 0 and tau_{n1} = 1. Only the n-1 indicators tau_{dj} are ever built.
class UnityBasis {
 public:
  UnityBasis(int n, int n1, double alpha2, double beta2, Profile profile);

  int n() const { return coarse_.n(); }
  int n1() const { return fine_.n(); }
  int d() const { return n1() / n(); }
  double alpha2() const { return alpha2_; }
  double beta2() const { return beta2_; }
  Profile profile() const { return profile_; }
  const ChebPartition& coarse() const { return coarse_; }
  const ChebPartition& fine() const { return fine_; }

  /// tau_{dj} on the fine partition, 1 <= j <= n-1.
  const IndicatorPoly& boundary(int j) const { return *taus_.at(j - 1); }
  IndicatorPtr boundary_ptr(int j) const { return taus_.at(j - 1); }

  /// Member j as a standalone polynomial, 1 <= j <= n.
  PolyPtr member(int j) const;
  double member_value(int j, double x) const;
  double member_derivative(int j, double x) const;
  /// Sum of all members at x.
  double sum(double x) const;

  /// [-1, x_1] for j = 1, [x_{n-1}, 1] for j = n, [-1, 1] otherwise.
  Interval domain(int j) const;
  int degree() const { return taus_.empty() ? 0 : taus_.front()->degree(); }

 private:
  ChebPartition coarse_, fine_;
  double alpha2_, beta2_;
  Profile profile_;
  std::vector<IndicatorPtr> taus_;
};

/// The fine (alpha, beta) handed to the indicator construction for given (alpha2, beta2).
struct UnityIndicatorOrders {
  double alpha = 0.0;
  double beta = 0.0;
};
UnityIndicatorOrders unity_indicator_orders(double alpha2, double beta2);

/// Raises invalid-argument unless n1 is a proper multiple of n.
UnityBasis build_unity(int n, int n1, double alpha2, double beta2, Profile profile);

/// D(x) = sum_j p_j(x) T_j(x), kept as p_n + sum_{j<n} (p_j - p_{j+1}) tau_{dj}.
///
/// Terms with identical neighbouring pieces are dropped, so a spline that is one global
/// polynomial comes back unchanged.
class SimultaneousApproximant final : public Polynomial {
 public:
  SimultaneousApproximant(const Spline& s, std::shared_ptr<const UnityBasis> basis);

  double value(double x) const override;
  double derivative(double x) const override;
  int degree() const override;

  const UnityBasis& basis() const { return *basis_; }
  /// Number of retained (p_j - p_{j+1}) tau_{dj} terms.
  std::size_t active_terms() const { return terms_.size(); }

 private:
  struct Term {
    int j;
    LocalPolynomial diff;
  };
  std::shared_ptr<const UnityBasis> basis_;
  LocalPolynomial last_;
  std::vector<Term> terms_;
  int k_;
};

/// Raises invalid-argument when S and the basis use different coarse orders.
std::shared_ptr<const SimultaneousApproximant> simultaneous_approximant(
    const Spline& s, std::shared_ptr<const UnityBasis> basis);

/// max |sum_j T_j(x) - 1| over the grid.
double unity_sum_error(const UnityBasis& basis, const std::vector<double>& grid);

/// Smallest T_1' and largest T_n' over the grid (signs: >= 0 and <= 0 expected).
struct UnityEndMonotonicity {
  double min_first = 0.0;
  double max_last = 0.0;
};
UnityEndMonotonicity unity_end_monotonicity(const UnityBasis& basis,
                                            const std::vector<double>& grid);

/// Decay constant of |T_j| against delta^a (rho_{n1}/(rho_{n1} + dist(x, I_j)))^b on
/// the member's domain, with (a, b) the exponents realized by the indicators.
FittedConstantsReport verify_unity_decay(const UnityBasis& basis, const std::vector<double>& grid);

/// Exponents (a, b) used by verify_unity_decay.
struct UnityDecayExponents {
  double delta = 0.0;
  double decay = 0.0;
};
UnityDecayExponents unity_decay_exponents(const UnityBasis& basis);

/// Options for the simultaneous-approximation checks.
struct SimultaneousCheck {
  /// Exponent of delta_n in both bounds.
  double gamma = 4.0;
  /// Interval A of the derivative bound; [-1, 1] drops the damped global term.
  Interval a{-1.0, 1.0};
};

/// Rows "value_error" (|S - D| over delta^gamma phi(rho) b_k) and "derivative_error"
/// (|S' - D'| over the two-term right-hand side) at grid points off the knots.
FittedConstantsReport verify_simultaneous(const Spline& s, const Polynomial& d,
                                          const UnityBasis& basis, const Majorant& phi,
                                          const std::vector<double>& grid,
                                          SimultaneousCheck options = {});

}  // namespace monofit
