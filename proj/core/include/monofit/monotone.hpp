#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "monofit/indicators.hpp"
#include "monofit/lazy_poly.hpp"
#include "monofit/partition.hpp"
#include "monofit/polynomials.hpp"
#include "monofit/report.hpp"
#include "monofit/smoothness.hpp"
#include "monofit/splines.hpp"

namespace monofit {

// ---------------------------------------------------------------------------------------
// Constants

/// Constants of the monotonization step.
///
/// c3 is the block length in intervals, c4 the largest component (in blocks) handled
/// without corrections, c6 the ratio n1/n of the unity basis.
struct CalibrationConstants {
  double c1 = 1.0;
  double c2 = 1.0;
  int c3 = 12;
  int c4 = 1;
  double c5 = 1.0;
  int c6 = 4;
  double kappa = 1.0;
  int k = 3;
  double alpha = 4.0;
  double beta_fixed = 9.0;
  double gamma = 0.0;
  double d_plus = 0.0;
  double d_minus = 0.0;
  Profile profile = Profile::practical;
  /// UC threshold is uc_factor * c2 * phi(rho) / rho.
  double uc_factor = 5.0;
  /// Powers of 4 by which c2 may grow when the assembled polynomial is not monotone.
  int max_escalations = 5;
  /// When true, c2 is re-estimated on each instance before use.
  bool c2_from_instance = true;
  /// When every escalation fails, try P = D(S) directly, then blend the candidate
  /// needing the least weight with a strictly increasing anchor.
  bool anchor_blend = false;

  nlohmann::json to_json() const;
};

/// Defaults for order k and endpoint exponent alpha: beta = k + 6, gamma from (alpha, beta).
CalibrationConstants default_constants(int k, double alpha, Profile profile);

// ---------------------------------------------------------------------------------------
// Lemma-level constructions

/// Which small-derivative hypothesis failed, if any.
struct SmallDerivativeHypotheses {
  /// max |S'| rho / phi(rho) on [x_{n-1}, x_1] off the knots (<= 1 required).
  double derivative_ratio = 0.0;
  double derivative_argmax = 0.0;
  /// max over knots of jump / phi(rho(x_j)) (<= 1 required) and the smallest jump.
  double jump_ratio = 0.0;
  double min_jump = 0.0;
  int jump_argmax = 0;
  /// max |S'| on I_1 and I_n (0 required).
  double end_slope = 0.0;
  double end_argmax = 0.0;

  /// "derivative-bound", "jump-bound", "flat-ends" or empty.
  std::string failed(double tol = 1e-9) const;
};

SmallDerivativeHypotheses check_small_derivative(const Spline& s, const Majorant& phi);

/// S(-1) + sum_{j<n} (S(x_j) - S(x_{j+1})) tau_j with tau_j of order (alpha, k + 2).
///
/// With `check`, a failed hypothesis raises precondition-failed naming it and the argmax.
std::shared_ptr<const PolySum> small_derivative_poly(const Spline& s, const Majorant& phi,
                                                     double alpha, Profile profile,
                                                     bool check = true);

/// Random continuous nondecreasing spline flat on I_1 and I_n, scaled so that
/// |S'| <= phi(rho)/rho holds on the 32-point-per-interval check grid.
Spline random_small_derivative_spline(const ChebPartition& part, int k, const Majorant& phi,
                                      std::uint64_t seed);

/// Intervals I_lo, ..., I_hi (lo <= hi), i.e. [x_hi, x_{lo-1}].
struct KnotRange {
  int lo = 1;
  int hi = 1;

  int count() const { return hi - lo + 1; }
  bool contains(int j) const { return lo <= j && j <= hi; }
  Interval interval(const ChebPartition& part) const {
    return {part.knot(hi), part.knot(lo - 1)};
  }
};

/// Result of the correcting polynomial construction.
struct Correction {
  std::shared_ptr<const PolySum> q;
  double lambda = 0.0;
  double kappa = 0.0;
  /// E and J after removing I_n, and the reduction case applied (0 when I_n is not in E).
  KnotRange e;
  std::vector<int> j;
  int reduction_case = 0;
  std::vector<int> a_set;
  std::vector<int> b_set;
  int m_e = 0;
  int m_j = 0;
  /// max over E \ J of -Q' / (delta^alpha phi(rho)/rho) on the check grid.
  double dip_ratio = 0.0;
};

/// Size limits for E and J.
struct CorrectionLimits {
  int min_intervals = 100;
  /// m_J < fraction * m_E (strict) or <= when `inclusive`.
  double max_j_fraction = 0.25;
  bool inclusive = false;
};
CorrectionLimits correction_limits(Profile profile);

/// Q = kappa ((m_E/m_J) sum_A tau_j phi(h_j) - lambda sum_B tau~_j phi(h_j)).
///
/// Raises invalid-argument on size violations and needs-smaller-kappa when the dip
/// bound fails on the check grid.
Correction correction_poly(const ChebPartition& part, KnotRange e, std::vector<int> j,
                           const Majorant& phi, double alpha, double beta, double kappa,
                           Profile profile);

/// Largest kappa = kappa_start / 2^i (i <= max_halvings) passing the dip bound with
/// `margin`; raises calibration-failed otherwise.
Correction correction_poly_auto(const ChebPartition& part, KnotRange e, std::vector<int> j,
                                const Majorant& phi, double alpha, double beta,
                                Profile profile, double kappa_start = 1024.0,
                                int max_halvings = 40, double margin = 0.9);

/// Rows "derivative_floor" (lower), "dip_bound", "magnitude" and "lambda".
FittedConstantsReport verify_correction(const ChebPartition& part, const Correction& c,
                                        const Majorant& phi, double alpha, double beta,
                                        int k, const std::vector<double>& grid);

// ---------------------------------------------------------------------------------------
// Classification and assembly

struct Classification {
  int n = 0;
  int c3 = 0;
  int c4 = 0;
  int n0 = 0;
  /// UC intervals and their witnesses x_j^*.
  std::vector<int> uc;
  std::vector<double> witness;
  /// Good blocks q (1-based).
  std::vector<int> good;
  /// Pairwise separated UC intervals inside each good block, in the order of `good`.
  std::vector<std::vector<int>> separated;
  /// Maximal runs of non-good blocks as block ranges, and which of them are short.
  std::vector<KnotRange> components;
  std::vector<bool> almost_good;
  /// Largest J a block correction may use under the profile's size limits.
  int max_block_j = 0;

  /// Per-interval masks, index j - 1.
  std::vector<bool> in_e;
  std::vector<bool> in_f;
  std::vector<bool> is_uc;

  KnotRange block(int q) const { return {(q - 1) * c3 + 1, q * c3}; }
  /// Interval range covered by component p (0-based).
  KnotRange component_intervals(std::size_t p) const {
    return {(components[p].lo - 1) * c3 + 1, components[p].hi * c3};
  }
  bool f_empty() const;
  nlohmann::json to_json() const;
};

/// UC witnesses on a 64-point grid per interval, then blocks, components and F.
Classification classify(const Spline& s, const Majorant& phi, const CalibrationConstants& c);

/// S3 = S(-1) + int s3 and S4 = int s4 with s4 = S' on F.
struct Decomposition {
  Spline s3;
  Spline s4;
};
Decomposition decompose(const Spline& s, const Classification& cls);

/// The correction targets of one assembly.
struct CorrectionPlan {
  /// (E_q, J_q) for every block inside F.
  std::vector<std::pair<KnotRange, std::vector<int>>> blocks;
  /// (F_p^{+-}, J_p^{+-}) for every long component.
  std::vector<std::pair<KnotRange, std::vector<int>>> ends;
  /// Union of every J, per interval.
  std::vector<bool> j_star;
};
CorrectionPlan correction_plan(const Classification& cls);

struct EndpointData {
  double d_plus = 0.0;
  double d_minus = 0.0;
};

/// P = R_n + r_n and the pieces it was assembled from.
struct Projection {
  std::shared_ptr<const PolySum> p;
  std::shared_ptr<const Polynomial> d;
  std::shared_ptr<const PolySum> qbar;
  std::shared_ptr<const PolySum> m;
  std::shared_ptr<const PolySum> r_small;
  Classification cls;
  std::optional<Decomposition> parts;
  CalibrationConstants constants;
  bool flattened_right = false;
  bool flattened_left = false;
  int escalations = 0;
  /// P = D(S) directly, without the split or any correction.
  bool direct = false;
  /// Weight of the anchor in P = (1 - blend) P_assembled + blend G; 0 when unused.
  double blend = 0.0;
  std::shared_ptr<const Polynomial> anchor;
  /// Least P' of the assembled polynomial before blending.
  double assembled_min_derivative = 0.0;
  MonotoneReport monotone;
  int degree = 0;
};

/// Polynomial G with G(+-1) = S(+-1), G'(+-1) = S'(+-1) and G' > 0 on (-1, 1).
///
/// G' = c0 + u x^{2m} + v x^{2m+1} with the smallest m giving c0 >= mean slope / 2.
/// Raises precondition-failed when S is not increasing overall or an end slope is negative.
std::shared_ptr<const LocalPolynomial> monotone_anchor(const Spline& s);


/// Estimate of the derivative constant: max |S' - D'| rho / phi(rho) off the knots.
double estimate_c2(const Spline& s, const Majorant& phi, const CalibrationConstants& c);

/// Full monotone assembly for a spline with b_k(S, phi) <= 1.
///
/// Raises needs-larger-n naming the sign-argument case ("case-i", "case-ii",
/// "case-iii") where the final derivative went negative.
Projection monotone_projection(const Spline& s, const Majorant& phi, CalibrationConstants c,
                               EndpointData endpoints);

/// Which case of the sign argument x falls in: 1 (F minus J*), 2 (J*), 3 (outside).
int sign_case(const Classification& cls, const CorrectionPlan& plan, double x);

/// Ratio of |S'| rho / phi(rho) to the growth factor on good blocks.
FittedConstantsReport verify_uc_growth(const Spline& s, const Majorant& phi,
                                       const Classification& cls, double threshold);

// ---------------------------------------------------------------------------------------
// Pipeline

struct ApproximateConfig {
  Profile profile = Profile::practical;
  /// Largest order tried by doubling.
  int n_cap = 192;
  std::optional<CalibrationConstants> constants;
  /// Grid size used for the ratio reports.
  int report_points = 4000;
};

struct ApproximateReport {
  std::string f_id;
  int r = 0;
  int n_requested = 0;
  int n_effective = 0;
  /// Smallest order at which the pipeline succeeded (equals n_effective).
  int n_realized = 0;
  std::vector<int> trace;
  bool monotone_pass = false;
  double min_derivative = 0.0;
  double endpoint_err = 0.0;
  double sup_ratio_pointwise = 0.0;
  double sup_ratio_endpoint = 0.0;
  double sup_error = 0.0;
  double varsigma = 0.0;
  int degree = 0;
  bool global_polynomial = false;
  Projection projection;

  nlohmann::json to_json() const;
};

struct Approximation {
  PolyPtr p;
  Spline spline;
  Majorant psi;
  ApproximateReport report;
};

/// psi ~ omega_2(f^(r), .) as a star-regularized tabulated 2-majorant.
Majorant omega2_majorant(const SmoothFunction& f);

/// Ratios |f - P| / ((phi(x)/n)^r w(phi(x)/n)) on the grid, and the endpoint form
/// |f - P| / (phi(x)^{2r} w(phi(x)/n)) on the n^{-2} end zones; 0/0 counts as 0.
struct PointwiseRatios {
  double pointwise = 0.0;
  double endpoint = 0.0;
};
PointwiseRatios pointwise_ratios(const SmoothFunction& f, const Polynomial& p, int n,
                                 const RealFn& omega, int points = 4000);

/// Spline fit, normalization and projection, doubling n on needs-larger-n.
Approximation approximate(const SmoothFunction& f, int r, int n, const ApproximateConfig& cfg = {});

// ---------------------------------------------------------------------------------------
// Calibration

struct CalibrationConfig {
  int k = 3;
  int n = 24;
  std::uint64_t seed = 7;
  int instances = 8;
  Profile profile = Profile::practical;
  double alpha = 4.0;
  int max_halvings = 20;
};

/// Constants estimated on a seeded family of random monotone splines.
CalibrationConstants calibrate(const CalibrationConfig& cfg);

}  // namespace monofit
