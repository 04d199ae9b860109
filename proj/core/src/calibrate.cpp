#include <algorithm>
#include <cmath>

#include "monofit/errors.hpp"
#include "monofit/monotone.hpp"
#include "monofit/unity.hpp"

namespace monofit {

namespace {

/// Correction target used to probe kappa and C1: the middle C3 intervals with two in J.
std::pair<KnotRange, std::vector<int>> probe_target(int n, int c3) {
  const int lo = (n - c3) / 2 + 1;
  const int mid = lo + c3 / 2;
  return {KnotRange{lo, lo + c3 - 1}, {mid - 1, mid}};
}

}  // namespace

CalibrationConstants calibrate(const CalibrationConfig& cfg) {
  require(cfg.k >= 2, "calibration needs k >= 2");
  require(cfg.instances >= 1, "calibration needs at least one instance");
  CalibrationConstants c = default_constants(cfg.k, cfg.alpha, cfg.profile);
  require(cfg.n % c.c3 == 0 && cfg.n > c.c3 * c.c4,
          "calibration order must be a multiple of " + std::to_string(c.c3) + " above " +
              std::to_string(c.c3 * c.c4));
  const ChebPartition part(cfg.n);
  const Majorant phi = Majorant::power(cfg.k, 1.0, cfg.k);
  const auto [e, j] = probe_target(cfg.n, c.c3);

  double c2 = 0.0, kappa = INFINITY, c1 = INFINITY, c5 = 0.0, b3 = 0.0, b4 = 0.0;
  for (int i = 0; i < cfg.instances; ++i) {
    const Spline s = random_monotone_spline(part, cfg.k, cfg.seed + static_cast<std::uint64_t>(i));
    const double bk = b_k_max(s, phi);
    const Majorant phi_hat = phi.scaled(bk);
    c2 = std::max(c2, estimate_c2(s, phi_hat, c));

    // Halve kappa from 1 until the dip bound holds.
    double kap = 1.0;
    bool ok = false;
    for (int h = 0; h <= cfg.max_halvings && !ok; ++h) {
      try {
        correction_poly(part, e, j, phi_hat, c.alpha, c.beta_fixed, kap, c.profile);
        ok = true;
      } catch (const Error& err) {
        if (err.kind() != ErrorKind::needs_smaller_kappa) throw;
        kap *= 0.5;
      }
    }
    if (!ok)
      fail(ErrorKind::calibration_failed,
           "kappa did not converge after " + std::to_string(cfg.max_halvings) + " halvings");
    kappa = std::min(kappa, kap);
  }
  c.c2 = std::max(c2, 1e-2);
  c.kappa = kappa;

  const std::vector<double> grid = make_grid({});
  for (int i = 0; i < cfg.instances; ++i) {
    const Spline s = random_monotone_spline(part, cfg.k, cfg.seed + static_cast<std::uint64_t>(i));
    const Majorant phi_hat = phi.scaled(b_k_max(s, phi));
    const Correction q =
        correction_poly(part, e, j, phi_hat, c.alpha, c.beta_fixed, c.kappa, c.profile);
    const FittedConstantsReport rep =
        verify_correction(part, q, phi_hat, c.alpha, c.beta_fixed, cfg.k, grid);
    c1 = std::min(c1, rep.find("derivative_floor")->fitted_constant);

    const Classification cls = classify(s, phi_hat, c);
    c5 = std::max(c5, verify_uc_growth(s, phi_hat, cls, c.uc_factor * c.c2)
                          .rows.front()
                          .fitted_constant);
    const Decomposition d = decompose(s, cls);
    b3 = std::max(b3, b_k_max(d.s3, phi_hat));
    b4 = std::max(b4, b_k_max(d.s4, phi_hat));
  }
  c.c1 = c1;
  c.c5 = std::max(c5, 1e-12);
  c.c4 = static_cast<int>(std::ceil(b3 + 1.0));
  c.c6 = std::max(2, static_cast<int>(std::ceil(b4 + 1.0)));
  // Smallest C3 >= 8k/C1 dividing n; n itself when none is smaller.
  const double need = 8.0 * cfg.k / std::max(c1, 1e-300);
  c.c3 = cfg.n;
  for (int d = std::max(1, static_cast<int>(std::ceil(need))); d <= cfg.n; ++d)
    if (cfg.n % d == 0) {
      c.c3 = d;
      break;
    }
  return c;
}

}  // namespace monofit
