#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qicd/cd_module.hpp"
#include "qicd/discrimination.hpp"
#include "qicd/numerics.hpp"
#include "qicd/photon_stats.hpp"

namespace qicd {

// Classical illumination with a coherent transmitter of M n_s photons.
// Target absent: thermal(n_e). Target present: displaced thermal with
// |d|^2 = M kappa n_s and noise (1 - kappa) n_e, averaged over kappa for the
// Rayleigh model.
DiscriminationResult ci_helstrom(const ScenarioParams& params, const NumericsConfig& cfg = {});

struct RocPoint {
  double p_false_alarm = 0.0;
  double p_detection = 0.0;
};

// Envelope-detector ROC. Fixed: Marcum Q with SNR 2 kappa M n_s / E'.
// Rayleigh: p_D = p_F^{1 / (1 + M kb n_s / E')}. E' = (1 - kappa) n_e, with
// kappa replaced by kb for the Rayleigh model.
RocPoint roc_point(const ScenarioParams& params, double p_false_alarm);
// log(1 - p_D) at log p_F.
double roc_log_miss(const ScenarioParams& params, double log_p_false_alarm);

// min over p_F of (p_F + 1 - p_D) / 2, searched in log p_F.
DiscriminationResult ci_roc(const ScenarioParams& params);

// -ln(1 - kappa / (n_e (1 - kappa) + 1)).
double ng_beta(const ScenarioParams& params);
// (1/4) exp(-beta M n_s).
DiscriminationResult ng_lower_bound(const ScenarioParams& params);

// -ln P_CI / M along a geometric grid, stopping once neighbours agree to 0.5%.
// Non-convergence is reported in the result.
ExponentEstimate ci_error_exponent(const ScenarioParams& params,
                                   std::span<const std::int64_t> m_grid,
                                   const NumericsConfig& cfg = {});

// Doubling grid starting where the coherent return energy M kappa n_s is 1e3.
std::vector<std::int64_t> ci_exponent_grid(const ScenarioParams& params, int count = 10);

}  // namespace qicd
