#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "qicd/discrimination.hpp"
#include "qicd/numerics.hpp"
#include "qicd/photon_stats.hpp"

namespace qicd {

// The two hypotheses seen by the photon counter after the conversion module:
// thermal(n_s) with the target absent, the phase-averaged displaced thermal
// state with |d|^2 = xi * y otherwise. Both share one cutoff.
struct PmfPair {
  FockPmf absent;
  FockPmf present;
};

PmfPair conversion_pmf_pair(const ScenarioParams& params, double kappa, double y,
                            const NumericsConfig& cfg = {}, std::size_t min_cutoff = 0);

// Helstrom limit on a pair built by `build(min_cutoff)`, widening the shared
// cutoff until the truncation bound is 1e-12 below the result.
DiscriminationResult certified_helstrom(
    const std::function<PmfPair(std::size_t)>& build);

struct ExactResult {
  DiscriminationResult result;
  int nodes_per_piece = 0;
  std::size_t pieces = 0;
  double rel_change = 0.0;
};

// Chi-square-averaged Helstrom limit over the heterodyne amplitude.
// Throws ConvergenceError if node doubling exhausts cfg.quad_max_nodes.
ExactResult pcd_exact(const ScenarioParams& params, const NumericsConfig& cfg = {});

// Large-M form: chi-square replaced by a point mass at y = 2M. Also reports
// the optimal photon-count threshold.
DiscriminationResult pcd_largeM(const ScenarioParams& params, const NumericsConfig& cfg = {});

// Low-brightness threshold receiver: (1/2) sum_{n<=N} Poisson(n; 2 xi M).
// N = 0 is the Kennedy receiver.
DiscriminationResult pcd_poisson_threshold(const ScenarioParams& params, std::size_t threshold);

struct AsymptoticQuantities {
  double epsilon = 0.0;      // -W_{-1}(-n_s / e)
  double n_opt = 0.0;        // 2 xi M / epsilon
  LogValue log_p_asy;        // asymptote with its Stirling prefactor
  double r_asy = 0.0;        // [1 - ln(e eps)/eps] 2 xi
  double r_finite = 0.0;     // -ln P_asy / M
};

AsymptoticQuantities asymptotics(const ScenarioParams& params, std::int64_t m);

double finite_exponent(LogValue log_p, std::int64_t m);

// Diagnostic: fixed point of the Stirling-level threshold condition before
// the N >> 1 simplification.
double threshold_fixed_point(const ScenarioParams& params);

struct ExponentEstimate {
  double exponent = 0.0;
  bool converged = false;
  double last_rel_change = 0.0;
  std::vector<std::pair<std::int64_t, double>> sequence;  // (M, -ln P / M)
};

// Walks a geometric M grid and stops at the first pair of neighbours whose
// finite-M exponents agree within `rel_tol`.
ExponentEstimate extrapolate_exponent(std::span<const std::int64_t> m_grid,
                                      const std::function<LogValue(std::int64_t)>& log_p,
                                      double rel_tol = 0.005);

std::vector<std::int64_t> geometric_m_grid(double start, double ratio, int count);

// Exponent of the Chernoff bound on the large-M statistics, on a doubling grid
// starting where 2 xi M = 50.
std::vector<std::int64_t> qcb_exponent_grid(const ScenarioParams& params, int count = 16);
ExponentEstimate qcb_error_exponent(const ScenarioParams& params, std::span<const std::int64_t> m_grid,
                                    const NumericsConfig& cfg = {});

}  // namespace qicd
