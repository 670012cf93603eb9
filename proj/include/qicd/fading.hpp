#pragma once

#include <cstddef>
#include <vector>

#include "qicd/cd_module.hpp"
#include "qicd/discrimination.hpp"
#include "qicd/numerics.hpp"
#include "qicd/photon_stats.hpp"

namespace qicd {

// Discretized reflectivity distribution. Weights sum to one over [0, 1].
struct KappaQuadrature {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Exponential density (1/kb) e^{-k/kb} truncated to [0, 1] and renormalized.
//
// The rule is Gauss-Legendre in v on [v_lo, v_hi] with u = 1 - (1 - v)^3 the
// CDF value, so that the logarithmic growth of kappa(u) near u = 1 is
// flattened. On the full interval the weights carry the whole measure.
KappaQuadrature rayleigh_quadrature(double kappa_bar, int n_nodes, double v_lo = 0.0,
                                    double v_hi = 1.0);

// kappa at grading coordinate v.
double rayleigh_kappa_at(double kappa_bar, double v);

struct FadingResult {
  DiscriminationResult result;
  int nodes = 0;             // kappa nodes used for the reported value
  std::size_t pieces = 0;    // smooth pieces (lower bound only)
  double rel_change = 0.0;   // against the half-size rule
  double v_cut = 1.0;        // truncation of the kappa range (lower bound only)
};

// Average of the large-M Helstrom limit over the reflectivity distribution.
FadingResult rayleigh_lower_bound(const ScenarioParams& params, const NumericsConfig& cfg = {});

// Helstrom limit of thermal(n_s) against the reflectivity-averaged displaced
// thermal mixture. Evaluated with n and 2n nodes; the 2n value is reported.
FadingResult rayleigh_achievable(const ScenarioParams& params, const NumericsConfig& cfg = {});

// Same mixture on an arbitrary reflectivity rule. `params` supplies n_s, n_e
// and m; its reflectivity model is ignored.
DiscriminationResult achievable_for_quadrature(const ScenarioParams& params,
                                               const KappaQuadrature& quad,
                                               const NumericsConfig& cfg = {});

}  // namespace qicd
