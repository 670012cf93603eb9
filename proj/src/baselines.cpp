#include "qicd/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "qicd/errors.hpp"
#include "qicd/fading.hpp"

namespace qicd {

namespace {

constexpr double kLogHalf = -std::numbers::ln2;

struct CiChannel {
  double d2;     // coherent return energy
  double noise;  // thermal photons with the target present
};

CiChannel ci_channel(const ScenarioParams& p, double kappa) {
  return {static_cast<double>(p.m) * kappa * p.n_s, (1.0 - kappa) * p.n_e};
}

// Effective kappa of the ROC families.
double roc_kappa(const ScenarioParams& p) { return p.is_fixed() ? p.fixed_kappa() : p.kappa_bar(); }

double roc_noise(const ScenarioParams& p) {
  const double e = (1.0 - roc_kappa(p)) * p.n_e;
  if (!(e > 0.0)) throw DomainError("ROC baselines need a non-zero background (1 - kappa) n_e");
  return e;
}

}  // namespace

DiscriminationResult ci_helstrom(const ScenarioParams& params, const NumericsConfig& cfg) {
  params.validate();
  std::vector<double> kappas, weights;
  if (params.is_fixed()) {
    kappas = {params.fixed_kappa()};
    weights = {1.0};
  } else {
    auto q = rayleigh_quadrature(params.kappa_bar(), cfg.kappa_nodes);
    kappas = std::move(q.nodes);
    weights = std::move(q.weights);
  }
  std::size_t k = fock_cutoff(0.0, params.n_e, cfg.cutoff_tol);
  for (double kappa : kappas) {
    const auto c = ci_channel(params, kappa);
    k = std::max(k, fock_cutoff(c.d2, c.noise, cfg.cutoff_tol));
  }
  return certified_helstrom([&](std::size_t min_cutoff) {
    const std::size_t kk = std::max(k, min_cutoff);
    std::vector<FockPmf> parts;
    for (double kappa : kappas) {
      const auto c = ci_channel(params, kappa);
      parts.push_back(phase_averaged_displaced_thermal_pmf(c.d2, c.noise, cfg.cutoff_tol, kk));
    }
    FockPmf present = parts.size() == 1 ? std::move(parts.front()) : mixture_pmf(parts, weights);
    return PmfPair{thermal_pmf(params.n_e, cfg.cutoff_tol, kk), std::move(present)};
  });
}

double roc_log_miss(const ScenarioParams& params, double log_pf) {
  params.validate();
  if (!(log_pf <= 0.0)) throw DomainError("roc: p_F must lie in (0, 1]");
  const double e = roc_noise(params);
  const double energy = static_cast<double>(params.m) * roc_kappa(params) * params.n_s;
  if (params.is_fixed()) {
    return log_marcum_q_complement(std::sqrt(2.0 * energy / e), std::sqrt(-2.0 * log_pf));
  }
  const double g = 1.0 / (1.0 + energy / e);
  const double x = g * log_pf;
  if (x == 0.0) return kNegInf;
  return std::log(-std::expm1(x));
}

RocPoint roc_point(const ScenarioParams& params, double p_false_alarm) {
  if (!(p_false_alarm > 0.0 && p_false_alarm <= 1.0)) {
    throw DomainError("roc: p_F must lie in (0, 1]");
  }
  const double log_miss = roc_log_miss(params, std::log(p_false_alarm));
  return {p_false_alarm, -std::expm1(log_miss)};
}

DiscriminationResult ci_roc(const ScenarioParams& params) {
  params.validate();
  const double e = roc_noise(params);
  const double lambda = static_cast<double>(params.m) * roc_kappa(params) * params.n_s / e;
  auto objective = [&](double t) { return log_add(t, roc_log_miss(params, t)); };

  const double lo = -(2.0 * lambda + 50.0);
  const double hi = -1e-12;
  // Coarse scan to bracket the minimum, then golden section inside it.
  constexpr int kScan = 256;
  int best_i = 0;
  double best = objective(lo);
  for (int i = 1; i <= kScan; ++i) {
    const double v = objective(lo + (hi - lo) * i / kScan);
    if (v < best) {
      best = v;
      best_i = i;
    }
  }
  const double step = (hi - lo) / kScan;
  const double a = std::max(lo, lo + step * (best_i - 1));
  const double b = std::min(hi, lo + step * (best_i + 1));
  const double t_star = golden_section_min(objective, a, b, 1e-10 * std::max(1.0, std::abs(a)));
  const double value = std::min(best, objective(t_star));

  DiscriminationResult r;
  r.log_p_error = LogValue{kLogHalf + std::min(value, 0.0)};
  r.method = Method::roc;
  return r;
}

double ng_beta(const ScenarioParams& params) {
  params.validate();
  const double kappa = params.fixed_kappa();
  return -std::log1p(-kappa / (params.n_e * (1.0 - kappa) + 1.0));
}

DiscriminationResult ng_lower_bound(const ScenarioParams& params) {
  const double beta = ng_beta(params);
  DiscriminationResult r;
  r.log_p_error = LogValue{-2.0 * std::numbers::ln2 - beta * static_cast<double>(params.m) * params.n_s};
  r.method = Method::ng;
  return r;
}

ExponentEstimate ci_error_exponent(const ScenarioParams& params,
                                   std::span<const std::int64_t> m_grid,
                                   const NumericsConfig& cfg) {
  return extrapolate_exponent(m_grid, [&](std::int64_t m) {
    ScenarioParams p = params;
    p.m = m;
    return ci_helstrom(p, cfg).log_p_error;
  });
}

std::vector<std::int64_t> ci_exponent_grid(const ScenarioParams& params, int count) {
  const double per_mode = params.fixed_kappa() * params.n_s;
  if (!(per_mode > 0.0)) throw DomainError("CI exponent needs kappa n_s > 0");
  return geometric_m_grid(std::max(1.0, std::round(1e3 / per_mode)), 2.0, count);
}

}  // namespace qicd
