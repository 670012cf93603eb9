#include "qicd/fading.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "qicd/errors.hpp"
#include "qicd/piecewise_quadrature.hpp"

namespace qicd {

namespace {

// log(1e-12): the omitted kappa tail must stay this far below the integral.
constexpr double kLogTruncation = -27.631021115928547;

void check_kappa_bar(double kappa_bar) {
  if (!(kappa_bar > 0.0 && kappa_bar < 1.0)) {
    throw DomainError("kappa_bar must lie in (0, 1)");
  }
}

}  // namespace

double rayleigh_kappa_at(double kappa_bar, double v) {
  check_kappa_bar(kappa_bar);
  const double w = 1.0 - std::clamp(v, 0.0, 1.0);
  // 1 - u (1 - e^{-1/kb}) with 1 - u = w^3, written to stay accurate as w -> 0.
  const double floor = std::exp(-1.0 / kappa_bar);
  const double inner = floor + (-std::expm1(-1.0 / kappa_bar)) * w * w * w;
  return std::clamp(-kappa_bar * std::log(inner), 0.0, 1.0);
}

KappaQuadrature rayleigh_quadrature(double kappa_bar, int n_nodes, double v_lo, double v_hi) {
  check_kappa_bar(kappa_bar);
  if (n_nodes < 1) throw UsageError("rayleigh_quadrature: n_nodes must be positive");
  if (!(0.0 <= v_lo && v_lo < v_hi && v_hi <= 1.0)) {
    throw UsageError("rayleigh_quadrature: need 0 <= v_lo < v_hi <= 1");
  }
  KappaQuadrature q;
  for (const auto& g : gauss_legendre(n_nodes, v_lo, v_hi)) {
    const double w = 1.0 - g.node;
    q.nodes.push_back(rayleigh_kappa_at(kappa_bar, g.node));
    q.weights.push_back(3.0 * w * w * g.weight);
  }
  return q;
}

DiscriminationResult achievable_for_quadrature(const ScenarioParams& params,
                                               const KappaQuadrature& quad,
                                               const NumericsConfig& cfg) {
  if (quad.nodes.empty() || quad.nodes.size() != quad.weights.size()) {
    throw UsageError("achievable_for_quadrature: malformed quadrature");
  }
  const double y = 2.0 * static_cast<double>(params.m);
  std::vector<ConditionalIdlerStats> stats;
  std::size_t k = fock_cutoff(0.0, params.n_s, cfg.cutoff_tol);
  for (double kappa : quad.nodes) {
    stats.push_back(idler_stats(params, kappa));
    k = std::max(k, fock_cutoff(stats.back().xi * y, stats.back().e_kappa, cfg.cutoff_tol));
  }
  return certified_helstrom([&](std::size_t min_cutoff) {
    const std::size_t kk = std::max(k, min_cutoff);
    std::vector<FockPmf> parts;
    parts.reserve(stats.size());
    for (const auto& s : stats) {
      parts.push_back(phase_averaged_displaced_thermal_pmf(s.xi * y, s.e_kappa, cfg.cutoff_tol, kk));
    }
    return PmfPair{thermal_pmf(params.n_s, cfg.cutoff_tol, kk), mixture_pmf(parts, quad.weights)};
  });
}

FadingResult rayleigh_achievable(const ScenarioParams& params, const NumericsConfig& cfg) {
  params.validate();
  const double kb = params.kappa_bar();
  const int n = std::max(cfg.kappa_nodes, 1);
  const auto coarse = achievable_for_quadrature(params, rayleigh_quadrature(kb, n), cfg);
  FadingResult out;
  out.result = achievable_for_quadrature(params, rayleigh_quadrature(kb, 2 * n), cfg);
  out.nodes = 2 * n;
  out.rel_change = std::abs(std::expm1(coarse.log_p_error.value - out.result.log_p_error.value));
  return out;
}

FadingResult rayleigh_lower_bound(const ScenarioParams& params, const NumericsConfig& cfg) {
  params.validate();
  const double kb = params.kappa_bar();
  const double y = 2.0 * static_cast<double>(params.m);
  auto log_helstrom = [&](double kappa, std::size_t min_cutoff) {
    const auto pair = conversion_pmf_pair(params, kappa, y, cfg, min_cutoff);
    return helstrom_diagonal(pair.absent, pair.present).log_p_error.value;
  };

  // A rough value of the integral fixes where the kappa range can be cut.
  std::vector<double> rough;
  for (const auto& g : gauss_legendre(64, 0.0, 1.0)) {
    const double w = 1.0 - g.node;
    rough.push_back(std::log(3.0 * w * w * g.weight) + log_helstrom(rayleigh_kappa_at(kb, g.node), 0));
  }
  const double log_rough = log_sum_exp(rough).value;
  // The Helstrom limit decreases in kappa, so the tail beyond v is at most
  // P(kappa(v)) (1 - v)^3.
  auto tail_small = [&](double v) {
    const double w = 1.0 - v;
    if (w <= 0.0) return true;
    return log_helstrom(rayleigh_kappa_at(kb, v), 0) + 3.0 * std::log(w) < log_rough + kLogTruncation;
  };
  double lo = 0.0, hi = 1.0;
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    (tail_small(mid) ? hi : lo) = mid;
  }
  const double v_cut = hi;

  const std::size_t k = conversion_pmf_pair(params, rayleigh_kappa_at(kb, v_cut), y, cfg).present.cutoff();
  auto sample = [&](double v) {
    const double w = 1.0 - v;
    const auto pair = conversion_pmf_pair(params, rayleigh_kappa_at(kb, v), y, cfg, k);
    PiecewiseSample s;
    s.log_value = std::log(3.0 * w * w) + helstrom_diagonal(pair.absent, pair.present).log_p_error.value;
    s.signature = dominance_signature(pair.absent.log_probs(), pair.present.log_probs());
    return s;
  };
  const auto integral = integrate_piecewise(sample, 0.0, v_cut, cfg);
  if (!integral.converged) {
    throw ConvergenceError("rayleigh_lower_bound: quadrature did not converge at M=" +
                           std::to_string(params.m));
  }
  FadingResult out;
  out.result.log_p_error = LogValue{std::min(integral.log_integral, -std::numbers::ln2)};
  out.result.method = Method::helstrom;
  out.nodes = integral.nodes_per_piece;
  out.pieces = integral.pieces;
  out.rel_change = integral.rel_change;
  out.v_cut = v_cut;
  return out;
}

}  // namespace qicd
