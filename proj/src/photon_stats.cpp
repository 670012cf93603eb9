#include "qicd/photon_stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "qicd/errors.hpp"

namespace qicd {

double ScenarioParams::fixed_kappa() const {
  if (const auto* f = std::get_if<FixedReflectivity>(&reflectivity)) return f->kappa;
  throw UsageError("operation requires a fixed reflectivity; use the fading model");
}

double ScenarioParams::kappa_bar() const {
  if (const auto* r = std::get_if<RayleighReflectivity>(&reflectivity)) return r->kappa_bar;
  throw UsageError("operation requires a Rayleigh reflectivity");
}

void ScenarioParams::validate() const {
  if (!(n_s >= 0.0) || !std::isfinite(n_s)) throw DomainError("n_s must be finite and >= 0");
  if (!(n_e >= 0.0) || !std::isfinite(n_e)) throw DomainError("n_e must be finite and >= 0");
  if (m < 1) throw DomainError("m must be a positive integer");
  if (const auto* f = std::get_if<FixedReflectivity>(&reflectivity)) {
    if (!(f->kappa >= 0.0 && f->kappa <= 1.0)) throw DomainError("kappa must lie in [0, 1]");
  } else {
    const double kb = std::get<RayleighReflectivity>(reflectivity).kappa_bar;
    if (!(kb > 0.0 && kb < 1.0)) throw DomainError("kappa_bar must lie in (0, 1)");
  }
}

ConditionalIdlerStats idler_stats(double n_s, double n_e, double kappa) {
  if (!(kappa >= 0.0 && kappa <= 1.0)) {
    throw DomainError("idler_stats: kappa must lie in [0, 1], got " + std::to_string(kappa));
  }
  const double denom = kappa * n_s + (1.0 - kappa) * n_e + 1.0;
  const double corr2 = kappa * n_s * (n_s + 1.0);
  ConditionalIdlerStats s;
  s.c_p = std::sqrt(corr2);
  s.mu = s.c_p / denom;
  s.e_kappa = (1.0 - kappa) * (1.0 + n_e) * n_s / denom;
  s.sigma2 = 0.5 * denom;
  s.xi = s.mu * s.mu * s.sigma2;
  return s;
}

ConditionalIdlerStats idler_stats(const ScenarioParams& params, double kappa) {
  return idler_stats(params.n_s, params.n_e, kappa);
}

FockPmf::FockPmf(std::vector<double> log_probs, double log_tail_bound)
    : log_probs_(std::move(log_probs)), log_tail_bound_(log_tail_bound) {}

double FockPmf::tail_bound() const { return std::exp(log_tail_bound_); }

double FockPmf::total_mass() const {
  if (log_probs_.empty()) return 0.0;
  return std::exp(log_sum_exp(log_probs_).value);
}

double FockPmf::mean() const {
  double acc = 0.0;
  for (std::size_t n = 1; n < log_probs_.size(); ++n) {
    acc += static_cast<double>(n) * std::exp(log_probs_[n]);
  }
  return acc;
}

double FockPmf::variance() const {
  const double mu = mean();
  double acc = 0.0;
  for (std::size_t n = 0; n < log_probs_.size(); ++n) {
    const double dn = static_cast<double>(n) - mu;
    acc += dn * dn * std::exp(log_probs_[n]);
  }
  return acc;
}

double log_displaced_thermal_tail_bound(double d2, double e_mean, std::size_t k) {
  if (k == 0) return 0.0;
  const double kd = static_cast<double>(k);
  if (d2 == 0.0 && e_mean == 0.0) return kNegInf;
  if (d2 == 0.0) {
    // Geometric tail is exact.
    return kd * (std::log(e_mean) - std::log1p(e_mean));
  }
  // P(N >= k) <= G(1 + s) / (1 + s)^k, where the generating function of the
  // Poisson mixture is G(1 + s) = exp(s d2 / (1 - s E)) / (1 - s E).
  auto log_bound = [&](double s) {
    const double denom = 1.0 - s * e_mean;
    return -std::log(denom) + s * d2 / denom - kd * std::log1p(s);
  };
  double s_hi = e_mean > 0.0 ? (1.0 - 1e-12) / e_mean : std::max(1.0, kd / d2);
  if (e_mean == 0.0) {
    // Poisson: closed-form optimum at 1 + s = k / d2.
    const double s = kd / d2 - 1.0;
    return s > 0.0 ? log_bound(s) : 0.0;
  }
  const double s_best = golden_section_min(log_bound, 0.0, s_hi, 1e-10 * s_hi, 200);
  return std::min(0.0, log_bound(s_best));
}

std::size_t fock_cutoff(double d2, double e_mean, double cutoff_tol) {
  if (d2 == 0.0 && e_mean == 0.0) return 0;
  const double mean = d2 + e_mean;
  const double var = e_mean * (1.0 + e_mean) + d2 * (1.0 + 2.0 * e_mean);
  auto k = static_cast<std::size_t>(std::ceil(mean + 12.0 * std::sqrt(var)));
  const double log_tol = std::log(cutoff_tol);
  while (log_displaced_thermal_tail_bound(d2, e_mean, k + 1) > log_tol) {
    k += std::max<std::size_t>(4, k / 8);
  }
  return k;
}

FockPmf thermal_pmf(double n_mean, double cutoff_tol, std::size_t min_cutoff) {
  if (!(n_mean >= 0.0)) throw DomainError("thermal_pmf: negative mean");
  const std::size_t k = std::max(min_cutoff, fock_cutoff(0.0, n_mean, cutoff_tol));
  std::vector<double> lp(k + 1, kNegInf);
  if (n_mean == 0.0) {
    lp[0] = 0.0;
    return FockPmf(std::move(lp), kNegInf);
  }
  const double log_ratio = std::log(n_mean) - std::log1p(n_mean);
  const double log_p0 = -std::log1p(n_mean);
  for (std::size_t n = 0; n <= k; ++n) lp[n] = static_cast<double>(n) * log_ratio + log_p0;
  return FockPmf(std::move(lp), static_cast<double>(k + 1) * log_ratio);
}

FockPmf phase_averaged_displaced_thermal_pmf(double d2, double e_mean, double cutoff_tol,
                                             std::size_t min_cutoff) {
  if (!(d2 >= 0.0) || !(e_mean >= 0.0)) {
    throw DomainError("displaced thermal pmf: d2 and e_mean must be non-negative");
  }
  if (d2 == 0.0) return thermal_pmf(e_mean, cutoff_tol, min_cutoff);

  const bool poisson_limit = e_mean < 1e-12;
  const double e = poisson_limit ? 0.0 : e_mean;
  const std::size_t k = std::max(min_cutoff, fock_cutoff(d2, e, cutoff_tol));
  std::vector<double> lp(k + 1);
  if (poisson_limit) {
    for (std::size_t n = 0; n <= k; ++n) lp[n] = log_poisson_pmf(n, d2);
  } else {
    // p_n = E^n/(1+E)^{n+1} exp(-d2/E) 1F1~[n+1, 1, z], z = d2/(E(1+E)),
    // with 1F1~ = e^z L_n(-z); the two exponentials combine to -d2/(1+E).
    // The recurrence runs on t_n = r^n L_n(-z), r = E/(1+E), so that the
    // large factors r^n and L_n(-z) never meet in log space.
    const double r = e / (1.0 + e);
    const double rz = d2 / ((1.0 + e) * (1.0 + e));
    const double base = -std::log1p(e) - d2 / (1.0 + e);
    double prev = 1.0, cur = r + rz, log_scale = 0.0;
    lp[0] = base;
    if (k >= 1) lp[1] = base + std::log(cur);
    for (std::size_t n = 1; n < k; ++n) {
      const double nd = static_cast<double>(n);
      const double next = ((2.0 * nd + 1.0) * r * cur + rz * cur - nd * r * r * prev) / (nd + 1.0);
      prev = cur;
      cur = next;
      if (cur > 1e250 || (cur < 1e-250 && cur > 0.0)) {
        prev /= cur;
        log_scale += std::log(cur);
        cur = 1.0;
      }
      lp[n + 1] = base + log_scale + std::log(cur);
    }
  }
  return FockPmf(std::move(lp), log_displaced_thermal_tail_bound(d2, e, k + 1));
}

std::vector<double> gamma_sequence(const ScenarioParams& params, double kappa, double y,
                                   double cutoff_tol) {
  if (!(y >= 0.0)) throw DomainError("gamma_n: y must be non-negative");
  const auto s = idler_stats(params, kappa);
  const double d2 = s.xi * y;
  const std::size_t k = std::max(fock_cutoff(0.0, params.n_s, cutoff_tol),
                                 fock_cutoff(d2, s.e_kappa, cutoff_tol));
  const auto p = thermal_pmf(params.n_s, cutoff_tol, k);
  const auto q = phase_averaged_displaced_thermal_pmf(d2, s.e_kappa, cutoff_tol, k);
  std::vector<double> out(k + 1);
  for (std::size_t n = 0; n <= k; ++n) out[n] = std::exp(p.log_prob(n)) - std::exp(q.log_prob(n));
  return out;
}

double gamma_n(std::size_t n, double y, const ScenarioParams& params, double kappa) {
  const auto seq = gamma_sequence(params, kappa, y);
  return n < seq.size() ? seq[n] : 0.0;
}

FockPmf mixture_pmf(std::span<const FockPmf> components, std::span<const double> weights) {
  if (components.empty() || components.size() != weights.size()) {
    throw UsageError("mixture_pmf: need matching non-empty components and weights");
  }
  std::size_t size = 0;
  for (const auto& c : components) size = std::max(size, c.size());
  std::vector<double> lp(size, kNegInf);
  double log_tail = kNegInf;
  for (std::size_t i = 0; i < components.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    const double lw = std::log(weights[i]);
    const auto& c = components[i];
    for (std::size_t n = 0; n < c.size(); ++n) lp[n] = log_add(lp[n], lw + c.log_probs()[n]);
    log_tail = log_add(log_tail, lw + c.log_tail_bound());
  }
  return FockPmf(std::move(lp), log_tail);
}

}  // namespace qicd
