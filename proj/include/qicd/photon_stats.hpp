#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "qicd/numerics.hpp"

namespace qicd {

struct FixedReflectivity {
  double kappa = 0.01;
};

// Exponentially distributed reflectivity with mean kappa_bar, truncated to
// [0, 1] (Rayleigh-distributed amplitude).
struct RayleighReflectivity {
  double kappa_bar = 0.01;
};

using Reflectivity = std::variant<FixedReflectivity, RayleighReflectivity>;

// The return phase is uniform on [0, 2pi); no other phase model exists.
enum class PhaseModel { uniform };

struct ScenarioParams {
  double n_s = 0.001;  // signal brightness per mode
  double n_e = 20.0;   // thermal background per mode
  Reflectivity reflectivity = FixedReflectivity{};
  PhaseModel phase = PhaseModel::uniform;
  std::int64_t m = 1;  // signal-idler mode pairs

  bool is_fixed() const { return std::holds_alternative<FixedReflectivity>(reflectivity); }
  bool is_rayleigh() const { return std::holds_alternative<RayleighReflectivity>(reflectivity); }
  // Throws UsageError if the model is Rayleigh.
  double fixed_kappa() const;
  // Throws UsageError if the model is Fixed.
  double kappa_bar() const;
  // Throws DomainError on any violated range constraint.
  void validate() const;
};

// Statistics of the combined idler mode conditioned on a reflectivity kappa.
struct ConditionalIdlerStats {
  double mu = 0.0;       // displacement gain
  double e_kappa = 0.0;  // residual thermal photon number
  double sigma2 = 0.0;   // per-quadrature heterodyne variance
  double xi = 0.0;       // mu^2 sigma2
  double c_p = 0.0;      // return-idler cross-correlation amplitude
};

ConditionalIdlerStats idler_stats(double n_s, double n_e, double kappa);
ConditionalIdlerStats idler_stats(const ScenarioParams& params, double kappa);

// Truncated photon-number distribution in log domain. Entries past the end
// are treated as exact zeros; `log_tail_bound` bounds the mass they omit.
class FockPmf {
 public:
  FockPmf() = default;
  FockPmf(std::vector<double> log_probs, double log_tail_bound);

  std::size_t size() const { return log_probs_.size(); }
  std::size_t cutoff() const { return log_probs_.empty() ? 0 : log_probs_.size() - 1; }
  std::span<const double> log_probs() const { return log_probs_; }
  double log_prob(std::size_t n) const {
    return n < log_probs_.size() ? log_probs_[n] : kNegInf;
  }
  double log_tail_bound() const { return log_tail_bound_; }
  double tail_bound() const;

  double total_mass() const;
  double mean() const;
  double variance() const;

 private:
  std::vector<double> log_probs_;
  double log_tail_bound_ = kNegInf;
};

// Smallest cutoff that covers ceil(mean + 12 sd) and at which the certified
// tail of a displaced thermal state falls below `cutoff_tol`.
std::size_t fock_cutoff(double d2, double e_mean, double cutoff_tol);

// Geometric (Bose-Einstein) distribution with mean n_mean.
FockPmf thermal_pmf(double n_mean, double cutoff_tol = 1e-18,
                    std::size_t min_cutoff = 0);

// Photon statistics of a displaced thermal state with |d|^2 = d2 and thermal
// photon number e_mean, averaged over a uniform displacement phase. For
// e_mean < 1e-12 this is Poisson(d2).
FockPmf phase_averaged_displaced_thermal_pmf(double d2, double e_mean,
                                             double cutoff_tol = 1e-18,
                                             std::size_t min_cutoff = 0);

// log P(N >= k) upper bound for the phase-averaged displaced thermal state,
// from the Chernoff bound on its generating function.
double log_displaced_thermal_tail_bound(double d2, double e_mean, std::size_t k);

// gamma_n(y) = thermal(n_s)[n] - displaced(xi y, E_kappa)[n] for n = 0..cutoff.
std::vector<double> gamma_sequence(const ScenarioParams& params, double kappa,
                                   double y, double cutoff_tol = 1e-18);
double gamma_n(std::size_t n, double y, const ScenarioParams& params, double kappa);

// Weighted mixture sum_i w_i pmf_i on the common (maximum) cutoff.
FockPmf mixture_pmf(std::span<const FockPmf> components, std::span<const double> weights);

}  // namespace qicd
