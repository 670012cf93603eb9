#pragma once

#include <cstddef>
#include <optional>
#include <string_view>

#include "qicd/numerics.hpp"
#include "qicd/photon_stats.hpp"

namespace qicd {

enum class Method { helstrom, threshold, qcb, ng, roc };

std::string_view to_string(Method m);

struct DiscriminationResult {
  LogValue log_p_error;
  std::optional<std::size_t> optimal_threshold;
  Method method = Method::helstrom;
  // Bound on the error-probability contribution lost to Fock truncation.
  LogValue log_truncation_bound = LogValue::zero();

  double p_error() const { return log_p_error.linear(); }
};

// Equal-prior Helstrom limit for two photon-number-diagonal states,
// (1/2) sum_n min(p_n, q_n). Symmetric in its arguments.
DiscriminationResult helstrom_diagonal(const FockPmf& p, const FockPmf& q);

// Photon counting with threshold N: declare "present" iff count > N.
// `absent` is the target-absent distribution.
DiscriminationResult threshold_error(const FockPmf& absent, const FockPmf& present,
                                     std::size_t threshold);

// Best threshold by linear scan; ties go to the smaller N.
DiscriminationResult optimal_threshold(const FockPmf& absent, const FockPmf& present);

// (1/2) inf_s sum_n p_n^s q_n^{1-s}, golden-section search in s.
DiscriminationResult qcb_diagonal(const FockPmf& p, const FockPmf& q);

// log Q_s = log sum_n p_n^s q_n^{1-s}; endpoints are total masses.
double log_chernoff_q(const FockPmf& p, const FockPmf& q, double s);

}  // namespace qicd
