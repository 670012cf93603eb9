#include "qicd/discrimination.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "qicd/errors.hpp"

namespace qicd {

namespace {

constexpr double kLogHalf = -std::numbers::ln2;

// Relative slack under which two log error probabilities count as tied.
constexpr double kTieTol = 1e-12;

}  // namespace

std::string_view to_string(Method m) {
  switch (m) {
    case Method::helstrom: return "helstrom";
    case Method::threshold: return "threshold";
    case Method::qcb: return "qcb";
    case Method::ng: return "ng";
    case Method::roc: return "roc";
  }
  return "unknown";
}

DiscriminationResult helstrom_diagonal(const FockPmf& p, const FockPmf& q) {
  const std::size_t size = std::max(p.size(), q.size());
  if (size == 0) throw UsageError("helstrom_diagonal: empty distributions");
  // 1 - sum_{p>q}(p - q) = sum_n min(p_n, q_n) for normalized p, q; the min
  // form keeps full relative precision when the result is tiny.
  std::vector<double> mins(size);
  for (std::size_t n = 0; n < size; ++n) mins[n] = std::min(p.log_prob(n), q.log_prob(n));
  DiscriminationResult r;
  r.log_p_error = LogValue{kLogHalf + log_sum_exp(mins).value};
  r.method = Method::helstrom;
  r.log_truncation_bound =
      LogValue{kLogHalf + std::min(p.log_tail_bound(), q.log_tail_bound())};
  return r;
}

namespace {

struct ThresholdSums {
  std::vector<double> log_absent_above;  // log sum_{n>N} absent_n
  std::vector<double> log_present_upto;  // log sum_{n<=N} present_n
};

ThresholdSums threshold_sums(const FockPmf& absent, const FockPmf& present) {
  const std::size_t size = std::max(absent.size(), present.size());
  ThresholdSums s;
  s.log_absent_above.assign(size, kNegInf);
  s.log_present_upto.assign(size, kNegInf);
  double acc = kNegInf;
  for (std::size_t n = 0; n < size; ++n) {
    acc = log_add(acc, present.log_prob(n));
    s.log_present_upto[n] = acc;
  }
  acc = kNegInf;
  for (std::size_t n = size; n-- > 0;) {
    s.log_absent_above[n] = acc;
    acc = log_add(acc, absent.log_prob(n));
  }
  return s;
}

}  // namespace

DiscriminationResult threshold_error(const FockPmf& absent, const FockPmf& present,
                                     std::size_t threshold) {
  const std::size_t size = std::max(absent.size(), present.size());
  if (size == 0 || threshold >= size) {
    throw UsageError("threshold_error: threshold " + std::to_string(threshold) +
                     " beyond cutoff " + std::to_string(size == 0 ? 0 : size - 1));
  }
  // (1/2)[1 - sum_{n<=N}(p_n - q_n)] = (1/2)[P(false alarm) + P(miss)].
  double above = kNegInf;
  for (std::size_t n = threshold + 1; n < size; ++n) above = log_add(above, absent.log_prob(n));
  double upto = kNegInf;
  for (std::size_t n = 0; n <= threshold; ++n) upto = log_add(upto, present.log_prob(n));
  DiscriminationResult r;
  r.log_p_error = LogValue{kLogHalf + log_add(above, upto)};
  r.optimal_threshold = threshold;
  r.method = Method::threshold;
  r.log_truncation_bound = LogValue{kLogHalf + absent.log_tail_bound()};
  return r;
}

DiscriminationResult optimal_threshold(const FockPmf& absent, const FockPmf& present) {
  const std::size_t size = std::max(absent.size(), present.size());
  if (size == 0) throw UsageError("optimal_threshold: empty distributions");
  const auto sums = threshold_sums(absent, present);
  std::size_t best_n = 0;
  double best = log_add(sums.log_absent_above[0], sums.log_present_upto[0]);
  for (std::size_t n = 1; n < size; ++n) {
    const double v = log_add(sums.log_absent_above[n], sums.log_present_upto[n]);
    if (v < best - kTieTol * std::max(1.0, std::abs(best))) {
      best = v;
      best_n = n;
    }
  }
  DiscriminationResult r;
  r.log_p_error = LogValue{kLogHalf + best};
  r.optimal_threshold = best_n;
  r.method = Method::threshold;
  r.log_truncation_bound = LogValue{kLogHalf + absent.log_tail_bound()};
  return r;
}

double log_chernoff_q(const FockPmf& p, const FockPmf& q, double s) {
  const std::size_t size = std::max(p.size(), q.size());
  if (size == 0) return kNegInf;
  if (s <= 0.0) return log_sum_exp(q.log_probs()).value;
  if (s >= 1.0) return log_sum_exp(p.log_probs()).value;
  std::vector<double> terms(size, kNegInf);
  for (std::size_t n = 0; n < size; ++n) {
    const double lp = p.log_prob(n), lq = q.log_prob(n);
    if (lp == kNegInf || lq == kNegInf) continue;
    terms[n] = s * lp + (1.0 - s) * lq;
  }
  return log_sum_exp(terms).value;
}

DiscriminationResult qcb_diagonal(const FockPmf& p, const FockPmf& q) {
  auto f = [&](double s) { return log_chernoff_q(p, q, s); };
  // log Q_s is convex in s, so the golden-section minimum is global.
  const double s_star = golden_section_min(f, 0.0, 1.0, 1e-9);
  const double interior = f(s_star);
  const double best = std::min({interior, f(0.0), f(1.0)});
  DiscriminationResult r;
  r.log_p_error = LogValue{kLogHalf + best};
  r.method = Method::qcb;
  return r;
}

}  // namespace qicd
