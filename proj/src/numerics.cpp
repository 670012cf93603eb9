#include "qicd/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/special_functions/lambert_w.hpp>

#include "qicd/errors.hpp"

namespace qicd {

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;

// Loader's saddle-point pieces for Poisson-type densities. Both keep full
// relative accuracy when k and lambda are in the millions.
double stirling_error(double n) {
  if (n > 15.0) {
    const double s0 = 1.0 / 12.0, s1 = 1.0 / 360.0, s2 = 1.0 / 1260.0,
                 s3 = 1.0 / 1680.0, s4 = 1.0 / 1188.0;
    const double nn = n * n;
    if (n > 500) return (s0 - s1 / nn) / n;
    if (n > 80) return (s0 - (s1 - s2 / nn) / nn) / n;
    if (n > 35) return (s0 - (s1 - (s2 - s3 / nn) / nn) / nn) / n;
    return (s0 - (s1 - (s2 - (s3 - s4 / nn) / nn) / nn) / nn) / n;
  }
  return std::lgamma(n + 1.0) - (n + 0.5) * std::log(n) + n - kLogSqrt2Pi;
}

// x log(x/m) + m - x, without cancellation when x ~ m.
double deviance_term(double x, double m) {
  if (std::abs(x - m) < 0.1 * (x + m)) {
    double v = (x - m) / (x + m);
    double s = (x - m) * v;
    double ej = 2 * x * v;
    const double v2 = v * v;
    for (int j = 1; j < 1000; ++j) {
      ej *= v2;
      const double s1 = s + ej / (2 * j + 1);
      if (s1 == s) return s1;
      s = s1;
    }
    return s;
  }
  return x * std::log(x / m) + m - x;
}

// log(lambda^k e^-lambda / Gamma(k+1)) for real k >= 0.
double log_poisson_real(double k, double lambda) {
  if (lambda == 0.0) return k == 0.0 ? 0.0 : kNegInf;
  if (k == 0.0) return -lambda;
  if (std::isinf(lambda)) return kNegInf;
  return -stirling_error(k) - deviance_term(k, lambda) -
         0.5 * std::log(2.0 * std::numbers::pi * k);
}

}  // namespace

LogValue log_sum_exp(std::span<const double> terms) {
  if (terms.empty()) throw UsageError("log_sum_exp: empty sequence");
  const double top = *std::max_element(terms.begin(), terms.end());
  if (std::isinf(top)) return LogValue{top};
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - top);
  return LogValue{top + std::log(acc)};
}

double lambert_w_minus1(double x) {
  const double branch = -std::exp(-1.0);
  // Allow one ulp of slack below -1/e for values computed as -exp(-1).
  if (!(x >= branch * (1.0 + 4e-16)) || x >= 0.0) {
    throw DomainError("lambert_w_minus1: x must lie in [-1/e, 0), got " +
                      std::to_string(x));
  }
  if (x <= branch) return -1.0;
  double w = boost::math::lambert_wm1(x);
  // One Halley step tightens the residual near the branch point.
  const double ew = std::exp(w);
  const double f = w * ew - x;
  const double fp = ew * (w + 1.0);
  if (fp != 0.0) {
    const double step = f / (fp - (w + 2.0) * f / (2.0 * w + 2.0));
    const double candidate = w - step;
    if (candidate <= -1.0 &&
        std::abs(candidate * std::exp(candidate) - x) < std::abs(f)) {
      w = candidate;
    }
  }
  return w;
}

std::vector<double> log_laguerre_neg_sequence(std::size_t n_max, double z) {
  if (!(z >= 0.0)) throw DomainError("log_laguerre: z must be non-negative");
  std::vector<double> out(n_max + 1);
  out[0] = 0.0;
  if (n_max == 0) return out;
  // L_{k+1}(-z) = ((2k+1+z) L_k(-z) - k L_{k-1}(-z)) / (k+1)
  double prev = 1.0;
  double cur = 1.0 + z;
  double log_scale = 0.0;
  out[1] = std::log(cur);
  for (std::size_t k = 1; k < n_max; ++k) {
    const double kd = static_cast<double>(k);
    const double next = ((2.0 * kd + 1.0 + z) * cur - kd * prev) / (kd + 1.0);
    prev = cur;
    cur = next;
    if (cur > 1e250) {
      prev /= cur;
      log_scale += std::log(cur);
      cur = 1.0;
    }
    out[k + 1] = log_scale + std::log(cur);
  }
  return out;
}

double log_laguerre_1f1(unsigned n, double z) {
  if (!(z >= 0.0)) throw DomainError("log_laguerre_1f1: z must be non-negative");
  return z + log_laguerre_neg_sequence(n, z)[n];
}

double chi2_log_pdf(double y, std::uint64_t dof) {
  if (dof == 0) throw DomainError("chi2_log_pdf: dof must be positive");
  if (!(y >= 0.0)) throw DomainError("chi2_log_pdf: y must be non-negative");
  const double half = 0.5 * static_cast<double>(dof);
  if (dof == 2) return -0.5 * y - std::numbers::ln2;
  if (y == 0.0) {
    return dof == 1 ? std::numeric_limits<double>::infinity() : kNegInf;
  }
  if (dof == 1) {
    return -0.5 * std::log(y) - 0.5 * y - 0.5 * std::numbers::ln2 -
           std::lgamma(0.5);
  }
  // Gamma(shape=dof/2, scale=2) density written as a Poisson term.
  return log_poisson_real(half - 1.0, 0.5 * y) - std::numbers::ln2;
}

double log_poisson_pmf(std::uint64_t k, double lambda) {
  if (!(lambda >= 0.0)) throw DomainError("log_poisson_pmf: negative mean");
  return log_poisson_real(static_cast<double>(k), lambda);
}

namespace {

struct MarcumSums {
  double log_q;
  double log_complement;
};

// Q_1(a, b) = P(J <= K) with K ~ Poisson(a^2/2), J ~ Poisson(b^2/2)
// independent. Both tails are accumulated additively in log space.
MarcumSums marcum_sums(double a, double b, double series_tol) {
  if (!(a >= 0.0) || !(b >= 0.0)) {
    throw DomainError("marcum_q: arguments must be non-negative");
  }
  const double lam = 0.5 * a * a;
  const double x = 0.5 * b * b;
  if (x == 0.0) return {0.0, kNegInf};
  if (lam == 0.0) return {-x, log_sub(0.0, -x)};

  const double log_tol = std::log(series_tol) - 5.0;
  const double scale = std::max(lam, x);
  auto k_hi = static_cast<std::size_t>(std::ceil(scale + 40.0 * std::sqrt(scale) + 100.0));

  for (;;) {
    // J's pmf is needed a little past k_hi for the upper tails.
    std::size_t j_hi = k_hi + 1;
    const double anchor = log_poisson_real(static_cast<double>(k_hi + 1), x);
    while (static_cast<double>(j_hi) < x ||
           log_poisson_real(static_cast<double>(j_hi), x) > anchor - 45.0) {
      j_hi += std::max<std::size_t>(16, j_hi / 8);
    }
    std::vector<double> log_pj(j_hi + 1);
    for (std::size_t j = 0; j <= j_hi; ++j) {
      log_pj[j] = log_poisson_real(static_cast<double>(j), x);
    }
    std::vector<double> lower(k_hi + 1);  // log P(J <= k)
    double acc = kNegInf;
    for (std::size_t k = 0; k <= k_hi; ++k) {
      acc = log_add(acc, log_pj[k]);
      lower[k] = acc;
    }
    std::vector<double> upper(k_hi + 1);  // log P(J >= k + 1)
    acc = kNegInf;
    for (std::size_t j = j_hi; j > k_hi + 1; --j) acc = log_add(acc, log_pj[j]);
    for (std::size_t k = k_hi + 1; k-- > 0;) {
      acc = log_add(acc, log_pj[k + 1]);
      upper[k] = acc;
    }

    std::vector<double> q_terms(k_hi + 1), c_terms(k_hi + 1);
    for (std::size_t k = 0; k <= k_hi; ++k) {
      const double lk = log_poisson_real(static_cast<double>(k), lam);
      q_terms[k] = lk + lower[k];
      c_terms[k] = lk + upper[k];
    }
    const double log_q = log_sum_exp(q_terms).value;
    const double log_c = log_sum_exp(c_terms).value;
    const bool q_done = q_terms.back() < log_q + log_tol;
    const bool c_done = c_terms.back() < log_c + log_tol || log_c == kNegInf;
    if (q_done && c_done) return {std::min(log_q, 0.0), std::min(log_c, 0.0)};
    k_hi *= 2;
  }
}

}  // namespace

double log_marcum_q(double a, double b, double series_tol) {
  return marcum_sums(a, b, series_tol).log_q;
}

double log_marcum_q_complement(double a, double b, double series_tol) {
  return marcum_sums(a, b, series_tol).log_complement;
}

double marcum_q(double a, double b, double series_tol) {
  const auto s = marcum_sums(a, b, series_tol);
  const double q = s.log_q > -std::numbers::ln2 ? -std::expm1(s.log_complement)
                                                : std::exp(s.log_q);
  return std::clamp(q, 0.0, 1.0);
}

std::vector<QuadratureNode> gauss_legendre(int n_nodes, double lo, double hi) {
  if (n_nodes < 1) throw UsageError("gauss_legendre: need at least one node");
  if (!(lo < hi)) throw UsageError("gauss_legendre: require lo < hi");
  const int n = n_nodes;
  std::vector<QuadratureNode> rule(static_cast<std::size_t>(n));
  const double mid = 0.5 * (hi + lo);
  const double half = 0.5 * (hi - lo);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      const double z_prev = z;
      z = z_prev - p1 / pp;
      if (std::abs(z - z_prev) <= 1e-15) break;
    }
    // Re-evaluate the derivative at the converged root for the weight.
    double p1 = 1.0, p2 = 0.0;
    for (int j = 1; j <= n; ++j) {
      const double p3 = p2;
      p2 = p1;
      p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
    }
    pp = n * (z * p1 - p2) / (z * z - 1.0);
    const double w = 2.0 / ((1.0 - z * z) * pp * pp);
    rule[static_cast<std::size_t>(i)] = {mid - half * z, half * w};
    rule[static_cast<std::size_t>(n - 1 - i)] = {mid + half * z, half * w};
  }
  if (n % 2 == 1) rule[static_cast<std::size_t>(n / 2)].node = mid;
  return rule;
}

}  // namespace qicd
