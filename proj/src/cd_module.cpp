#include "qicd/cd_module.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "qicd/errors.hpp"
#include "qicd/piecewise_quadrature.hpp"

namespace qicd {

namespace {

constexpr double kLogHalf = -std::numbers::ln2;
// Truncation must stay this far (in log units, ~1e-12) below the result.
constexpr double kTruncationMargin = 27.7;

DiscriminationResult half_result(Method m) {
  DiscriminationResult r;
  r.log_p_error = LogValue{kLogHalf};
  r.method = m;
  return r;
}

}  // namespace

PmfPair conversion_pmf_pair(const ScenarioParams& params, double kappa, double y,
                            const NumericsConfig& cfg, std::size_t min_cutoff) {
  const auto s = idler_stats(params, kappa);
  const double d2 = s.xi * y;
  const std::size_t k =
      std::max({min_cutoff, fock_cutoff(0.0, params.n_s, cfg.cutoff_tol),
                fock_cutoff(d2, s.e_kappa < 1e-12 ? 0.0 : s.e_kappa, cfg.cutoff_tol)});
  return {thermal_pmf(params.n_s, cfg.cutoff_tol, k),
          phase_averaged_displaced_thermal_pmf(d2, s.e_kappa, cfg.cutoff_tol, k)};
}

DiscriminationResult certified_helstrom(const std::function<PmfPair(std::size_t)>& build) {
  auto pair = build(0);
  for (int attempt = 0;; ++attempt) {
    auto r = helstrom_diagonal(pair.absent, pair.present);
    if (r.log_p_error.is_zero() ||
        r.log_truncation_bound.value <= r.log_p_error.value - kTruncationMargin ||
        attempt >= 12) {
      return r;
    }
    const std::size_t wider = 2 * std::max(pair.absent.size(), pair.present.size());
    pair = build(wider);
  }
}

ExactResult pcd_exact(const ScenarioParams& params, const NumericsConfig& cfg) {
  params.validate();
  const double kappa = params.fixed_kappa();
  ExactResult out;
  if (kappa == 0.0 || params.n_s == 0.0) {
    out.result = half_result(Method::helstrom);
    return out;
  }
  const double m = static_cast<double>(params.m);
  const auto dof = static_cast<std::uint64_t>(2 * params.m);
  const double sd = 2.0 * std::sqrt(m);
  const double y_lo = std::max(0.0, 2.0 * m - cfg.window_sigmas * sd);
  const double y_hi = 2.0 * m + cfg.window_sigmas * sd;

  // One cutoff for the whole window keeps signatures comparable.
  const std::size_t k = conversion_pmf_pair(params, kappa, y_hi, cfg).present.cutoff();
  auto sample = [&](double y) {
    const auto pair = conversion_pmf_pair(params, kappa, y, cfg, k);
    PiecewiseSample s;
    s.log_value = chi2_log_pdf(y, dof) + helstrom_diagonal(pair.absent, pair.present).log_p_error.value;
    s.signature = dominance_signature(pair.absent.log_probs(), pair.present.log_probs());
    return s;
  };
  const auto integral = integrate_piecewise(sample, y_lo, y_hi, cfg);
  if (!integral.converged) {
    throw ConvergenceError("pcd_exact: quadrature did not converge at M=" +
                           std::to_string(params.m) + " (relative change " +
                           std::to_string(integral.rel_change) + ")");
  }
  out.result.log_p_error = LogValue{std::min(integral.log_integral, kLogHalf)};
  out.result.method = Method::helstrom;
  out.nodes_per_piece = integral.nodes_per_piece;
  out.pieces = integral.pieces;
  out.rel_change = integral.rel_change;
  return out;
}

DiscriminationResult pcd_largeM(const ScenarioParams& params, const NumericsConfig& cfg) {
  params.validate();
  const double kappa = params.fixed_kappa();
  const double y = 2.0 * static_cast<double>(params.m);
  PmfPair last;
  auto r = certified_helstrom([&](std::size_t min_cutoff) {
    last = conversion_pmf_pair(params, kappa, y, cfg, min_cutoff);
    return last;
  });
  r.optimal_threshold = optimal_threshold(last.absent, last.present).optimal_threshold;
  return r;
}

DiscriminationResult pcd_poisson_threshold(const ScenarioParams& params, std::size_t threshold) {
  params.validate();
  const auto s = idler_stats(params, params.fixed_kappa());
  const double lambda = 2.0 * s.xi * static_cast<double>(params.m);
  // Beyond this index the remaining Poisson mass is below 1e-300.
  const double reach = lambda + 40.0 * std::sqrt(lambda) + 800.0;
  const auto last = static_cast<std::size_t>(std::min(static_cast<double>(threshold), reach));
  std::vector<double> terms(last + 1);
  for (std::size_t n = 0; n <= last; ++n) terms[n] = log_poisson_pmf(n, lambda);
  DiscriminationResult r;
  r.log_p_error = LogValue{kLogHalf + std::min(0.0, log_sum_exp(terms).value)};
  r.optimal_threshold = threshold;
  r.method = Method::threshold;
  return r;
}

AsymptoticQuantities asymptotics(const ScenarioParams& params, std::int64_t m) {
  params.validate();
  if (!(params.n_s > 0.0 && params.n_s < 1.0)) {
    throw DomainError("asymptotics: the low-brightness asymptote needs 0 < n_s < 1");
  }
  if (m < 1) throw DomainError("asymptotics: m must be positive");
  const auto s = idler_stats(params, params.fixed_kappa());
  AsymptoticQuantities a;
  a.epsilon = -lambert_w_minus1(-params.n_s / std::numbers::e);
  const double two_xi = 2.0 * s.xi;
  const double md = static_cast<double>(m);
  const double big_a = two_xi * md;
  a.n_opt = big_a / a.epsilon;
  const double shape = 1.0 - std::log(std::numbers::e * a.epsilon) / a.epsilon;
  a.r_asy = shape * two_xi;
  // (1/2) e^{-A} A^N / (sqrt(2 pi N) (N/e)^N) with N = A / eps.
  double log_p = kLogHalf - shape * big_a - 0.5 * std::log(2.0 * std::numbers::pi * a.n_opt);
  // The Stirling form exceeds 1/2 once A is O(1); an error probability cannot.
  if (!(log_p <= kLogHalf)) log_p = kLogHalf;
  a.log_p_asy = LogValue{log_p};
  a.r_finite = finite_exponent(a.log_p_asy, m);
  return a;
}

double finite_exponent(LogValue log_p, std::int64_t m) {
  if (m < 1) throw DomainError("finite_exponent: m must be positive");
  return -log_p.value / static_cast<double>(m);
}

double threshold_fixed_point(const ScenarioParams& params) {
  params.validate();
  const auto s = idler_stats(params, params.fixed_kappa());
  const double big_a = 2.0 * s.xi * static_cast<double>(params.m);
  if (big_a == 0.0) return 0.0;
  const double ns = params.n_s;
  double n = big_a / -lambert_w_minus1(-ns / std::numbers::e);
  for (int it = 0; it < 200; ++it) {
    const double arg = -ns * std::pow(1.0 + ns, -(1.0 + 1.0 / n)) *
                       std::pow(2.0 * std::numbers::pi * n, 1.0 / n) / std::numbers::e;
    const double eps = -lambert_w_minus1(std::max(arg, -std::exp(-1.0)));
    const double next = big_a / eps;
    if (std::abs(next - n) <= 1e-12 * n) return next;
    n = next;
  }
  return n;
}

ExponentEstimate extrapolate_exponent(std::span<const std::int64_t> m_grid,
                                      const std::function<LogValue(std::int64_t)>& log_p,
                                      double rel_tol) {
  if (m_grid.size() < 4) throw UsageError("exponent grid needs at least 4 points");
  for (std::size_t i = 1; i < m_grid.size(); ++i) {
    if (m_grid[i] <= m_grid[i - 1]) throw UsageError("exponent grid must be strictly increasing");
  }
  const double ratio = static_cast<double>(m_grid[1]) / static_cast<double>(m_grid[0]);
  for (std::size_t i = 2; i < m_grid.size(); ++i) {
    const double r = static_cast<double>(m_grid[i]) / static_cast<double>(m_grid[i - 1]);
    if (std::abs(r / ratio - 1.0) > 1e-6) throw UsageError("exponent grid must be geometric");
  }
  ExponentEstimate est;
  for (std::size_t i = 0; i < m_grid.size(); ++i) {
    const double r = finite_exponent(log_p(m_grid[i]), m_grid[i]);
    est.sequence.emplace_back(m_grid[i], r);
    est.exponent = r;
    if (i > 0) {
      const double prev = est.sequence[i - 1].second;
      est.last_rel_change = std::abs(r / prev - 1.0);
      if (est.last_rel_change < rel_tol) {
        est.converged = true;
        return est;
      }
    }
  }
  return est;
}

std::vector<std::int64_t> geometric_m_grid(double start, double ratio, int count) {
  if (!(start >= 1.0) || !(ratio > 1.0) || count < 1) {
    throw UsageError("geometric_m_grid: need start >= 1, ratio > 1, count >= 1");
  }
  std::vector<std::int64_t> grid;
  for (int i = 0; i < count; ++i) {
    grid.push_back(static_cast<std::int64_t>(std::llround(start * std::pow(ratio, i))));
  }
  return grid;
}

std::vector<std::int64_t> qcb_exponent_grid(const ScenarioParams& params, int count) {
  const double two_xi = 2.0 * idler_stats(params, params.fixed_kappa()).xi;
  if (!(two_xi > 0.0)) throw DomainError("QCB exponent needs kappa n_s > 0");
  return geometric_m_grid(std::max(1.0, std::round(50.0 / two_xi)), 2.0, count);
}

ExponentEstimate qcb_error_exponent(const ScenarioParams& params, std::span<const std::int64_t> m_grid,
                                    const NumericsConfig& cfg) {
  return extrapolate_exponent(m_grid, [&](std::int64_t m) {
    ScenarioParams p = params;
    p.m = m;
    const auto pair = conversion_pmf_pair(p, p.fixed_kappa(), 2.0 * static_cast<double>(m), cfg);
    return qcb_diagonal(pair.absent, pair.present).log_p_error;
  });
}

}  // namespace qicd
