#include "qicd/piecewise_quadrature.hpp"

#include <algorithm>
#include <cmath>

#include "qicd/errors.hpp"

namespace qicd {

std::vector<std::uint8_t> dominance_signature(std::span<const double> log_p,
                                              std::span<const double> log_q) {
  const std::size_t size = std::max(log_p.size(), log_q.size());
  std::vector<std::uint8_t> sig(size);
  for (std::size_t n = 0; n < size; ++n) {
    const double lp = n < log_p.size() ? log_p[n] : kNegInf;
    const double lq = n < log_q.size() ? log_q[n] : kNegInf;
    sig[n] = lp > lq ? 1 : 0;
  }
  return sig;
}

namespace {

void locate_changes(const std::function<PiecewiseSample(double)>& f, double a,
                    const std::vector<std::uint8_t>& sig_a, double b,
                    const std::vector<std::uint8_t>& sig_b, double tol,
                    std::vector<double>& out) {
  if (sig_a == sig_b) return;
  if (b - a <= tol) {
    out.push_back(0.5 * (a + b));
    return;
  }
  const double mid = 0.5 * (a + b);
  const auto s_mid = f(mid).signature;
  locate_changes(f, a, sig_a, mid, s_mid, tol, out);
  locate_changes(f, mid, s_mid, b, sig_b, tol, out);
}

double integrate_pieces(const std::function<PiecewiseSample(double)>& f,
                        const std::vector<double>& edges, int n_nodes) {
  // The rule on [-1, 1] is mapped affinely onto each piece.
  const auto ref = gauss_legendre(n_nodes, -1.0, 1.0);
  std::vector<double> terms;
  terms.reserve(ref.size() * (edges.size() - 1));
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const double mid = 0.5 * (edges[i] + edges[i + 1]);
    const double half = 0.5 * (edges[i + 1] - edges[i]);
    if (!(half > 0.0)) continue;
    const double log_half = std::log(half);
    for (const auto& qn : ref) {
      terms.push_back(std::log(qn.weight) + log_half + f(mid + half * qn.node).log_value);
    }
  }
  if (terms.empty()) return kNegInf;
  return log_sum_exp(terms).value;
}

}  // namespace

PiecewiseIntegral integrate_piecewise(const std::function<PiecewiseSample(double)>& f,
                                      double lo, double hi, const NumericsConfig& cfg) {
  if (!(lo < hi)) throw UsageError("integrate_piecewise: require lo < hi");
  const int scan = std::max(cfg.kink_scan_points, 2);
  const double tol = (hi - lo) * 1e-13;

  std::vector<double> grid(static_cast<std::size_t>(scan));
  std::vector<std::vector<std::uint8_t>> sigs(grid.size());
  for (int i = 0; i < scan; ++i) {
    grid[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (scan - 1);
    sigs[static_cast<std::size_t>(i)] = f(grid[static_cast<std::size_t>(i)]).signature;
  }
  std::vector<double> breaks;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    locate_changes(f, grid[i], sigs[i], grid[i + 1], sigs[i + 1], tol, breaks);
  }
  std::sort(breaks.begin(), breaks.end());

  std::vector<double> edges;
  edges.push_back(lo);
  for (double b : breaks) {
    if (b > edges.back() + tol && b < hi - tol) edges.push_back(b);
  }
  edges.push_back(hi);

  PiecewiseIntegral out;
  out.pieces = edges.size() - 1;
  out.breakpoints = breaks;
  int n = std::max(cfg.quad_initial_nodes, 1);
  double prev = integrate_pieces(f, edges, n);
  for (;;) {
    const int next_n = 2 * n;
    if (next_n > cfg.quad_max_nodes) {
      out.log_integral = prev;
      out.nodes_per_piece = n;
      out.converged = false;
      return out;
    }
    const double cur = integrate_pieces(f, edges, next_n);
    const double rel = (cur == kNegInf && prev == kNegInf) ? 0.0 : std::abs(std::expm1(cur - prev));
    out.rel_change = rel;
    n = next_n;
    prev = cur;
    if (rel < cfg.quad_rel_tol) {
      out.log_integral = cur;
      out.nodes_per_piece = n;
      out.converged = true;
      return out;
    }
  }
}

}  // namespace qicd
