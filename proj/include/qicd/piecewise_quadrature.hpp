#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "qicd/numerics.hpp"

namespace qicd {

// One evaluation of a piecewise-smooth integrand: the log of its value and a
// discrete signature that is constant wherever the integrand is smooth. For
// Helstrom integrands the signature is the set {n : p_n > q_n}.
struct PiecewiseSample {
  double log_value = kNegInf;
  std::vector<std::uint8_t> signature;
};

struct PiecewiseIntegral {
  double log_integral = kNegInf;
  int nodes_per_piece = 0;
  std::size_t pieces = 0;
  double rel_change = 0.0;  // between the last two node doublings
  bool converged = false;
  std::vector<double> breakpoints;
};

// Integrates exp(log_value(t)) over [lo, hi]. Signature changes are located
// by a uniform scan plus bisection; each smooth piece then gets a
// Gauss-Legendre rule whose size doubles until the total changes by less
// than cfg.quad_rel_tol.
PiecewiseIntegral integrate_piecewise(const std::function<PiecewiseSample(double)>& f,
                                      double lo, double hi, const NumericsConfig& cfg);

// Signature of a pair of log pmfs on [0, size): 1 where p_n > q_n.
std::vector<std::uint8_t> dominance_signature(std::span<const double> log_p,
                                              std::span<const double> log_q);

}  // namespace qicd
