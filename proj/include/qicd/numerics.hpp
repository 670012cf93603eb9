#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace qicd {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Natural log of a non-negative quantity. -inf encodes exact zero.
//
// Error probabilities in this library routinely fall below 1e-300, so every
// probability crosses API boundaries as a LogValue rather than a double.
struct LogValue {
  double value = kNegInf;

  static constexpr LogValue zero() { return LogValue{kNegInf}; }
  static constexpr LogValue one() { return LogValue{0.0}; }
  static LogValue from_linear(double p) { return LogValue{std::log(p)}; }

  double linear() const { return std::exp(value); }
  bool is_zero() const { return value == kNegInf; }

  friend constexpr LogValue operator*(LogValue a, LogValue b) {
    return LogValue{a.value + b.value};
  }
  friend constexpr auto operator<=>(LogValue, LogValue) = default;
};

// Tolerances shared by the series, truncation and quadrature routines.
struct NumericsConfig {
  // Additive probability below which series tails are dropped.
  double series_tol = 1e-15;
  // Certified bound on Fock-space mass omitted by truncation.
  double cutoff_tol = 1e-18;

  // Exact chi-square-averaged integral.
  double window_sigmas = 10.0;
  int quad_initial_nodes = 64;
  int quad_max_nodes = 4096;
  double quad_rel_tol = 1e-6;
  int kink_scan_points = 65;

  // Reflectivity quadrature for the fading model.
  int kappa_nodes = 64;
};

inline double log_add(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == kNegInf) return a;
  return a + std::log1p(std::exp(b - a));
}

// log(exp(a) - exp(b)) for a >= b.
inline double log_sub(double a, double b) {
  if (b == kNegInf) return a;
  if (b >= a) return kNegInf;
  return a + std::log1p(-std::exp(b - a));
}

// log(sum exp(t_i)) with max-shift stabilization. Throws UsageError on an
// empty sequence.
LogValue log_sum_exp(std::span<const double> terms);

// Lower real branch W_{-1} of the Lambert W function on [-1/e, 0).
double lambert_w_minus1(double x);

// log of 1F1~[n+1; 1; z] = e^z L_n(-z) for z >= 0.
double log_laguerre_1f1(unsigned n, double z);

// log L_n(-z) for n = 0..n_max, via the three-term Laguerre recurrence with
// running rescaling. At negative argument every L_n is positive.
std::vector<double> log_laguerre_neg_sequence(std::size_t n_max, double z);

// log density of the chi-square distribution with `dof` degrees of freedom.
double chi2_log_pdf(double y, std::uint64_t dof);

// log of the Poisson pmf, lambda >= 0.
double log_poisson_pmf(std::uint64_t k, double lambda);

// Marcum Q_1(a, b), summed as a Poisson-weighted series of regularized upper
// incomplete gamma functions.
double marcum_q(double a, double b, double series_tol = 1e-15);
// log Q_1(a, b) and log(1 - Q_1(a, b)), both accurate when the value is far
// below double precision.
double log_marcum_q(double a, double b, double series_tol = 1e-15);
double log_marcum_q_complement(double a, double b, double series_tol = 1e-15);

struct QuadratureNode {
  double node;
  double weight;
};

// Gauss-Legendre rule on [lo, hi], exact for polynomials of degree 2n - 1.
std::vector<QuadratureNode> gauss_legendre(int n_nodes, double lo, double hi);

// Golden-section minimization of a unimodal function on [lo, hi]. Returns the
// abscissa of the best point seen.
template <typename F>
double golden_section_min(F&& f, double lo, double hi, double x_tol,
                          int max_iter = 400) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < max_iter && (b - a) > x_tol; ++it) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return fc <= fd ? c : d;
}

}  // namespace qicd
