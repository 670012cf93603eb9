#include "qicd/app/selftest.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <numbers>
#include <random>
#include <sstream>

#include "qicd/baselines.hpp"
#include "qicd/cd_module.hpp"
#include "qicd/discrimination.hpp"
#include "qicd/fading.hpp"
#include "qicd/numerics.hpp"
#include "qicd/photon_stats.hpp"

namespace qicd::app {

namespace {

struct Invariant {
  const char* name;
  double tolerance;  // the measured error must not exceed this
  std::function<double()> measure;
};

struct Suite {
  const char* name;
  std::vector<Invariant> invariants;
};

ScenarioParams baseline(std::int64_t m) {
  ScenarioParams p;
  p.m = m;
  return p;
}

// Direct Kummer series for 1F1(n+1; 1; z), summed in log space.
double log_kummer_series(unsigned n, double z) {
  if (z == 0.0) return 0.0;
  double acc = kNegInf, log_term = 0.0;
  for (unsigned k = 0; k < 100000; ++k) {
    acc = log_add(acc, log_term);
    log_term += std::log((n + 1.0 + k) * z) - 2.0 * std::log(k + 1.0);
    if (k > z && log_term < acc - 40.0) break;
  }
  return acc;
}

std::vector<Suite> suites() {
  std::vector<Suite> s;
  s.push_back({"numerics",
               {
                   {"lambert_residual", 1e-13,
                    [] {
                      std::mt19937_64 rng(7);
                      std::uniform_real_distribution<double> u(-1.0 / std::numbers::e, 0.0);
                      double worst = 0.0;
                      for (int i = 0; i < 200; ++i) {
                        const double x = std::min(u(rng), -1e-300);
                        const double w = lambert_w_minus1(x);
                        worst = std::max(worst, std::abs(w * std::exp(w) - x) / std::abs(x));
                      }
                      return worst;
                    }},
                   {"laguerre_vs_series", 1e-10,
                    [] {
                      double worst = 0.0;
                      for (unsigned n : {0u, 3u, 17u, 60u})
                        for (double z : {0.1, 2.5, 12.0, 40.0}) {
                          const double ref = log_kummer_series(n, z);
                          worst = std::max(worst, std::abs(std::expm1(log_laguerre_1f1(n, z) - ref)));
                        }
                      return worst;
                    }},
                   {"chi2_normalization", 1e-8,
                    [] {
                      double worst = 0.0;
                      for (std::uint64_t dof : {2ull, 10ull, 20000ull}) {
                        const double hi = static_cast<double>(dof) + 20.0 * std::sqrt(2.0 * dof);
                        double sum = 0.0;
                        const int pieces = 16;
                        for (int k = 0; k < pieces; ++k) {
                          for (const auto& q : gauss_legendre(64, hi * k / pieces, hi * (k + 1) / pieces)) {
                            sum += q.weight * std::exp(chi2_log_pdf(q.node, dof));
                          }
                        }
                        worst = std::max(worst, std::abs(sum - 1.0));
                      }
                      return worst;
                    }},
                   {"marcum_monotone", 0.0,
                    [] {
                      double worst = 0.0;
                      for (double a = 0.0; a <= 6.0; a += 0.5)
                        for (double b = 0.0; b < 8.0; b += 0.5) {
                          worst = std::max(worst, marcum_q(a, b + 0.5) - marcum_q(a, b));
                          worst = std::max(worst, marcum_q(a, b) - marcum_q(a + 0.5, b));
                        }
                      return std::max(0.0, worst - 1e-15);
                    }},
               }});
  s.push_back({"photon_stats",
               {
                   {"pmf_normalization", 1e-12,
                    [] {
                      double worst = 0.0;
                      for (double d2 : {0.0, 0.3, 5.0, 200.0})
                        for (double e : {1e-6, 1e-3, 0.5, 4.0}) {
                          const auto p = phase_averaged_displaced_thermal_pmf(d2, e);
                          worst = std::max(worst, std::abs(p.total_mass() - 1.0) - p.tail_bound());
                        }
                      return std::max(0.0, worst);
                    }},
                   {"displaced_mean", 1e-10,
                    [] {
                      double worst = 0.0;
                      for (double d2 : {0.1, 3.0, 19.0})
                        for (double e : {1e-6, 0.2, 5.0}) {
                          const auto p = phase_averaged_displaced_thermal_pmf(d2, e);
                          worst = std::max(worst, std::abs(p.mean() / (d2 + e) - 1.0));
                        }
                      return worst;
                    }},
                   {"gamma_single_sign_change", 0.0,
                    [] {
                      double extra = 0.0;
                      for (std::int64_t m : {10000LL, 1000000LL, 100000000LL}) {
                        const auto g = gamma_sequence(baseline(m), 0.01, 2.0 * static_cast<double>(m));
                        int changes = 0;
                        for (std::size_t n = 1; n < g.size(); ++n) {
                          if (g[n] == 0.0 || g[n - 1] == 0.0) continue;
                          if ((g[n] > 0) != (g[n - 1] > 0)) ++changes;
                        }
                        extra = std::max(extra, std::abs(changes - 1.0));
                      }
                      return extra;
                    }},
               }});
  s.push_back({"discrimination",
               {
                   {"helstrom_equals_threshold_scan", 1e-12,
                    [] {
                      double worst = 0.0;
                      for (std::int64_t m : {1000000LL, 10000000LL, 50000000LL}) {
                        const auto pair = conversion_pmf_pair(baseline(m), 0.01, 2.0 * static_cast<double>(m));
                        const double h = helstrom_diagonal(pair.absent, pair.present).log_p_error.value;
                        double best = kNegInf;
                        for (std::size_t n = 0; n < pair.absent.size(); ++n) {
                          const double v = threshold_error(pair.absent, pair.present, n).log_p_error.value;
                          best = n == 0 ? v : std::min(best, v);
                        }
                        worst = std::max(worst, std::abs(std::expm1(h - best)));
                      }
                      return worst;
                    }},
                   {"helstrom_symmetry", 1e-14,
                    [] {
                      const auto p = thermal_pmf(0.3), q = phase_averaged_displaced_thermal_pmf(0.7, 0.1);
                      return std::abs(helstrom_diagonal(p, q).log_p_error.value -
                                      helstrom_diagonal(q, p).log_p_error.value);
                    }},
                   {"qcb_above_helstrom", 0.0,
                    [] {
                      double worst = 0.0;
                      for (std::int64_t m : {100000LL, 10000000LL}) {
                        const auto pair = conversion_pmf_pair(baseline(m), 0.01, 2.0 * static_cast<double>(m));
                        worst = std::max(worst, helstrom_diagonal(pair.absent, pair.present).log_p_error.value -
                                                    qcb_diagonal(pair.absent, pair.present).log_p_error.value);
                      }
                      return std::max(0.0, worst);
                    }},
               }});
  s.push_back({"cd_module",
               {
                   {"exact_vs_largeM", 0.005,
                    [] {
                      const auto p = baseline(1000000);
                      return std::abs(std::expm1(pcd_largeM(p).log_p_error.value -
                                                 pcd_exact(p).result.log_p_error.value));
                    }},
                   {"kennedy_closed_form", 1e-14,
                    [] {
                      const auto p = baseline(10000000);
                      const double two_xi_m = 2.0 * idler_stats(p, 0.01).xi * 1e7;
                      return std::abs(pcd_poisson_threshold(p, 0).log_p_error.value -
                                      (-std::numbers::ln2 - two_xi_m));
                    }},
                   {"exponent_identity", 1e-10,
                    [] {
                      const auto p = baseline(1);
                      const auto a = asymptotics(p, 1);
                      const double shape = 1.0 - std::log(std::numbers::e * a.epsilon) / a.epsilon;
                      return std::abs(a.r_asy / (2.0 * idler_stats(p, 0.01).xi) - shape);
                    }},
               }});
  s.push_back({"baselines",
               {
                   {"ng_below_pcd", 0.0,
                    [] {
                      double worst = 0.0;
                      for (std::int64_t m : {1000000LL, 10000000LL, 60000000LL}) {
                        const auto p = baseline(m);
                        worst = std::max(worst, ng_lower_bound(p).log_p_error.value - pcd_largeM(p).log_p_error.value);
                      }
                      return std::max(0.0, worst);
                    }},
                   {"quantum_advantage", 0.0,
                    [] {
                      double worst = -1.0;
                      for (std::int64_t m : {1000000LL, 10000000LL}) {
                        const auto p = baseline(m);
                        worst = std::max(worst, pcd_largeM(p).log_p_error.value - ci_helstrom(p).log_p_error.value);
                      }
                      return std::max(0.0, worst);
                    }},
                   {"roc_concavity", 1e-12,
                    [] {
                      double worst = 0.0;
                      const auto p = baseline(10000000);
                      std::vector<RocPoint> pts;
                      for (int i = 1; i <= 40; ++i) pts.push_back(roc_point(p, i / 41.0));
                      for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
                        const double chord = 0.5 * (pts[i - 1].p_detection + pts[i + 1].p_detection);
                        worst = std::max(worst, chord - pts[i].p_detection);
                      }
                      return std::max(0.0, worst);
                    }},
               }});
  s.push_back({"fading",
               {
                   {"quadrature_mean", 1e-8,
                    [] {
                      const auto q = rayleigh_quadrature(0.01, 64);
                      double mean = 0.0, mass = 0.0;
                      for (std::size_t i = 0; i < q.nodes.size(); ++i) {
                        mean += q.weights[i] * q.nodes[i];
                        mass += q.weights[i];
                      }
                      return std::max(std::abs(mass - 1.0), std::abs(mean / 0.01 - 1.0));
                    }},
                   {"lower_bound_below_achievable", 0.0,
                    [] {
                      ScenarioParams p = baseline(10000000);
                      p.reflectivity = RayleighReflectivity{0.01};
                      return std::max(0.0, rayleigh_lower_bound(p).result.log_p_error.value -
                                               rayleigh_achievable(p).result.log_p_error.value);
                    }},
               }});
  return s;
}

}  // namespace

std::vector<std::string> selftest_invariants() {
  std::vector<std::string> names;
  for (const auto& suite : suites()) {
    for (const auto& inv : suite.invariants) names.push_back(std::string(suite.name) + "." + inv.name);
  }
  return names;
}

std::vector<SuiteReport> run_selftest(std::ostream& out, const SelftestOptions& opts) {
  std::vector<SuiteReport> reports;
  for (const auto& suite : suites()) {
    SuiteReport r;
    r.name = suite.name;
    const auto t0 = std::chrono::steady_clock::now();
    for (const auto& inv : suite.invariants) {
      const std::string full = r.name + "." + inv.name;
      const double tol = opts.corrupt.count(full) || opts.corrupt.count(inv.name) ? -1.0 : inv.tolerance;
      ++r.checks;
      std::ostringstream detail;
      try {
        const double err = inv.measure();
        if (!(err <= tol)) {
          detail << full << ": error " << std::setprecision(3) << err << " exceeds tolerance " << tol;
          r.failures.push_back(detail.str());
        }
      } catch (const std::exception& e) {
        r.failures.push_back(full + ": threw " + e.what());
      }
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out << (r.failures.empty() ? "PASS " : "FAIL ") << std::left << std::setw(16) << r.name << std::right
        << std::setw(3) << r.checks << " checks  " << std::fixed << std::setprecision(3) << r.seconds << " s\n"
        << std::defaultfloat;
    for (const auto& f : r.failures) out << "  " << f << '\n';
    reports.push_back(std::move(r));
  }
  return reports;
}

}  // namespace qicd::app
