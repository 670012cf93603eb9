#include "qicd/app/figures.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>

#include "qicd/app/csv_writer.hpp"
#include "qicd/app/sweep.hpp"
#include "qicd/baselines.hpp"
#include "qicd/cd_module.hpp"
#include "qicd/errors.hpp"
#include "qicd/fading.hpp"

namespace qicd::app {

namespace fs = std::filesystem;

namespace {

// Tolerance on the exact-vs-large-M deviation reported in the fig8 summary.
constexpr double kDeviationTolerance = 0.005;

json grid(double start, double stop, int count, const char* spacing) {
  return {{"start", start}, {"stop", stop}, {"count", count}, {"spacing", spacing}};
}

class Table {
 public:
  Table(const fs::path& path, const json& doc, const Settings& s, std::vector<std::string> notes = {})
      : meta_{doc, numerics_to_json(s.numerics), std::move(notes)}, path_(path), linear_(s.linear) {}

  void log_column(const std::string& name) {
    columns_.push_back("log_" + name);
    if (linear_) columns_.push_back(name);
  }
  void column(const std::string& name) { columns_.push_back(name); }

  // Rows are computed concurrently and written in order.
  fs::path write(std::size_t n, const std::function<std::vector<std::string>(std::size_t)>& row) {
    CsvWriter out(path_, meta_, columns_);
    ordered_parallel_rows(n, row, [&](std::size_t, const std::vector<std::string>& r) { out.write_row(r); });
    return out.path();
  }

  void push_log(std::vector<std::string>& cells, double v) const {
    cells.push_back(format_real(v));
    if (linear_) cells.push_back(format_linear(v));
  }

 private:
  CsvMetadata meta_;
  fs::path path_;
  bool linear_;
  std::vector<std::string> columns_;
};

std::vector<std::int64_t> require_grid(const Settings& s) {
  if (s.m_grid.empty()) throw UsageError("m_grid is required");
  return s.m_grid;
}

double rel_diff(double log_a, double log_b) { return std::abs(std::expm1(log_b - log_a)); }

// fig1: optimal-threshold staircase and the per-threshold error curves.
std::vector<fs::path> fig1(const json& doc, const Settings& s, const fs::path& dir) {
  const auto ms = require_grid(s);
  const auto& cfg = s.numerics;
  std::vector<DiscriminationResult> large(ms.size());
  ordered_parallel_rows(
      ms.size(),
      [&](std::size_t i) {
        large[i] = pcd_largeM(s.fixed_scenario(ms[i]), cfg);
        return std::vector<std::string>{};
      },
      [](std::size_t, const std::vector<std::string>&) {});
  std::size_t n_max = 0;
  for (const auto& r : large) n_max = std::max(n_max, r.optimal_threshold.value_or(0));

  std::vector<fs::path> files;
  Table staircase(dir / "fig1_threshold.csv", doc, s);
  staircase.column("m");
  staircase.column("threshold");
  files.push_back(staircase.write(ms.size(), [&](std::size_t i) {
    return std::vector<std::string>{std::to_string(ms[i]), std::to_string(large[i].optimal_threshold.value_or(0))};
  }));

  Table curves(dir / "fig1_error.csv", doc, s,
               {"threshold_N<k>: photon-count threshold test at fixed N on the large-M statistics",
                "poisson_N<k>: low-brightness Poisson form of the same test"});
  curves.column("m");
  curves.log_column("pcd_largeM");
  for (std::size_t k = 0; k <= n_max; ++k) curves.log_column("threshold_N" + std::to_string(k));
  for (std::size_t k = 0; k <= n_max; ++k) curves.log_column("poisson_N" + std::to_string(k));
  files.push_back(curves.write(ms.size(), [&](std::size_t i) {
    const auto p = s.fixed_scenario(ms[i]);
    const auto pair = conversion_pmf_pair(p, p.fixed_kappa(), 2.0 * static_cast<double>(ms[i]), cfg, n_max + 1);
    std::vector<std::string> cells{std::to_string(ms[i])};
    curves.push_log(cells, large[i].log_p_error.value);
    for (std::size_t k = 0; k <= n_max; ++k) {
      curves.push_log(cells, threshold_error(pair.absent, pair.present, k).log_p_error.value);
    }
    for (std::size_t k = 0; k <= n_max; ++k) {
      curves.push_log(cells, pcd_poisson_threshold(p, k).log_p_error.value);
    }
    return cells;
  }));
  return files;
}

SweepSpec spec_for(const Settings& s, const ScenarioParams& scenario, std::vector<Quantity> q, const fs::path& out) {
  SweepSpec spec;
  spec.scenario = scenario;
  spec.m_grid = require_grid(s);
  spec.quantities = std::move(q);
  spec.output_path = out;
  spec.linear = s.linear;
  spec.numerics = s.numerics;
  return spec;
}

std::vector<fs::path> fig2a(const json& doc, const Settings& s, const fs::path& dir) {
  const auto spec = spec_for(s, s.fixed_scenario(),
                             {Quantity::pcd_exact, Quantity::pcd_largeM, Quantity::pcd_asy, Quantity::qcb,
                              Quantity::ng, Quantity::ci_helstrom, Quantity::ci_roc},
                             dir / "fig2a.csv");
  return {run_sweep(spec, doc)};
}

std::vector<fs::path> fig2b(const json& doc, const Settings& s, const fs::path& dir) {
  const auto ms = require_grid(s);
  const auto& cfg = s.numerics;
  Table t(dir / "fig2b.csv", doc, s, {"r_* columns are -ln(P)/M"});
  for (const char* c : {"m", "r_pcd_largeM", "r_finite_asy", "r_asy", "r_qcb", "r_ng", "r_ci_helstrom"}) t.column(c);
  return {t.write(ms.size(), [&](std::size_t i) {
    const auto m = ms[i];
    const auto p = s.fixed_scenario(m);
    const auto a = asymptotics(p, m);
    const auto pair = conversion_pmf_pair(p, p.fixed_kappa(), 2.0 * static_cast<double>(m), cfg);
    return std::vector<std::string>{
        std::to_string(m),
        format_real(finite_exponent(pcd_largeM(p, cfg).log_p_error, m)),
        format_real(a.r_finite),
        format_real(a.r_asy),
        format_real(finite_exponent(qcb_diagonal(pair.absent, pair.present).log_p_error, m)),
        format_real(finite_exponent(ng_lower_bound(p).log_p_error, m)),
        format_real(finite_exponent(ci_helstrom(p, cfg).log_p_error, m)),
    };
  })};
}

std::vector<fs::path> fig2c(const json& doc, const Settings& s, const fs::path& dir) {
  if (s.ns_grid.empty()) throw UsageError("fig2c needs a non-empty ns_grid");
  const auto& cfg = s.numerics;
  Table t(dir / "fig2c.csv", doc, s,
          {"r_ci and r_qcb: -ln(P)/M on a doubling M grid, accepted once neighbours differ by < 0.5%",
           "r_asy is empty where the low-brightness asymptote is undefined (n_s >= 1)",
           "reference_6dB: exponent ratio 4"});
  for (const char* c : {"label", "n_s", "r_asy", "r_qcb", "r_ci", "ratio_asy_ci", "ratio_qcb_ci", "ci_converged",
                        "ci_last_rel_change", "ci_m", "qcb_converged", "qcb_last_rel_change", "qcb_m"}) {
    t.column(c);
  }
  const std::size_t n = s.ns_grid.size();
  return {t.write(n + 1, [&](std::size_t i) {
    if (i == n) {
      return std::vector<std::string>{"reference_6dB", "", "", "", "", "4", "4", "", "", "", "", "", ""};
    }
    ScenarioParams p = s.fixed_scenario();
    p.n_s = s.ns_grid[i];
    const auto ci = ci_error_exponent(p, ci_exponent_grid(p), cfg);
    const auto qcb = qcb_error_exponent(p, qcb_exponent_grid(p), cfg);
    std::string r_asy, ratio_asy;
    if (p.n_s < 1.0) {
      const double r = asymptotics(p, 1).r_asy;
      r_asy = format_real(r);
      ratio_asy = format_real(r / ci.exponent);
    }
    return std::vector<std::string>{
        "sweep",
        format_real(p.n_s),
        r_asy,
        format_real(qcb.exponent),
        format_real(ci.exponent),
        ratio_asy,
        format_real(qcb.exponent / ci.exponent),
        ci.converged ? "1" : "0",
        format_real(ci.last_rel_change),
        std::to_string(ci.sequence.back().first),
        qcb.converged ? "1" : "0",
        format_real(qcb.last_rel_change),
        std::to_string(qcb.sequence.back().first),
    };
  })};
}

std::vector<fs::path> fig5(const json& doc, const Settings& s, const fs::path& dir) {
  std::vector<fs::path> files;
  auto spec = spec_for(s, s.rayleigh_scenario(),
                       {Quantity::rayleigh_lb, Quantity::rayleigh_achievable, Quantity::ci_helstrom,
                        Quantity::ci_roc},
                       dir / "fig5.csv");
  validate(spec);
  Table t(spec.output_path, doc, s,
          {"rayleigh_achievable: photon-count threshold optimized separately at each M"});
  for (const auto& c : sweep_columns(spec)) t.column(c);
  files.push_back(t.write(spec.m_grid.size(), [&](std::size_t i) { return compute_sweep_row(spec, spec.m_grid[i]); }));

  if (!s.sfg_csv.empty()) {
    const auto in = read_csv(s.sfg_csv);
    const std::size_t m_col = in.column("m");
    std::optional<std::size_t> log_col, lin_col;
    for (std::size_t c = 0; c < in.columns.size(); ++c) {
      if (in.columns[c] == "log_p") log_col = c;
      if (in.columns[c] == "p") lin_col = c;
    }
    if (!log_col && !lin_col) throw UsageError("sfg_csv needs a 'log_p' or 'p' column");
    Table overlay(dir / "fig5_sfg_overlay.csv", doc, s, {"user-supplied reference curve, not computed here"});
    overlay.column("m");
    overlay.column("log_sfg");
    files.push_back(overlay.write(in.rows.size(), [&](std::size_t i) {
      const auto& row = in.rows[i];
      double v = 0.0;
      try {
        v = log_col ? std::stod(row[*log_col]) : std::log(std::stod(row[*lin_col]));
      } catch (const std::exception&) {
        throw UsageError("sfg_csv row " + std::to_string(i + 1) + " is not numeric");
      }
      if (!std::isfinite(v)) throw UsageError("sfg_csv row " + std::to_string(i + 1) + " is not a probability");
      return std::vector<std::string>{row[m_col], format_real(v)};
    }));
  }
  return files;
}

std::vector<fs::path> fig7(const json& doc, const Settings& s, const fs::path& dir) {
  const auto ms = require_grid(s);
  std::vector<fs::path> files;
  for (const bool rayleigh : {false, true}) {
    Table t(dir / (rayleigh ? "fig7_rayleigh.csv" : "fig7_fixed.csv"), doc, s,
            {"rel_diff = |P_helstrom - P_roc| / P_helstrom"});
    t.column("m");
    t.log_column("ci_helstrom");
    t.log_column("ci_roc");
    t.column("rel_diff");
    files.push_back(t.write(ms.size(), [&](std::size_t i) {
      const auto p = rayleigh ? s.rayleigh_scenario(ms[i]) : s.fixed_scenario(ms[i]);
      const double h = ci_helstrom(p, s.numerics).log_p_error.value;
      const double r = ci_roc(p).log_p_error.value;
      std::vector<std::string> cells{std::to_string(ms[i])};
      t.push_log(cells, h);
      t.push_log(cells, r);
      cells.push_back(format_real(rel_diff(h, r)));
      return cells;
    }));
  }
  return files;
}

std::vector<fs::path> fig8(const json& doc, const Settings& s, const fs::path& dir) {
  const auto ms = require_grid(s);
  std::vector<double> dev(ms.size());
  Table t(dir / "fig8.csv", doc, s, {"rel_deviation = |P_exact - P_largeM| / P_exact"});
  t.column("m");
  t.log_column("pcd_exact");
  t.log_column("pcd_largeM");
  for (const char* c : {"rel_deviation", "pcd_exact_nodes", "pcd_exact_pieces"}) t.column(c);
  std::vector<fs::path> files{t.write(ms.size(), [&](std::size_t i) {
    const auto p = s.fixed_scenario(ms[i]);
    const auto ex = pcd_exact(p, s.numerics);
    const double lm = pcd_largeM(p, s.numerics).log_p_error.value;
    dev[i] = rel_diff(ex.result.log_p_error.value, lm);
    std::vector<std::string> cells{std::to_string(ms[i])};
    t.push_log(cells, ex.result.log_p_error.value);
    t.push_log(cells, lm);
    cells.push_back(format_real(dev[i]));
    cells.push_back(std::to_string(ex.nodes_per_piece));
    cells.push_back(std::to_string(ex.pieces));
    return cells;
  })};
  const auto worst = std::max_element(dev.begin(), dev.end()) - dev.begin();
  Table summary(dir / "fig8_summary.csv", doc, s);
  for (const char* c : {"points", "max_rel_deviation", "m_at_max", "tolerance", "within_tolerance"}) summary.column(c);
  files.push_back(summary.write(1, [&](std::size_t) {
    return std::vector<std::string>{std::to_string(ms.size()), format_real(dev[worst]), std::to_string(ms[worst]),
                                    format_real(kDeviationTolerance), dev[worst] <= kDeviationTolerance ? "1" : "0"};
  }));
  return files;
}

}  // namespace

const std::vector<std::string>& figure_ids() {
  static const std::vector<std::string> ids = {"fig1", "fig2a", "fig2b", "fig2c", "fig5", "fig7", "fig8"};
  return ids;
}

json figure_defaults(const std::string& id) {
  if (id == "fig1") return {{"m_grid", grid(1e6, 6e7, 60, "linear")}};
  if (id == "fig2a") return {{"m_grid", grid(1e5, 1e8, 31, "geometric")}};
  if (id == "fig2b") return {{"m_grid", grid(1e6, 1e10, 41, "geometric")}};
  if (id == "fig2c") {
    return {{"ns_grid", {1e-9, 1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0}}};
  }
  if (id == "fig5") return {{"reflectivity", "rayleigh"}, {"m_grid", grid(1e5, 1e8, 31, "geometric")}};
  if (id == "fig7") return {{"m_grid", grid(1e5, 1e8, 16, "geometric")}};
  if (id == "fig8") return {{"m_grid", grid(1e6, 6e7, 30, "linear")}};
  std::string valid;
  for (const auto& f : figure_ids()) valid += (valid.empty() ? "" : ", ") + f;
  throw UsageError("unknown figure '" + id + "' (valid: " + valid + ")");
}

std::vector<fs::path> run_figure(const std::string& id, const json& doc, const fs::path& out_dir) {
  figure_defaults(id);  // rejects unknown ids
  const Settings s = parse_settings(doc);
  if (id == "fig1") return fig1(doc, s, out_dir);
  if (id == "fig2a") return fig2a(doc, s, out_dir);
  if (id == "fig2b") return fig2b(doc, s, out_dir);
  if (id == "fig2c") return fig2c(doc, s, out_dir);
  if (id == "fig5") return fig5(doc, s, out_dir);
  if (id == "fig7") return fig7(doc, s, out_dir);
  return fig8(doc, s, out_dir);
}

}  // namespace qicd::app
