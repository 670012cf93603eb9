#include "qicd/app/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <cstdlib>
#include <exception>
#include <map>
#include <mutex>
#include <optional>
#include <thread>

#include "qicd/app/csv_writer.hpp"
#include "qicd/baselines.hpp"
#include "qicd/cd_module.hpp"
#include "qicd/errors.hpp"
#include "qicd/fading.hpp"

namespace qicd::app {

namespace {

const std::map<std::string, Quantity>& quantity_names() {
  static const std::map<std::string, Quantity> names = {
      {"pcd_exact", Quantity::pcd_exact},
      {"pcd_largeM", Quantity::pcd_largeM},
      {"pcd_asy", Quantity::pcd_asy},
      {"threshold", Quantity::threshold},
      {"qcb", Quantity::qcb},
      {"ng", Quantity::ng},
      {"ci_helstrom", Quantity::ci_helstrom},
      {"ci_roc", Quantity::ci_roc},
      {"rayleigh_lb", Quantity::rayleigh_lb},
      {"rayleigh_achievable", Quantity::rayleigh_achievable},
      {"exponents", Quantity::exponents},
  };
  return names;
}

bool fixed_only(Quantity q) {
  switch (q) {
    case Quantity::pcd_exact:
    case Quantity::pcd_largeM:
    case Quantity::pcd_asy:
    case Quantity::threshold:
    case Quantity::qcb:
    case Quantity::ng:
    case Quantity::exponents:
      return true;
    default:
      return false;
  }
}

bool rayleigh_only(Quantity q) {
  return q == Quantity::rayleigh_lb || q == Quantity::rayleigh_achievable;
}

// A log-probability column and, with --linear, its linear companion.
void push_log(std::vector<std::string>& cells, bool linear, double log_value) {
  cells.push_back(format_real(log_value));
  if (linear) cells.push_back(format_linear(log_value));
}

void push_log_name(std::vector<std::string>& cols, bool linear, const std::string& name) {
  cols.push_back("log_" + name);
  if (linear) cols.push_back(name);
}

}  // namespace

std::string to_string(Quantity q) {
  for (const auto& [name, value] : quantity_names()) {
    if (value == q) return name;
  }
  return "unknown";
}

Quantity parse_quantity(const std::string& name) {
  const auto& names = quantity_names();
  if (auto it = names.find(name); it != names.end()) return it->second;
  std::string valid;
  for (const auto& [n, _] : names) valid += (valid.empty() ? "" : ", ") + n;
  throw UsageError("unknown quantity '" + name + "' (valid: " + valid + ")");
}

void validate(const SweepSpec& spec) {
  std::vector<std::string> problems;
  if (spec.quantities.empty()) problems.push_back("quantities: at least one quantity is required");
  if (spec.m_grid.empty()) problems.push_back("m_grid: at least one M is required");
  for (std::size_t i = 0; i < spec.m_grid.size(); ++i) {
    if (spec.m_grid[i] < 1) problems.push_back("m_grid: M must be positive");
    if (i > 0 && spec.m_grid[i] <= spec.m_grid[i - 1]) {
      problems.push_back("m_grid: values must be strictly increasing");
      break;
    }
  }
  try {
    ScenarioParams p = spec.scenario;
    p.m = 1;
    p.validate();
  } catch (const DomainError& e) {
    problems.push_back(std::string("scenario: ") + e.what());
  }
  std::vector<Quantity> seen;
  for (Quantity q : spec.quantities) {
    const std::string name = to_string(q);
    if (std::find(seen.begin(), seen.end(), q) != seen.end()) {
      problems.push_back(name + ": listed more than once");
    }
    seen.push_back(q);
    if (fixed_only(q) && !spec.scenario.is_fixed()) {
      problems.push_back(name + ": requires the fixed reflectivity model");
    }
    if (rayleigh_only(q) && !spec.scenario.is_rayleigh()) {
      problems.push_back(name + ": requires the rayleigh reflectivity model");
    }
    if ((q == Quantity::pcd_asy || q == Quantity::exponents) && !(spec.scenario.n_s < 1.0)) {
      problems.push_back(name + ": the asymptote needs n_s < 1");
    }
    if ((q == Quantity::ci_roc) && !((1.0 - (spec.scenario.is_fixed() ? spec.scenario.fixed_kappa()
                                                                        : spec.scenario.kappa_bar())) *
                                         spec.scenario.n_e >
                                     0.0)) {
      problems.push_back(name + ": needs a non-zero background (1 - kappa) n_e");
    }
  }
  if (spec.output_path.empty()) problems.push_back("output: an output path is required");
  if (!problems.empty()) {
    std::string msg = "invalid sweep specification:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw UsageError(msg);
  }
}

SweepSpec sweep_spec_from_settings(const Settings& s) {
  SweepSpec spec;
  spec.scenario = s.scenario();
  spec.m_grid = s.m_grid;
  for (const auto& q : s.quantities) spec.quantities.push_back(parse_quantity(q));
  spec.output_path = s.output;
  spec.linear = s.linear;
  spec.numerics = s.numerics;
  return spec;
}

std::vector<std::string> sweep_columns(const SweepSpec& spec) {
  std::vector<std::string> cols{"m"};
  const bool lin = spec.linear;
  for (Quantity q : spec.quantities) {
    switch (q) {
      case Quantity::pcd_exact:
        push_log_name(cols, lin, "pcd_exact");
        cols.push_back("pcd_exact_nodes");
        cols.push_back("pcd_exact_pieces");
        break;
      case Quantity::pcd_largeM: push_log_name(cols, lin, "pcd_largeM"); break;
      case Quantity::pcd_asy:
        push_log_name(cols, lin, "pcd_asy");
        cols.push_back("n_opt");
        break;
      case Quantity::threshold: cols.push_back("threshold"); break;
      case Quantity::qcb: push_log_name(cols, lin, "qcb"); break;
      case Quantity::ng: push_log_name(cols, lin, "ng"); break;
      case Quantity::ci_helstrom: push_log_name(cols, lin, "ci_helstrom"); break;
      case Quantity::ci_roc: push_log_name(cols, lin, "ci_roc"); break;
      case Quantity::rayleigh_lb:
        push_log_name(cols, lin, "rayleigh_lb");
        cols.push_back("rayleigh_lb_nodes");
        cols.push_back("rayleigh_lb_pieces");
        break;
      case Quantity::rayleigh_achievable:
        push_log_name(cols, lin, "rayleigh_achievable");
        cols.push_back("rayleigh_achievable_nodes");
        cols.push_back("rayleigh_achievable_rel_change");
        break;
      case Quantity::exponents:
        cols.insert(cols.end(), {"r_pcd_largeM", "r_ci_helstrom", "r_finite_asy", "r_asy"});
        break;
    }
  }
  return cols;
}

std::vector<std::string> compute_sweep_row(const SweepSpec& spec, std::int64_t m) {
  ScenarioParams p = spec.scenario;
  p.m = m;
  const auto& cfg = spec.numerics;
  const bool lin = spec.linear;

  std::optional<DiscriminationResult> large, ci;
  auto largeM = [&]() -> const DiscriminationResult& {
    if (!large) large = pcd_largeM(p, cfg);
    return *large;
  };
  auto ci_h = [&]() -> const DiscriminationResult& {
    if (!ci) ci = ci_helstrom(p, cfg);
    return *ci;
  };

  std::vector<std::string> cells{std::to_string(m)};
  for (Quantity q : spec.quantities) {
    switch (q) {
      case Quantity::pcd_exact: {
        const auto ex = pcd_exact(p, cfg);
        push_log(cells, lin, ex.result.log_p_error.value);
        cells.push_back(std::to_string(ex.nodes_per_piece));
        cells.push_back(std::to_string(ex.pieces));
        break;
      }
      case Quantity::pcd_largeM: push_log(cells, lin, largeM().log_p_error.value); break;
      case Quantity::pcd_asy: {
        const auto a = asymptotics(p, m);
        push_log(cells, lin, a.log_p_asy.value);
        cells.push_back(format_real(a.n_opt));
        break;
      }
      case Quantity::threshold: cells.push_back(std::to_string(largeM().optimal_threshold.value_or(0))); break;
      case Quantity::qcb: {
        const auto pair = conversion_pmf_pair(p, p.fixed_kappa(), 2.0 * static_cast<double>(m), cfg);
        push_log(cells, lin, qcb_diagonal(pair.absent, pair.present).log_p_error.value);
        break;
      }
      case Quantity::ng: push_log(cells, lin, ng_lower_bound(p).log_p_error.value); break;
      case Quantity::ci_helstrom: push_log(cells, lin, ci_h().log_p_error.value); break;
      case Quantity::ci_roc: push_log(cells, lin, ci_roc(p).log_p_error.value); break;
      case Quantity::rayleigh_lb: {
        const auto r = rayleigh_lower_bound(p, cfg);
        push_log(cells, lin, r.result.log_p_error.value);
        cells.push_back(std::to_string(r.nodes));
        cells.push_back(std::to_string(r.pieces));
        break;
      }
      case Quantity::rayleigh_achievable: {
        const auto r = rayleigh_achievable(p, cfg);
        push_log(cells, lin, r.result.log_p_error.value);
        cells.push_back(std::to_string(r.nodes));
        cells.push_back(format_real(r.rel_change));
        break;
      }
      case Quantity::exponents: {
        const auto a = asymptotics(p, m);
        cells.push_back(format_real(finite_exponent(largeM().log_p_error, m)));
        cells.push_back(format_real(finite_exponent(ci_h().log_p_error, m)));
        cells.push_back(format_real(a.r_finite));
        cells.push_back(format_real(a.r_asy));
        break;
      }
    }
  }
  return cells;
}

unsigned worker_count() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("QI_CD_THREADS"); env && *env) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end && *end == '\0' && v > 0) n = static_cast<unsigned>(v);
  }
  return n;
}

void ordered_parallel_rows(std::size_t n,
                           const std::function<std::vector<std::string>(std::size_t)>& compute,
                           const std::function<void(std::size_t, const std::vector<std::string>&)>& emit) {
  if (n == 0) return;
  struct Slot {
    bool done = false;
    std::vector<std::string> row;
    std::exception_ptr error;
  };
  std::vector<Slot> slots(n);
  std::mutex mu;
  std::condition_variable cv;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n || stop.load()) return;
      Slot local;
      try {
        local.row = compute(i);
      } catch (...) {
        local.error = std::current_exception();
      }
      {
        std::lock_guard lock(mu);
        slots[i].row = std::move(local.row);
        slots[i].error = local.error;
        slots[i].done = true;
      }
      cv.notify_all();
    }
  };
  const unsigned threads = static_cast<unsigned>(std::min<std::size_t>(worker_count(), n));
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);

  std::exception_ptr failure;
  for (std::size_t i = 0; i < n && !failure; ++i) {
    std::unique_lock lock(mu);
    cv.wait(lock, [&] { return slots[i].done; });
    if (slots[i].error) {
      failure = slots[i].error;
      stop = true;
      break;
    }
    auto row = std::move(slots[i].row);
    lock.unlock();
    try {
      emit(i, row);
    } catch (...) {
      failure = std::current_exception();
      stop = true;
    }
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::filesystem::path run_sweep(const SweepSpec& spec, const json& params_doc) {
  validate(spec);
  CsvWriter out(spec.output_path, {params_doc, numerics_to_json(spec.numerics), {}}, sweep_columns(spec));
  ordered_parallel_rows(
      spec.m_grid.size(), [&](std::size_t i) { return compute_sweep_row(spec, spec.m_grid[i]); },
      [&](std::size_t, const std::vector<std::string>& row) { out.write_row(row); });
  return out.path();
}

}  // namespace qicd::app
