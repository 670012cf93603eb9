#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "qicd/app/config.hpp"
#include "qicd/numerics.hpp"
#include "qicd/photon_stats.hpp"

namespace qicd::app {

enum class Quantity {
  pcd_exact,
  pcd_largeM,
  pcd_asy,
  threshold,
  qcb,
  ng,
  ci_helstrom,
  ci_roc,
  rayleigh_lb,
  rayleigh_achievable,
  exponents,
};

std::string to_string(Quantity q);
Quantity parse_quantity(const std::string& name);  // UsageError on unknown names

struct SweepSpec {
  ScenarioParams scenario;  // m is ignored
  std::vector<std::int64_t> m_grid;
  std::vector<Quantity> quantities;
  std::filesystem::path output_path;
  bool linear = false;
  NumericsConfig numerics;
};

// Throws UsageError listing every problem, one per line.
void validate(const SweepSpec& spec);

SweepSpec sweep_spec_from_settings(const Settings& s);

// Column names for the spec, in emission order.
std::vector<std::string> sweep_columns(const SweepSpec& spec);

// One row of cells for a single M.
std::vector<std::string> compute_sweep_row(const SweepSpec& spec, std::int64_t m);

// Writes the sweep CSV; returns the path written.
std::filesystem::path run_sweep(const SweepSpec& spec, const json& params_doc);

// Worker count: QI_CD_THREADS if set and positive, else the hardware count.
unsigned worker_count();

// Computes rows [0, n) on a worker pool and hands them to `emit` strictly in
// index order. An exception from row i is rethrown after rows < i are emitted.
void ordered_parallel_rows(std::size_t n,
                           const std::function<std::vector<std::string>(std::size_t)>& compute,
                           const std::function<void(std::size_t, const std::vector<std::string>&)>& emit);

}  // namespace qicd::app
