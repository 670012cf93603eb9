#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "qicd/numerics.hpp"
#include "qicd/photon_stats.hpp"

namespace qicd::app {

using json = nlohmann::json;

// Typed view of a settings document. All keys are optional in the document;
// missing ones keep the defaults below.
struct Settings {
  double n_s = 0.001;
  double n_e = 20.0;
  double kappa = 0.01;
  double kappa_bar = 0.01;
  std::string reflectivity = "fixed";  // "fixed" | "rayleigh"
  std::vector<std::int64_t> m_grid;
  std::vector<double> ns_grid;
  std::vector<std::string> quantities;
  std::string output;
  std::string sfg_csv;
  bool linear = false;
  NumericsConfig numerics;

  ScenarioParams scenario(std::int64_t m = 1) const;
  ScenarioParams fixed_scenario(std::int64_t m = 1) const;
  ScenarioParams rayleigh_scenario(std::int64_t m = 1) const;
};

// The document form of the defaults.
json default_settings();

// Expands {"start", "stop", "count", "spacing"} or an explicit array into M
// values. Throws UsageError on malformed input.
std::vector<std::int64_t> expand_m_grid(const json& spec);

// Parses a merged document. Unknown keys and wrong types raise UsageError.
Settings parse_settings(const json& doc);

json load_json_file(const std::filesystem::path& path);

// Applies "a.b=value" to the document. The value is read as JSON when it
// parses, otherwise as a string.
void apply_override(json& doc, const std::string& assignment);

// defaults <- config file <- overrides, in increasing precedence.
json merge_layers(const json& defaults, const json& config, const std::vector<std::string>& overrides);

json numerics_to_json(const NumericsConfig& cfg);

}  // namespace qicd::app
