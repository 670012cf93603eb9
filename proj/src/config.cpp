#include "qicd/app/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "qicd/errors.hpp"

namespace qicd::app {

namespace {

template <typename T>
T get_as(const json& doc, const std::string& key) {
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception&) {
    throw UsageError("config key '" + key + "' has the wrong type");
  }
}

void reject_unknown(const json& doc, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [key, _] : doc.items()) {
    if (!known.count(key)) throw UsageError("unknown config key '" + where + key + "'");
  }
}

NumericsConfig parse_numerics(const json& doc) {
  if (!doc.is_object()) throw UsageError("config key 'numerics' must be an object");
  reject_unknown(doc,
                 {"series_tol", "cutoff_tol", "window_sigmas", "quad_initial_nodes", "quad_max_nodes",
                  "quad_rel_tol", "kink_scan_points", "kappa_nodes"},
                 "numerics.");
  NumericsConfig c;
  auto real = [&](const char* k, double& out) {
    if (doc.contains(k)) out = get_as<double>(doc, k);
  };
  auto integer = [&](const char* k, int& out) {
    if (doc.contains(k)) out = get_as<int>(doc, k);
  };
  real("series_tol", c.series_tol);
  real("cutoff_tol", c.cutoff_tol);
  real("window_sigmas", c.window_sigmas);
  real("quad_rel_tol", c.quad_rel_tol);
  integer("quad_initial_nodes", c.quad_initial_nodes);
  integer("quad_max_nodes", c.quad_max_nodes);
  integer("kink_scan_points", c.kink_scan_points);
  integer("kappa_nodes", c.kappa_nodes);
  if (!(c.series_tol > 0 && c.cutoff_tol > 0 && c.quad_rel_tol > 0 && c.window_sigmas > 0)) {
    throw UsageError("numerics tolerances and window must be positive");
  }
  if (c.quad_initial_nodes < 1 || c.quad_max_nodes < c.quad_initial_nodes || c.kink_scan_points < 2 ||
      c.kappa_nodes < 1) {
    throw UsageError("numerics node counts are inconsistent");
  }
  return c;
}

}  // namespace

ScenarioParams Settings::scenario(std::int64_t m) const {
  return reflectivity == "rayleigh" ? rayleigh_scenario(m) : fixed_scenario(m);
}

ScenarioParams Settings::fixed_scenario(std::int64_t m) const {
  ScenarioParams p;
  p.n_s = n_s;
  p.n_e = n_e;
  p.reflectivity = FixedReflectivity{kappa};
  p.m = m;
  return p;
}

ScenarioParams Settings::rayleigh_scenario(std::int64_t m) const {
  ScenarioParams p = fixed_scenario(m);
  p.reflectivity = RayleighReflectivity{kappa_bar};
  return p;
}

json numerics_to_json(const NumericsConfig& c) {
  return {{"series_tol", c.series_tol},
          {"cutoff_tol", c.cutoff_tol},
          {"window_sigmas", c.window_sigmas},
          {"quad_initial_nodes", c.quad_initial_nodes},
          {"quad_max_nodes", c.quad_max_nodes},
          {"quad_rel_tol", c.quad_rel_tol},
          {"kink_scan_points", c.kink_scan_points},
          {"kappa_nodes", c.kappa_nodes}};
}

json default_settings() {
  const Settings s;
  return {{"n_s", s.n_s},
          {"n_e", s.n_e},
          {"kappa", s.kappa},
          {"kappa_bar", s.kappa_bar},
          {"reflectivity", s.reflectivity},
          {"linear", s.linear},
          {"numerics", numerics_to_json(s.numerics)}};
}

std::vector<std::int64_t> expand_m_grid(const json& spec) {
  std::vector<std::int64_t> out;
  if (spec.is_array()) {
    for (const auto& v : spec) {
      if (!v.is_number()) throw UsageError("m_grid entries must be numbers");
      const double d = v.get<double>();
      if (!(d >= 1.0) || d != std::floor(d) || d > 9e18) {
        throw UsageError("m_grid entries must be positive integers");
      }
      out.push_back(static_cast<std::int64_t>(d));
    }
  } else if (spec.is_object()) {
    reject_unknown(spec, {"start", "stop", "count", "spacing"}, "m_grid.");
    for (const char* k : {"start", "stop", "count"}) {
      if (!spec.contains(k)) throw UsageError(std::string("m_grid needs '") + k + "'");
    }
    const double start = get_as<double>(spec, "start");
    const double stop = get_as<double>(spec, "stop");
    const int count = get_as<int>(spec, "count");
    const std::string spacing = spec.contains("spacing") ? get_as<std::string>(spec, "spacing") : "geometric";
    if (!(start >= 1.0) || !(stop >= start) || count < 1) {
      throw UsageError("m_grid needs 1 <= start <= stop and count >= 1");
    }
    if (spacing != "geometric" && spacing != "linear") {
      throw UsageError("m_grid spacing must be 'geometric' or 'linear'");
    }
    for (int i = 0; i < count; ++i) {
      const double f = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
      const double v = spacing == "linear" ? start + (stop - start) * f : start * std::pow(stop / start, f);
      out.push_back(static_cast<std::int64_t>(std::llround(v)));
    }
  } else {
    throw UsageError("m_grid must be an array or a {start, stop, count, spacing} object");
  }
  if (out.empty()) throw UsageError("m_grid is empty");
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (out[i] <= out[i - 1]) throw UsageError("m_grid must be strictly increasing");
  }
  return out;
}

Settings parse_settings(const json& doc) {
  if (!doc.is_object()) throw UsageError("config must be a JSON object");
  reject_unknown(doc,
                 {"n_s", "n_e", "kappa", "kappa_bar", "reflectivity", "m_grid", "ns_grid", "quantities",
                  "output", "sfg_csv", "linear", "numerics"},
                 "");
  Settings s;
  if (doc.contains("n_s")) s.n_s = get_as<double>(doc, "n_s");
  if (doc.contains("n_e")) s.n_e = get_as<double>(doc, "n_e");
  if (doc.contains("kappa")) s.kappa = get_as<double>(doc, "kappa");
  if (doc.contains("kappa_bar")) s.kappa_bar = get_as<double>(doc, "kappa_bar");
  if (doc.contains("reflectivity")) s.reflectivity = get_as<std::string>(doc, "reflectivity");
  if (s.reflectivity != "fixed" && s.reflectivity != "rayleigh") {
    throw UsageError("reflectivity must be 'fixed' or 'rayleigh'");
  }
  if (doc.contains("m_grid")) s.m_grid = expand_m_grid(doc.at("m_grid"));
  if (doc.contains("ns_grid")) s.ns_grid = get_as<std::vector<double>>(doc, "ns_grid");
  if (doc.contains("quantities")) s.quantities = get_as<std::vector<std::string>>(doc, "quantities");
  if (doc.contains("output")) s.output = get_as<std::string>(doc, "output");
  if (doc.contains("sfg_csv")) s.sfg_csv = get_as<std::string>(doc, "sfg_csv");
  if (doc.contains("linear")) s.linear = get_as<bool>(doc, "linear");
  if (doc.contains("numerics")) s.numerics = parse_numerics(doc.at("numerics"));
  try {
    s.fixed_scenario().validate();
    s.rayleigh_scenario().validate();
  } catch (const DomainError& e) {
    throw UsageError(std::string("invalid scenario: ") + e.what());
  }
  for (double ns : s.ns_grid) {
    if (!(ns > 0.0) || !std::isfinite(ns)) throw UsageError("ns_grid entries must be positive");
  }
  return s;
}

json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw UsageError("--set expects key=value, got '" + assignment + "'");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;

  json* node = &doc;
  std::size_t pos = 0;
  for (;;) {
    const auto dot = key.find('.', pos);
    const std::string part = key.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
    if (part.empty()) throw UsageError("--set key '" + key + "' is malformed");
    if (!node->is_object()) *node = json::object();
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    pos = dot + 1;
  }
}

json merge_layers(const json& defaults, const json& config, const std::vector<std::string>& overrides) {
  json doc = defaults;
  if (!config.is_null()) {
    if (!config.is_object()) throw UsageError("config must be a JSON object");
    // Grids given as arrays replace object-form defaults rather than merge.
    for (const auto& [key, value] : config.items()) {
      if (value.is_object() && doc.contains(key) && doc[key].is_object()) {
        doc[key].merge_patch(value);
      } else {
        doc[key] = value;
      }
    }
  }
  for (const auto& o : overrides) apply_override(doc, o);
  return doc;
}

}  // namespace qicd::app
