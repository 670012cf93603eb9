#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "qicd/app/config.hpp"

namespace qicd::app {

const std::vector<std::string>& figure_ids();

// Figure-specific defaults, layered over default_settings().
json figure_defaults(const std::string& id);

// Writes the CSV files behind one figure into out_dir and returns their paths.
// `doc` is the merged settings document; it is recorded in every header.
std::vector<std::filesystem::path> run_figure(const std::string& id, const json& doc,
                                              const std::filesystem::path& out_dir);

}  // namespace qicd::app
