#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace qicd::app {

// ISO-8601 UTC time of the run. SOURCE_DATE_EPOCH, when set, pins it so that
// repeated runs give identical files.
std::string run_timestamp();

// Shortest round-trip decimal for a finite double. Non-finite values are
// rejected because no emitted cell may be NaN.
std::string format_real(double v);

// Linear companion of a log cell; empty when exp(v) underflows.
std::string format_linear(double log_value);

struct CsvMetadata {
  nlohmann::json params;
  nlohmann::json numerics;
  std::vector<std::string> notes;
};

// Comma-separated file with a '#'-prefixed provenance header. Each row is
// flushed as soon as it is written.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const CsvMetadata& meta,
            std::vector<std::string> columns);

  void write_row(const std::vector<std::string>& cells);
  const std::filesystem::path& path() const { return path_; }
  const std::vector<std::string>& columns() const { return columns_; }

 private:
  std::filesystem::path path_;
  std::vector<std::string> columns_;
  std::ofstream out_;
};

struct CsvTable {
  std::vector<std::string> header_comments;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  // Index of a column; throws UsageError if absent.
  std::size_t column(const std::string& name) const;
};

// Reads a file in the dialect written by CsvWriter.
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace qicd::app
