#include "qicd/app/csv_writer.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <limits>
#include <sstream>

#include "qicd/errors.hpp"
#include "qicd/version.hpp"

namespace qicd::app {

std::string run_timestamp() {
  std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch && *epoch) {
    char* end = nullptr;
    const long long v = std::strtoll(epoch, &end, 10);
    if (end && *end == '\0') t = static_cast<std::time_t>(v);
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string format_real(double v) {
  if (!std::isfinite(v)) throw std::logic_error("attempt to emit a non-finite value");
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string format_linear(double log_value) {
  if (log_value == -std::numeric_limits<double>::infinity()) return "0";
  const double v = std::exp(log_value);
  if (!(v >= std::numeric_limits<double>::min())) return "";
  return format_real(v);
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const CsvMetadata& meta,
                     std::vector<std::string> columns)
    : path_(path), columns_(std::move(columns)) {
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  out_.open(path_, std::ios::binary | std::ios::trunc);
  if (!out_) throw UsageError("cannot write '" + path_.string() + "'");
  out_ << "# qi-cd-eval " << kVersion << '\n';
  out_ << "# generated: " << run_timestamp() << '\n';
  out_ << "# params: " << meta.params.dump() << '\n';
  out_ << "# numerics: " << meta.numerics.dump() << '\n';
  for (const auto& n : meta.notes) out_ << "# note: " << n << '\n';
  for (std::size_t i = 0; i < columns_.size(); ++i) out_ << (i ? "," : "") << columns_[i];
  out_ << '\n';
  out_.flush();
}

void CsvWriter::write_row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_.size()) {
    throw std::logic_error("row width " + std::to_string(cells.size()) + " != " +
                           std::to_string(columns_.size()) + " columns in " + path_.string());
  }
  for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
  out_ << '\n';
  out_.flush();
  if (!out_) throw std::runtime_error("write failed on '" + path_.string() + "'");
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  throw UsageError("column '" + name + "' not found");
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open '" + path.string() + "'");
  CsvTable t;
  std::string line;
  std::size_t line_no = 0;
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!s.empty() && s.back() == ',') cells.emplace_back();
    return cells;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      t.header_comments.push_back(line);
      continue;
    }
    auto cells = split(line);
    if (t.columns.empty()) {
      t.columns = std::move(cells);
      continue;
    }
    if (cells.size() != t.columns.size()) {
      throw UsageError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(t.columns.size()) + " fields, found " + std::to_string(cells.size()));
    }
    t.rows.push_back(std::move(cells));
  }
  if (t.columns.empty()) throw UsageError(path.string() + ": no header row");
  return t;
}

}  // namespace qicd::app
