#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

#include "json.hpp"

namespace fsfbm::io {

// Shortest round-trip decimal form, locale independent.
std::string format_double(double x);

// Numeric-only CSV: comma separator, '.' decimal point, header row, LF line
// endings, no quoting.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);
  void row(std::initializer_list<double> values);
  void row(const std::vector<double>& values);
  void raw_row(const std::vector<std::string>& cells);
  const std::string& str() const { return buf_; }

 private:
  std::string buf_;
  std::size_t columns_;
};

// Write via temp file + rename so readers never observe a partial artifact.
void atomic_write(const std::string& path, const std::string& contents);

// FNV-1a over the canonical (sorted-key) JSON dump; key order never matters.
std::string config_hash(const nlohmann::json& config);

}  // namespace fsfbm::io
