// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

namespace scion::cli {

inline constexpr int kCsvSchemaVersion = 1;

/// CSV with a `# schema=1` first line, then a header row. Doubles use the
/// shortest round-trip form so equal runs give byte-identical files.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, std::vector<std::string> columns);

  CsvWriter& cell(double v);
  CsvWriter& cell(std::size_t v);
  CsvWriter& cell(bool v);
  CsvWriter& cell(const std::string& v);
  void end_row();
  void close();

 private:
  void put(const std::string& s);

  std::ofstream f_;
  std::string path_;
  std::size_t ncols_;
  std::size_t col_ = 0;
};

/// Appends one compact JSON object per line.
void append_jsonl(const std::string& path, const nlohmann::json& record);

/// `<dir>/<command>_<hash>_<seed>` without extension; creates `dir`.
std::string output_stem(const std::string& dir, const std::string& command, const std::string& hash,
                        std::uint64_t seed);

/// JSON number that stays valid for NaN/inf (emitted as strings).
nlohmann::json json_number(double v);

}  // namespace scion::cli
