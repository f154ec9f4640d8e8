// SPDX-License-Identifier: Apache-2.0
#include "scion/cli/output.hpp"

#include <cmath>
#include <filesystem>
#include <stdexcept>

#include "scion/io/format.hpp"

namespace scion::cli {

CsvWriter::CsvWriter(const std::string& path, std::vector<std::string> columns)
    : f_(path, std::ios::binary | std::ios::trunc), path_(path), ncols_(columns.size()) {
  if (!f_) throw std::runtime_error("cannot open '" + path + "' for writing");
  f_ << "# schema=" << kCsvSchemaVersion << '\n';
  for (const auto& c : columns) cell(c);
  end_row();
}

void CsvWriter::put(const std::string& s) {
  if (col_ >= ncols_) throw std::logic_error("csv row has too many cells");
  if (col_ > 0) f_ << ',';
  f_ << s;
  ++col_;
}

CsvWriter& CsvWriter::cell(double v) {
  put(format_double(v));
  return *this;
}
CsvWriter& CsvWriter::cell(std::size_t v) {
  put(std::to_string(v));
  return *this;
}
CsvWriter& CsvWriter::cell(bool v) {
  put(v ? "true" : "false");
  return *this;
}
CsvWriter& CsvWriter::cell(const std::string& v) {
  if (v.find_first_of(",\"\n") != std::string::npos) {
    std::string q = "\"";
    for (char c : v) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    put(q + "\"");
  } else {
    put(v);
  }
  return *this;
}

void CsvWriter::end_row() {
  if (col_ != ncols_) throw std::logic_error("csv row has too few cells");
  f_ << '\n';
  col_ = 0;
}

void CsvWriter::close() {
  f_.close();
  if (!f_) throw std::runtime_error("failed writing '" + path_ + "'");
}

void append_jsonl(const std::string& path, const nlohmann::json& record) {
  std::ofstream f(path, std::ios::binary | std::ios::app);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  f << record.dump() << '\n';
  if (!f) throw std::runtime_error("failed writing '" + path + "'");
}

std::string output_stem(const std::string& dir, const std::string& command, const std::string& hash,
                        std::uint64_t seed) {
  std::filesystem::create_directories(dir.empty() ? "." : dir);
  return (std::filesystem::path(dir.empty() ? "." : dir) / (command + "_" + hash + "_" + std::to_string(seed)))
      .string();
}

nlohmann::json json_number(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

}  // namespace scion::cli
