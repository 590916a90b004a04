// Copyright 2026 The wmbench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// -----------------------------------------------------------------------------

// CSV tables with a header row, LF line endings and locale-independent
// number formatting.

#ifndef WMBENCH_CSV_HPP_
#define WMBENCH_CSV_HPP_

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "wmbench/image_io.hpp"

namespace wmbench {

// Shortest decimal form that parses back to the same double.
inline std::string FormatDouble(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  if (res.ec != std::errc()) throw std::runtime_error("FormatDouble: to_chars failed");
  return std::string(buf, res.ptr);
}

inline std::string FormatInt(std::int64_t v) { return std::to_string(v); }

inline std::string FormatBool(bool v) { return v ? "true" : "false"; }

// Quotes a field when it holds a comma, quote or line break.
inline std::string CsvField(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {
    if (header_.empty()) throw std::invalid_argument("CsvTable: empty header");
  }

  void AddRow(std::vector<std::string> row) {
    if (row.size() != header_.size()) {
      throw std::invalid_argument("CsvTable: row has " + std::to_string(row.size()) +
                                  " fields, header has " + std::to_string(header_.size()));
    }
    rows_.push_back(std::move(row));
  }

  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }

  std::string Render() const {
    std::string out;
    auto line = [&](const std::vector<std::string>& fields) {
      for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out += ',';
        out += CsvField(fields[i]);
      }
      out += '\n';
    };
    line(header_);
    for (const auto& r : rows_) line(r);
    return out;
  }

  void Write(const std::filesystem::path& path) const {
    const std::string text = Render();
    WriteFileAtomic(path, text.data(), text.size());
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace wmbench

#endif  // WMBENCH_CSV_HPP_
