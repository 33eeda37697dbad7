// Copyright 2026 The fewlat Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Minimal CSV plumbing shared by every file schema: comma separated, no
// quoting, `.` decimal separator, numbers written with 9 significant digits.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace fewlat::csv {

struct Row {
  int line = 0;  // 1-based line number in the source file
  std::vector<std::string> fields;
};

struct Table {
  std::vector<std::string> header;
  std::vector<Row> rows;
};

// Parses CSV text. Blank lines are skipped; a trailing '\r' is stripped.
// Every row must have as many fields as the header.
Table parse(std::string_view text, const std::string& source_name);

// Reads and parses a file. An empty file yields an empty header and no rows.
Table read_file(const std::filesystem::path& path);

// Throws ParseError unless `table.header` equals `expected`.
void require_header(const Table& table, const std::vector<std::string>& expected,
                    const std::string& source_name);

double parse_double(const std::string& field, const Row& row,
                    const std::string& source_name);
long long parse_int(const std::string& field, const Row& row,
                    const std::string& source_name);

std::string format_number(double value);

class Writer {
 public:
  explicit Writer(const std::vector<std::string>& header);

  Writer& field(std::string_view text);
  Writer& field(double value);
  Writer& field(long long value);
  Writer& field(int value) { return field(static_cast<long long>(value)); }
  Writer& field(std::size_t value) {
    return field(static_cast<long long>(value));
  }
  void end_row();

  const std::string& str() const { return out_; }
  void save(const std::filesystem::path& path) const;

 private:
  std::string out_;
  bool row_open_ = false;
};

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace fewlat::csv
