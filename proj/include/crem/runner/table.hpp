// Copyright 2026 The CREM Sampling Authors
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

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

namespace crem::runner {

/// An empty cell, an integer, a real, a string or a flag.
using Cell = std::variant<std::monostate, std::int64_t, std::uint64_t, double, std::string, bool>;

/// Shortest round-trip decimal form; "nan", "inf" and "-inf" otherwise.
std::string format_number(double x);
std::string format_cell(const Cell& c);

class MissingColumn : public std::runtime_error {
 public:
  explicit MissingColumn(const std::string& name)
      : std::runtime_error("report has no column '" + name + "'"), name_(name) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  bool empty() const { return rows.empty(); }
  bool has_column(std::string_view name) const;
  std::size_t column_index(std::string_view name) const;  // throws MissingColumn
  void add_row(std::vector<Cell> row);                    // checks the width
  /// Numeric view of a column; empty and non-numeric cells become NaN.
  std::vector<double> numbers(std::string_view name) const;
  std::vector<std::string> strings(std::string_view name) const;
};

/// CSV with a leading "# ..." header line.
std::string to_csv(const Table& table, std::string_view header);
/// {"header": ..., "columns": [...], "rows": [[...], ...]}.
nlohmann::json to_json(const Table& table, std::string_view header);

/// Reads CSV produced by to_csv: '#' lines are skipped, cells that parse as
/// numbers become doubles, the rest stay strings.
Table parse_csv(std::string_view text);

}  // namespace crem::runner
