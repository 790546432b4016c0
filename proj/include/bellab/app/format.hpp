#pragma once

// Locale-independent text output: shortest round-trip decimals, CSV tables
// and pretty-printed JSON.

#include <initializer_list>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace bellab::app {

/// Shortest decimal that parses back to `x`; "nan"/"inf" for non-finite values.
std::string format_number(double x);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  /// Empty optionals become empty cells.
  void add_row(std::initializer_list<std::optional<double>> cells);
  void add_text_row(const std::vector<std::string>& cells);

  std::size_t rows() const { return rows_; }
  std::string str() const { return text_; }

 private:
  std::size_t columns_;
  std::size_t rows_ = 0;
  std::string text_;
};

/// Two-space indented JSON with a trailing newline.
std::string json_text(const nlohmann::json& doc);

}  // namespace bellab::app
