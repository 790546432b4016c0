#include "bellab/app/format.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <stdexcept>

namespace bellab::app {

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  if (ec != std::errc{}) throw std::runtime_error("number formatting failed");
  return std::string(buf.data(), end);
}

CsvTable::CsvTable(std::vector<std::string> header) : columns_(header.size()) { add_text_row(header); rows_ = 0; }

void CsvTable::add_row(std::initializer_list<std::optional<double>> cells) {
  std::vector<std::string> text;
  text.reserve(cells.size());
  for (const auto& c : cells) text.push_back(c ? format_number(*c) : std::string());
  add_text_row(text);
}

void CsvTable::add_text_row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_) throw std::logic_error("CSV row width does not match the header");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) text_ += ',';
    text_ += cells[i];
  }
  text_ += '\n';
  ++rows_;
}

std::string json_text(const nlohmann::json& doc) { return doc.dump(2) + "\n"; }

}  // namespace bellab::app
