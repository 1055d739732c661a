#pragma once

#include <optional>
#include <string>
#include <vector>

namespace gbwm {

// Minimal TSV table used for exported results (value tables, summaries).
// Numbers are written with %.17g so a round trip is bit-exact; absent values
// are written as "-".
struct TextTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::optional<double>>> rows;

  std::string to_string() const;
  void save(const std::string& path) const;
  static TextTable load(const std::string& path);
};

std::string format_double(double v);  // %.17g

}  // namespace gbwm
