#include "gbwm/util/text_table.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "gbwm/util/errors.hpp"

namespace gbwm {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string TextTable::to_string() const {
  std::ostringstream out;
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (c) out << '\t';
    out << columns[c];
  }
  out << '\n';
  for (const auto& row : rows) {
    if (row.size() != columns.size())
      throw NumericError("TextTable: row width does not match header");
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << '\t';
      out << (row[c] ? format_double(*row[c]) : std::string("-"));
    }
    out << '\n';
  }
  return out.str();
}

void TextTable::save(const std::string& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot open for writing: " + path);
  f << to_string();
  if (!f) throw InputError("write failed: " + path);
}

TextTable TextTable::load(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot open: " + path);
  TextTable t;
  std::string line;
  if (!std::getline(f, line)) throw InputError("empty table file: " + path);
  std::istringstream hs(line);
  std::string cell;
  while (std::getline(hs, cell, '\t')) t.columns.push_back(cell);
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::vector<std::optional<double>> row;
    std::istringstream rs(line);
    while (std::getline(rs, cell, '\t')) {
      if (cell == "-") {
        row.push_back(std::nullopt);
      } else {
        char* end = nullptr;
        double v = std::strtod(cell.c_str(), &end);
        if (end == cell.c_str()) throw InputError("bad number in table: " + cell);
        row.push_back(v);
      }
    }
    if (row.size() != t.columns.size())
      throw InputError("ragged row in table file: " + path);
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace gbwm
