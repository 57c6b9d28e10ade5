#include "gmsfem/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "gmsfem/error.hpp"

namespace gmsfem {

void Table::add(std::vector<std::string> row) {
  if (row.size() != header.size()) throw ConfigError("table row width does not match its header");
  rows.push_back(std::move(row));
}

std::string Table::to_csv() const {
  std::string out;
  auto line = [&out](const std::vector<std::string>& cells) {
    for (size_t k = 0; k < cells.size(); ++k) {
      if (k) out += ',';
      out += cells[k];
    }
    out += '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out;
}

void Table::write(const std::string& path) const { write_text(path, to_csv()); }

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10e", v);
  return buf;
}

std::string fmt(int v) { return std::to_string(v); }

Table eigenvalue_table(const std::vector<ReducedSpace>& spaces, const std::string& hash) {
  Table t{{"node_index", "rank", "lambda", "config_hash"}, {}};
  for (const auto& s : spaces) {
    for (int r = 0; r < s.lambda.size(); ++r) t.add({fmt(s.node), fmt(r + 1), fmt(s.lambda[r]), hash});
  }
  return t;
}

Table pcg_table(const PcgReport& report, const std::string& hash) {
  Table t{{"iter", "relative_residual", "config_hash"}, {}};
  for (size_t k = 0; k < report.residuals.size(); ++k) {
    t.add({fmt(static_cast<int>(k)), fmt(report.residuals[k]), hash});
  }
  return t;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  out << text;
  if (!out) throw ConfigError("failed writing " + path);
}

}  // namespace gmsfem
