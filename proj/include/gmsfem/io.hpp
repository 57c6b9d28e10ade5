#pragma once

#include <string>
#include <vector>

#include "gmsfem/solvers.hpp"
#include "gmsfem/spaces.hpp"

namespace gmsfem {

/// Header plus string rows. Numbers go through fmt so output is byte-stable.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row);
  std::string to_csv() const;
  void write(const std::string& path) const;
};

/// %.10e, with "inf" and "nan" spelled out.
std::string fmt(double v);
std::string fmt(int v);

/// `node_index,rank,lambda` for every stored eigenvalue (rank from 1).
Table eigenvalue_table(const std::vector<ReducedSpace>& spaces, const std::string& hash);
/// `iter,relative_residual` from a PCG run.
Table pcg_table(const PcgReport& report, const std::string& hash);

void write_text(const std::string& path, const std::string& text);

}  // namespace gmsfem
