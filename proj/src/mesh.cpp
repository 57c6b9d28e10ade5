#include "gmsfem/mesh.hpp"

#include <algorithm>
#include <string>

#include "gmsfem/error.hpp"

namespace gmsfem {

CellBox CellBox::padded(int layers, int nx, int ny) const {
  return {std::max(0, i0 - layers), std::min(nx, i1 + layers), std::max(0, j0 - layers),
          std::min(ny, j1 + layers)};
}

FineMesh::FineMesh(int nx, int ny) : nx_(nx), ny_(ny) {
  if (nx < 1 || ny < 1) {
    throw ConfigError("fine mesh needs at least one cell per axis, got " + std::to_string(nx) +
                      "x" + std::to_string(ny));
  }
  node_coords_.reserve(node_count());
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      node_coords_.push_back({static_cast<double>(i) / nx, static_cast<double>(j) / ny});
      if (i == 0 || j == 0 || i == nx || j == ny) boundary_nodes_.push_back(node(i, j));
    }
  }
  triangles_.reserve(triangle_count());
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int bl = node(i, j), br = node(i + 1, j), tl = node(i, j + 1), tr = node(i + 1, j + 1);
      triangles_.push_back({bl, br, tr});
      triangles_.push_back({bl, tr, tl});
    }
  }
}

FineMesh build_fine_mesh(int nx, int ny) { return FineMesh(nx, ny); }

CoarseMesh::CoarseMesh(const FineMesh& fine, int Nx, int Ny, int pad)
    : nx_(fine.nx()), ny_(fine.ny()), Nx_(Nx), Ny_(Ny), pad_(pad) {
  if (Nx < 1 || Ny < 1) throw ConfigError("coarse mesh needs at least one block per axis");
  if (nx_ % Nx != 0 || ny_ % Ny != 0) {
    throw ConfigError("coarse grid " + std::to_string(Nx) + "x" + std::to_string(Ny) +
                      " does not divide fine grid " + std::to_string(nx_) + "x" +
                      std::to_string(ny_));
  }
  if (pad < 0) throw ConfigError("neighborhood padding must be non-negative");
  bx_ = nx_ / Nx;
  by_ = ny_ / Ny;
  for (int n = 0; n < node_count(); ++n) {
    if (!is_boundary_node(n)) interior_nodes_.push_back(n);
  }
}

CoarseMesh build_coarse_mesh(const FineMesh& fine, int Nx, int Ny, int pad) {
  return CoarseMesh(fine, Nx, Ny, pad);
}

Point CoarseMesh::node_coord(int n) const {
  return {static_cast<double>(node_I(n)) / Nx_, static_cast<double>(node_J(n)) / Ny_};
}

CellBox CoarseMesh::block_box(int K) const {
  const int I = K % Nx_, J = K / Nx_;
  return {I * bx_, (I + 1) * bx_, J * by_, (J + 1) * by_};
}

std::vector<int> CoarseMesh::neighborhood_blocks(int n) const {
  const int I = node_I(n), J = node_J(n);
  std::vector<int> blocks;
  for (int BJ = J - 1; BJ <= J; ++BJ) {
    for (int BI = I - 1; BI <= I; ++BI) {
      if (BI >= 0 && BI < Nx_ && BJ >= 0 && BJ < Ny_) blocks.push_back(block(BI, BJ));
    }
  }
  return blocks;
}

CellBox CoarseMesh::neighborhood(int n) const {
  const int I = node_I(n), J = node_J(n);
  return {std::max(0, I - 1) * bx_, std::min(Nx_, I + 1) * bx_, std::max(0, J - 1) * by_,
          std::min(Ny_, J + 1) * by_};
}

CellBox CoarseMesh::extended_neighborhood(int n) const {
  return neighborhood(n).padded(pad_, nx_, ny_);
}

std::array<int, 4> CoarseMesh::block_corners(int K) const {
  const int I = K % Nx_, J = K / Nx_;
  return {node(I, J), node(I + 1, J), node(I, J + 1), node(I + 1, J + 1)};
}

OverlapDecomposition build_overlap(const FineMesh& fine, const CoarseMesh& coarse, int layers) {
  if (layers < 1) throw ConfigError("overlap needs at least one fine-cell layer");
  OverlapDecomposition dec;
  dec.layers = layers;
  for (int K = 0; K < coarse.block_count(); ++K) {
    const CellBox box = coarse.block_box(K).padded(layers, fine.nx(), fine.ny());
    dec.subdomains.push_back(box);
    std::vector<int> inner;
    for (int j = box.j0 + 1; j < box.j1; ++j) {
      for (int i = box.i0 + 1; i < box.i1; ++i) inner.push_back(fine.node(i, j));
    }
    dec.interior_nodes.push_back(std::move(inner));
  }
  return dec;
}

}  // namespace gmsfem
