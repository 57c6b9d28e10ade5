#pragma once

#include <array>
#include <vector>

namespace gmsfem {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Axis-aligned block of fine cells [i0, i1) x [j0, j1); its nodes are
/// [i0, i1] x [j0, j1]. Every region in this code (neighborhoods, coarse
/// blocks, overlapping subdomains, study windows) is one of these.
struct CellBox {
  int i0 = 0, i1 = 0, j0 = 0, j1 = 0;

  int cells_x() const { return i1 - i0; }
  int cells_y() const { return j1 - j0; }
  int cell_count() const { return cells_x() * cells_y(); }
  int nodes_x() const { return cells_x() + 1; }
  int nodes_y() const { return cells_y() + 1; }
  int node_count() const { return nodes_x() * nodes_y(); }

  bool contains_node(int i, int j) const { return i >= i0 && i <= i1 && j >= j0 && j <= j1; }
  bool contains_cell(int i, int j) const { return i >= i0 && i < i1 && j >= j0 && j < j1; }
  bool contains(const CellBox& other) const {
    return other.i0 >= i0 && other.i1 <= i1 && other.j0 >= j0 && other.j1 <= j1;
  }
  /// Box-local node index of global node (i, j); requires contains_node.
  int local_node(int i, int j) const { return (j - j0) * nodes_x() + (i - i0); }
  int local_i(int local) const { return i0 + local % nodes_x(); }
  int local_j(int local) const { return j0 + local / nodes_x(); }
  bool on_boundary(int local) const {
    const int i = local_i(local), j = local_j(local);
    return i == i0 || i == i1 || j == j0 || j == j1;
  }
  /// Grown by `layers` cells on every side, clipped to [0,nx] x [0,ny].
  CellBox padded(int layers, int nx, int ny) const;

  bool operator==(const CellBox&) const = default;
};

/// Structured P1 triangulation of the unit square: nx*ny squares, each split
/// along its bottom-left to top-right diagonal. Nodes are row-major.
class FineMesh {
 public:
  FineMesh(int nx, int ny);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double hx() const { return 1.0 / nx_; }
  double hy() const { return 1.0 / ny_; }
  int node_count() const { return (nx_ + 1) * (ny_ + 1); }
  int cell_count() const { return nx_ * ny_; }
  int triangle_count() const { return 2 * nx_ * ny_; }

  int node(int i, int j) const { return j * (nx_ + 1) + i; }
  int node_i(int n) const { return n % (nx_ + 1); }
  int node_j(int n) const { return n / (nx_ + 1); }
  int cell(int i, int j) const { return j * nx_ + i; }
  Point coord(int n) const { return node_coords_[n]; }

  const std::vector<Point>& node_coords() const { return node_coords_; }
  /// Triangle t lives in cell t/2; even t is the lower-right half.
  const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
  const std::vector<int>& boundary_nodes() const { return boundary_nodes_; }
  bool is_boundary(int n) const {
    const int i = node_i(n), j = node_j(n);
    return i == 0 || j == 0 || i == nx_ || j == ny_;
  }
  CellBox whole() const { return {0, nx_, 0, ny_}; }
  /// Global node index of box-local node `local`.
  int global_node(const CellBox& box, int local) const {
    return node(box.local_i(local), box.local_j(local));
  }

 private:
  int nx_, ny_;
  std::vector<Point> node_coords_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<int> boundary_nodes_;
};

FineMesh build_fine_mesh(int nx, int ny);

/// Coarse grid of Nx x Ny square blocks laid over a fine mesh.
class CoarseMesh {
 public:
  CoarseMesh(const FineMesh& fine, int Nx, int Ny, int pad = 0);

  int Nx() const { return Nx_; }
  int Ny() const { return Ny_; }
  int block_cells_x() const { return bx_; }
  int block_cells_y() const { return by_; }
  int fine_nx() const { return nx_; }
  int fine_ny() const { return ny_; }

  int node_count() const { return (Nx_ + 1) * (Ny_ + 1); }  // N_v
  int block_count() const { return Nx_ * Ny_; }
  int node(int I, int J) const { return J * (Nx_ + 1) + I; }
  int node_I(int n) const { return n % (Nx_ + 1); }
  int node_J(int n) const { return n / (Nx_ + 1); }
  int block(int I, int J) const { return J * Nx_ + I; }
  Point node_coord(int n) const;
  bool is_boundary_node(int n) const {
    const int I = node_I(n), J = node_J(n);
    return I == 0 || J == 0 || I == Nx_ || J == Ny_;
  }
  /// Coarse nodes not on the domain boundary, ascending.
  const std::vector<int>& interior_nodes() const { return interior_nodes_; }

  /// Fine cells of coarse block K.
  CellBox block_box(int K) const;
  /// Coarse blocks whose closure contains coarse node n (1, 2 or 4 of them).
  std::vector<int> neighborhood_blocks(int n) const;
  /// omega_n: union of the blocks touching node n.
  CellBox neighborhood(int n) const;
  /// omega_n padded by `pad` fine-cell rings (clipped).
  CellBox extended_neighborhood(int n) const;
  /// The four corner coarse nodes of block K (ll, lr, ul, ur).
  std::array<int, 4> block_corners(int K) const;
  /// Fine-grid cell box of a coarse block containing fine cell (i, j).
  int block_of_cell(int i, int j) const { return block(i / bx_, j / by_); }
  int pad() const { return pad_; }

 private:
  int nx_, ny_, Nx_, Ny_, bx_, by_, pad_;
  std::vector<int> interior_nodes_;
};

CoarseMesh build_coarse_mesh(const FineMesh& fine, int Nx, int Ny, int pad = 0);

/// Overlapping subdomains D'_k: coarse block k grown by `layers` fine cells.
struct OverlapDecomposition {
  int layers = 1;
  std::vector<CellBox> subdomains;
  /// Global fine nodes of each D'_k strictly inside the box (zero trace on its boundary).
  std::vector<std::vector<int>> interior_nodes;
};

OverlapDecomposition build_overlap(const FineMesh& fine, const CoarseMesh& coarse, int layers);

}  // namespace gmsfem
