#include <string>

#include "gmsfem/coupling.hpp"
#include "gmsfem/error.hpp"

namespace gmsfem {

namespace {

struct SparseVec {
  std::vector<int> idx;
  std::vector<double> val;
  void add(int i, double v) {
    idx.push_back(i);
    val.push_back(v);
  }
};

// trips += w * a b^T
void outer(std::vector<Triplet>& trips, double w, const SparseVec& a, const SparseVec& b) {
  for (size_t p = 0; p < a.idx.size(); ++p) {
    for (size_t q = 0; q < b.idx.size(); ++q) trips.emplace_back(a.idx[p], b.idx[q], w * a.val[p] * b.val[q]);
  }
}

// Dof of global fine node (i, j) in block K's copy.
int broken_dof(const CoarseMesh& coarse, const BrokenSpace& space, int K, int i, int j) {
  return space.offsets[K] + coarse.block_box(K).local_node(i, j);
}

struct Side {
  int block;
  int triangle;
};

// One fine segment of an interior coarse edge: endpoints (i0,j0)-(i1,j1),
// normal n pointing from `minus` to `plus`.
void add_segment(std::vector<Triplet>& trips, const FineMesh& mesh, const CoarseMesh& coarse,
                 const BrokenSpace& space, const CoefficientField& kappa, const DGParameters& params,
                 int i0, int j0, int i1, int j1, double nx, double ny, Side minus, Side plus, double edge_len) {
  const double seg = std::hypot((i1 - i0) * mesh.hx(), (j1 - j0) * mesh.hy());
  auto normal_k = [&](int t) {
    const int c = t / 2;
    return nx * nx * kappa.xx(c) + ny * ny * kappa.yy(c);
  };
  const double km = normal_k(minus.triangle), kp = normal_k(plus.triangle);
  const double kt = 2.0 * km * kp / (km + kp);

  SparseVec jump[2];
  const int ends[2][2] = {{i0, j0}, {i1, j1}};
  for (int e = 0; e < 2; ++e) {
    jump[e].add(broken_dof(coarse, space, minus.block, ends[e][0], ends[e][1]), 1.0);
    jump[e].add(broken_dof(coarse, space, plus.block, ends[e][0], ends[e][1]), -1.0);
  }
  SparseVec flux;
  for (const Side& s : {minus, plus}) {
    const auto g = triangle_gradients(mesh, s.triangle);
    for (int a = 0; a < 3; ++a) {
      const int v = mesh.triangles()[s.triangle][a];
      flux.add(broken_dof(coarse, space, s.block, mesh.node_i(v), mesh.node_j(v)),
               0.5 * (g(a, 0) * nx + g(a, 1) * ny));
    }
  }
  SparseVec jump_sum;
  for (int e = 0; e < 2; ++e) {
    for (size_t p = 0; p < jump[e].idx.size(); ++p) jump_sum.add(jump[e].idx[p], jump[e].val[p]);
  }
  // -int kt {d_n u}[v] - int kt {d_n v}[u]; [w] is linear along the segment.
  outer(trips, -kt * seg / 2.0, jump_sum, flux);
  outer(trips, -kt * seg / 2.0, flux, jump_sum);
  // (delta / l_E) int kt [u][v] with the exact P1 segment mass.
  const double pen = params.penalty / edge_len * kt * seg / 6.0;
  for (int e = 0; e < 2; ++e) {
    for (int f = 0; f < 2; ++f) outer(trips, pen * (e == f ? 2.0 : 1.0), jump[e], jump[f]);
  }
}

}  // namespace

BrokenSpace broken_space(const CoarseMesh& coarse) {
  BrokenSpace s;
  for (int K = 0; K < coarse.block_count(); ++K) {
    s.offsets.push_back(s.dim);
    s.dim += coarse.block_box(K).node_count();
  }
  return s;
}

SparseMatrix assemble_dg_fine(const FineMesh& mesh, const CoarseMesh& coarse,
                              const CoefficientField& kappa, const DGParameters& params) {
  if (!(params.penalty > 0.0)) throw ConfigError("DG penalty must be positive");
  kappa.check_compatible(mesh);
  const BrokenSpace space = broken_space(coarse);
  std::vector<Triplet> trips;
  for (int K = 0; K < coarse.block_count(); ++K) {
    const SparseMatrix A = assemble_stiffness(mesh, kappa, coarse.block_box(K), Execution::serial);
    for (int k = 0; k < A.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(A, k); it; ++it) {
        trips.emplace_back(space.offsets[K] + it.row(), space.offsets[K] + k, it.value());
      }
    }
  }
  const int bx = coarse.block_cells_x(), by = coarse.block_cells_y();
  const double Hx = static_cast<double>(bx) * mesh.hx(), Hy = static_cast<double>(by) * mesh.hy();
  // Vertical edges x = I*bx between blocks (I-1, J) and (I, J).
  for (int J = 0; J < coarse.Ny(); ++J) {
    for (int I = 1; I < coarse.Nx(); ++I) {
      const int gi = I * bx;
      for (int gj = J * by; gj < (J + 1) * by; ++gj) {
        const Side left{coarse.block(I - 1, J), 2 * mesh.cell(gi - 1, gj)};
        const Side right{coarse.block(I, J), 2 * mesh.cell(gi, gj) + 1};
        add_segment(trips, mesh, coarse, space, kappa, params, gi, gj, gi, gj + 1, 1.0, 0.0, left, right, Hy);
      }
    }
  }
  // Horizontal edges y = J*by between blocks (I, J-1) and (I, J).
  for (int J = 1; J < coarse.Ny(); ++J) {
    for (int I = 0; I < coarse.Nx(); ++I) {
      const int gj = J * by;
      for (int gi = I * bx; gi < (I + 1) * bx; ++gi) {
        const Side below{coarse.block(I, J - 1), 2 * mesh.cell(gi, gj - 1) + 1};
        const Side above{coarse.block(I, J), 2 * mesh.cell(gi, gj)};
        add_segment(trips, mesh, coarse, space, kappa, params, gi, gj, gi + 1, gj, 0.0, 1.0, below, above, Hx);
      }
    }
  }
  SparseMatrix F(space.dim, space.dim);
  F.setFromTriplets(trips.begin(), trips.end());
  return F;
}

namespace {

SparseMatrix block_diagonal(const CoarseMesh& coarse, const BrokenSpace& space,
                            const std::vector<Matrix>& bases) {
  if (static_cast<int>(bases.size()) != coarse.block_count()) {
    throw ConfigError("DG needs one basis per coarse block");
  }
  std::vector<Triplet> trips;
  int col = 0;
  for (int K = 0; K < coarse.block_count(); ++K) {
    if (bases[K].rows() != coarse.block_box(K).node_count()) {
      throw ConfigError("DG basis of block " + std::to_string(K) + " has wrong row count");
    }
    for (int j = 0; j < bases[K].cols(); ++j) {
      for (int l = 0; l < bases[K].rows(); ++l) {
        if (bases[K](l, j) != 0.0) trips.emplace_back(space.offsets[K] + l, col + j, bases[K](l, j));
      }
    }
    col += static_cast<int>(bases[K].cols());
  }
  SparseMatrix Phi(space.dim, col);
  Phi.setFromTriplets(trips.begin(), trips.end());
  return Phi;
}

Vector broken_load(const FineMesh& mesh, const CoarseMesh& coarse, const BrokenSpace& space, double f) {
  Vector b = Vector::Zero(space.dim);
  for (int K = 0; K < coarse.block_count(); ++K) {
    const CellBox box = coarse.block_box(K);
    for (int j = box.j0; j < box.j1; ++j) {
      for (int i = box.i0; i < box.i1; ++i) {
        const int c = mesh.cell(i, j);
        for (int t : {2 * c, 2 * c + 1}) {
          for (int v : mesh.triangles()[t]) {
            b[space.offsets[K] + box.local_node(mesh.node_i(v), mesh.node_j(v))] += f * triangle_area(mesh, t) / 3.0;
          }
        }
      }
    }
  }
  return b;
}

}  // namespace

std::pair<Matrix, Vector> assemble_dg(const FineMesh& mesh, const CoarseMesh& coarse,
                                      const std::vector<Matrix>& block_bases,
                                      const CoefficientField& kappa, const DGParameters& params, double f) {
  const BrokenSpace space = broken_space(coarse);
  const SparseMatrix F = assemble_dg_fine(mesh, coarse, kappa, params);
  const SparseMatrix Phi = block_diagonal(coarse, space, block_bases);
  return {Matrix(Phi.transpose() * (F * Phi)), Phi.transpose() * broken_load(mesh, coarse, space, f)};
}

DGSolution solve_dg(const FineMesh& mesh, const CoarseMesh& coarse, const std::vector<Matrix>& block_bases,
                    const CoefficientField& kappa, const DGParameters& params, double f,
                    const BoundaryCondition& bc) {
  const BrokenSpace space = broken_space(coarse);
  std::vector<Matrix> bases = block_bases;
  Vector lift = Vector::Zero(space.dim);
  for (int K = 0; K < coarse.block_count(); ++K) {
    const CellBox box = coarse.block_box(K);
    for (int l = 0; l < box.node_count(); ++l) {
      const int g = mesh.global_node(box, l);
      lift[space.offsets[K] + l] = bc.g(mesh.coord(g));
      if (mesh.is_boundary(g)) bases[K].row(l).setZero();
    }
    // Columns that lived only on the boundary are gone; keep an independent set.
    const Matrix B = gram_orthonormal_coords(bases[K].transpose() * bases[K], 1e-10);
    bases[K] = bases[K] * B;
  }
  const SparseMatrix F = assemble_dg_fine(mesh, coarse, kappa, params);
  const SparseMatrix Phi = block_diagonal(coarse, space, bases);
  const Matrix G = Matrix(Phi.transpose() * (F * Phi));
  const Vector rhs = Phi.transpose() * (broken_load(mesh, coarse, space, f) - F * lift);
  Eigen::FullPivLU<Matrix> lu(G);
  lu.setThreshold(1e-13);
  if (lu.rank() < G.rows()) {
    throw NumericalError("DG coarse matrix is singular: rank " + std::to_string(lu.rank()) + " of " +
                         std::to_string(G.rows()));
  }
  DGSolution sol;
  sol.c = lu.solve(rhs);
  sol.broken = lift + Phi * sol.c;
  return sol;
}

std::vector<Matrix> block_bases_from_spaces(const CoarseMesh& coarse, const std::vector<ReducedSpace>& spaces) {
  const auto& nodes = coarse.interior_nodes();
  if (spaces.size() != nodes.size()) throw ConfigError("block bases need one space per interior node");
  std::vector<int> slot(coarse.node_count(), -1);
  for (size_t k = 0; k < nodes.size(); ++k) slot[nodes[k]] = static_cast<int>(k);
  std::vector<Matrix> out;
  for (int K = 0; K < coarse.block_count(); ++K) {
    const CellBox box = coarse.block_box(K);
    std::vector<Matrix> parts;
    int cols = 0;
    for (int corner : coarse.block_corners(K)) {
      if (slot[corner] < 0) continue;
      const ReducedSpace& s = spaces[slot[corner]];
      parts.push_back(restrict_rows(s.R, s.box, box));
      cols += static_cast<int>(parts.back().cols());
    }
    if (cols == 0) throw ConfigError("coarse block " + std::to_string(K) + " has no interior corner");
    Matrix C(box.node_count(), cols);
    int c = 0;
    for (const auto& p : parts) {
      C.middleCols(c, p.cols()) = p;
      c += static_cast<int>(p.cols());
    }
    const Matrix B = gram_orthonormal_coords(C.transpose() * C, 1e-10);
    out.push_back(C * B);
  }
  return out;
}

}  // namespace gmsfem
