#include "gmsfem/coupling.hpp"

#include <limits>
#include <string>

#include "gmsfem/error.hpp"
#include "gmsfem/parallel.hpp"

namespace gmsfem {

namespace {

SparseMatrix from_blocks(int rows, const std::vector<std::vector<Triplet>>& blocks, int cols) {
  size_t total = 0;
  for (const auto& b : blocks) total += b.size();
  std::vector<Triplet> trips;
  trips.reserve(total);
  for (const auto& b : blocks) trips.insert(trips.end(), b.begin(), b.end());
  SparseMatrix P(rows, cols);
  P.setFromTriplets(trips.begin(), trips.end());
  return P;
}

}  // namespace

CoarseBasis build_coarse_basis(const FineMesh& mesh, const CoarseMesh& coarse,
                               const std::vector<ReducedSpace>& spaces, const PartitionOfUnity& pou,
                               CouplingMode mode) {
  const auto& nodes = coarse.interior_nodes();
  if (spaces.size() != nodes.size()) {
    throw ConfigError("coarse basis needs one online space per interior coarse node (" +
                      std::to_string(nodes.size()) + "), got " + std::to_string(spaces.size()));
  }
  if (pou.size() != coarse.node_count()) throw ConfigError("partition of unity does not match the coarse mesh");
  CoarseBasis basis;
  basis.mode = mode;
  std::vector<int> first(nodes.size() + 1, 0);
  for (size_t k = 0; k < nodes.size(); ++k) {
    if (spaces[k].size() == 0) {
      throw ConfigError("online space at coarse node " + std::to_string(nodes[k]) + " is empty");
    }
    first[k + 1] = first[k] + spaces[k].size();
    for (int j = 0; j < spaces[k].size(); ++j) basis.columns.emplace_back(nodes[k], j);
  }
  std::vector<std::vector<Triplet>> test(nodes.size()), trial(nodes.size());
  parallel_for(static_cast<int>(nodes.size()), [&](int k) {
    const int i = nodes[k];
    const CellBox& omega = pou.support[i];
    const Matrix psi = restrict_rows(spaces[k].R, spaces[k].box, omega);
    for (int j = 0; j < psi.cols(); ++j) {
      for (int l = 0; l < omega.node_count(); ++l) {
        const int g = mesh.global_node(omega, l);
        const double v = pou.chi[i][l] * psi(l, j);
        if (v != 0.0) test[k].emplace_back(g, first[k] + j, v);
        if (mode == CouplingMode::petrov_galerkin && psi(l, j) != 0.0) {
          trial[k].emplace_back(g, first[k] + j, psi(l, j));
        }
      }
    }
  });
  basis.P = from_blocks(mesh.node_count(), test, first.back());
  if (mode == CouplingMode::petrov_galerkin) basis.P_trial = from_blocks(mesh.node_count(), trial, first.back());
  return basis;
}

CoarseBasis pou_coarse_basis(const FineMesh& mesh, const CoarseMesh& coarse, const PartitionOfUnity& pou) {
  std::vector<ReducedSpace> spaces;
  for (int i : coarse.interior_nodes()) {
    ReducedSpace s;
    s.node = i;
    s.box = pou.support[i];
    s.R = Matrix::Ones(s.box.node_count(), 1);
    s.coords = Matrix::Ones(1, 1);
    s.lambda = Vector::Constant(1, std::numeric_limits<double>::infinity());
    spaces.push_back(std::move(s));
  }
  return build_coarse_basis(mesh, coarse, spaces, pou);
}

Vector pou_lift(const FineMesh& mesh, const CoarseMesh& coarse, const PartitionOfUnity& pou,
                const BoundaryCondition& bc) {
  if (pou.size() != coarse.node_count()) throw ConfigError("pou_lift: POU does not match the coarse mesh");
  Vector lift = Vector::Zero(mesh.node_count());
  for (int j = 0; j < coarse.node_count(); ++j) {
    if (!coarse.is_boundary_node(j)) continue;
    const double gj = bc.g(coarse.node_coord(j));
    const CellBox& box = pou.support[j];
    for (int l = 0; l < box.node_count(); ++l) lift[mesh.global_node(box, l)] += gj * pou.chi[j][l];
  }
  return lift;
}

Vector prolong(const CoarseBasis& basis, const Vector& c) {
  if (c.size() != basis.dim()) throw ConfigError("prolong: coefficient vector has wrong length");
  return basis.P * c;
}

Vector restrict_to_coarse(const CoarseBasis& basis, const Vector& y) {
  if (y.size() != basis.P.rows()) throw ConfigError("restrict: fine vector has wrong length");
  return basis.P.transpose() * y;
}

SparseMatrix free_rows(const SparseMatrix& P, const DirichletSystem& sys) {
  if (P.rows() != static_cast<int>(sys.free_index.size())) throw ConfigError("free_rows: size mismatch");
  std::vector<Triplet> sel;
  for (int k = 0; k < sys.free_count(); ++k) sel.emplace_back(k, sys.free[k], 1.0);
  SparseMatrix E(sys.free_count(), P.rows());
  E.setFromTriplets(sel.begin(), sel.end());
  return E * P;
}

CoarseSolution solve_coarse_galerkin(const DirichletSystem& sys, const CoarseBasis& basis) {
  const SparseMatrix Pf = free_rows(basis.P, sys);
  const Matrix G = Matrix(Pf.transpose() * (sys.A * Pf));
  const Vector rhs = Pf.transpose() * sys.b;
  const CoarseSolver solver(G);
  CoarseSolution sol;
  sol.c = solver.solve(rhs);
  sol.rank = solver.rank();
  sol.u = sys.expand(Pf * sol.c);
  return sol;
}

CoarseSolution solve_coarse_pg(const DirichletSystem& sys, const CoarseBasis& basis) {
  const SparseMatrix& trial = basis.mode == CouplingMode::petrov_galerkin ? basis.P_trial : basis.P;
  const SparseMatrix Pt = free_rows(basis.P, sys), Pr = free_rows(trial, sys);
  const Matrix G = Matrix(Pt.transpose() * (sys.A * Pr));
  Eigen::FullPivLU<Matrix> lu(G);
  lu.setThreshold(1e-13);
  if (lu.rank() < G.rows()) {
    throw NumericalError("Petrov-Galerkin coarse matrix is singular: rank " + std::to_string(lu.rank()) +
                         " of " + std::to_string(G.rows()));
  }
  CoarseSolution sol;
  sol.c = lu.solve(Vector(Pt.transpose() * sys.b));
  sol.rank = static_cast<int>(lu.rank());
  sol.u = sys.expand(Pr * sol.c);
  return sol;
}

AffineCoarseOperator::AffineCoarseOperator(const FineMesh& mesh, const AffineCoefficient& aff,
                                           const CoarseBasis& basis, const Vector& load,
                                           const BoundaryCondition& bc, const Vector& lift) {
  const SparseMatrix A0 = assemble_stiffness(mesh, aff.terms.front().field);
  const DirichletSystem sys = reduce_dirichlet(mesh, A0, load, bc, lift);
  free_ = sys.free;
  lift_ = sys.lift;
  P_free_ = free_rows(basis.P, sys);
  f_ = P_free_.transpose() * sys.restrict_free(load);
  for (const auto& term : aff.terms) {
    const SparseMatrix A = assemble_stiffness(mesh, term.field);
    const SparseMatrix Aff = submatrix(A, free_);
    G_.push_back(Matrix(P_free_.transpose() * (Aff * P_free_)));
    h_.push_back(P_free_.transpose() * sys.restrict_free(A * lift_));
  }
}

CoarseSolution AffineCoarseOperator::solve(const std::vector<double>& theta) const {
  if (theta.size() != G_.size()) throw ConfigError("affine solve: theta has wrong length");
  Matrix G = Matrix::Zero(G_[0].rows(), G_[0].cols());
  Vector rhs = f_;
  for (size_t q = 0; q < G_.size(); ++q) {
    G += theta[q] * G_[q];
    rhs -= theta[q] * h_[q];
  }
  const CoarseSolver solver(G);
  CoarseSolution sol;
  sol.c = solver.solve(rhs);
  sol.rank = solver.rank();
  const Vector uf = P_free_ * sol.c;
  sol.u = lift_;
  for (size_t k = 0; k < free_.size(); ++k) sol.u[free_[k]] += uf[static_cast<int>(k)];
  return sol;
}

}  // namespace gmsfem
