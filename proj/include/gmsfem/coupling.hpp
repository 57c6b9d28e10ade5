#pragma once

#include <string>
#include <utility>
#include <vector>

#include "gmsfem/coeff.hpp"
#include "gmsfem/fem.hpp"
#include "gmsfem/linalg.hpp"
#include "gmsfem/mesh.hpp"
#include "gmsfem/pou.hpp"
#include "gmsfem/solvers.hpp"
#include "gmsfem/spaces.hpp"

namespace gmsfem {

enum class CouplingMode { galerkin, petrov_galerkin };

/// Global coarse space on the fine grid. Column k is chi_i * psi_j for
/// columns[k] = (i, j); for Petrov-Galerkin, P_trial holds the raw psi_j.
struct CoarseBasis {
  SparseMatrix P;
  SparseMatrix P_trial;
  std::vector<std::pair<int, int>> columns;
  CouplingMode mode = CouplingMode::galerkin;

  int dim() const { return static_cast<int>(P.cols()); }
};

/// `spaces` holds one online space per entry of coarse.interior_nodes(), in order.
/// Space rows may live on omega_i or on a box containing it.
CoarseBasis build_coarse_basis(const FineMesh& mesh, const CoarseMesh& coarse,
                               const std::vector<ReducedSpace>& spaces, const PartitionOfUnity& pou,
                               CouplingMode mode = CouplingMode::galerkin);

/// Coarse basis with one column chi_i per interior coarse node.
CoarseBasis pou_coarse_basis(const FineMesh& mesh, const CoarseMesh& coarse, const PartitionOfUnity& pou);

/// Dirichlet lift sum_j g(x_j) chi_j over the boundary coarse nodes.
Vector pou_lift(const FineMesh& mesh, const CoarseMesh& coarse, const PartitionOfUnity& pou,
                const BoundaryCondition& bc);

Vector prolong(const CoarseBasis& basis, const Vector& c);
Vector restrict_to_coarse(const CoarseBasis& basis, const Vector& y);

/// Rows of P at the free dofs of the reduced system.
SparseMatrix free_rows(const SparseMatrix& P, const DirichletSystem& sys);

struct CoarseSolution {
  Vector u;  // full fine-grid field including the boundary lift
  Vector c;  // coarse coefficients
  int rank = 0;
};

CoarseSolution solve_coarse_galerkin(const DirichletSystem& sys, const CoarseBasis& basis);
CoarseSolution solve_coarse_pg(const DirichletSystem& sys, const CoarseBasis& basis);

/// Coarse Galerkin operators of the affine terms for a frozen basis:
/// G(theta) = sum_q theta_q P^T A_q,ff P and rhs(theta) = P^T f_f - sum_q theta_q P^T A_q,fb g.
class AffineCoarseOperator {
 public:
  AffineCoarseOperator(const FineMesh& mesh, const AffineCoefficient& aff, const CoarseBasis& basis,
                       const Vector& load, const BoundaryCondition& bc, const Vector& lift = Vector());
  CoarseSolution solve(const std::vector<double>& theta) const;
  const Matrix& term(int q) const { return G_[q]; }

 private:
  std::vector<Matrix> G_;
  std::vector<Vector> h_;
  Vector f_;
  SparseMatrix P_free_;
  std::vector<int> free_;
  Vector lift_;
};

/// Symmetric interior-penalty coupling of per-block bases.
struct DGParameters {
  double penalty = 1.0;  // delta_E
};

/// Broken P1 space: every coarse block carries its own copy of its nodes;
/// block K's dofs start at offsets[K].
struct BrokenSpace {
  std::vector<int> offsets;
  int dim = 0;
};

BrokenSpace broken_space(const CoarseMesh& coarse);

/// Fine broken-space form sum_K a_K + flux + penalty over interior coarse edges.
/// The edge weight is the harmonic mean of n.kappa.n across each fine segment.
SparseMatrix assemble_dg_fine(const FineMesh& mesh, const CoarseMesh& coarse,
                              const CoefficientField& kappa, const DGParameters& params);

/// Coarse DG operator Phi^T F Phi and load Phi^T b for per-block bases
/// (columns on the block's nodes).
std::pair<Matrix, Vector> assemble_dg(const FineMesh& mesh, const CoarseMesh& coarse,
                                      const std::vector<Matrix>& block_bases,
                                      const CoefficientField& kappa, const DGParameters& params,
                                      double f = 1.0);

/// DG solve with the Dirichlet lift on boundary nodes; returns the broken field.
struct DGSolution {
  Vector broken;
  Vector c;
};
DGSolution solve_dg(const FineMesh& mesh, const CoarseMesh& coarse, const std::vector<Matrix>& block_bases,
                    const CoefficientField& kappa, const DGParameters& params, double f,
                    const BoundaryCondition& bc);

/// Per-block bases from online spaces: the restrictions of the spaces of the
/// block's interior corners, orthonormalized.
std::vector<Matrix> block_bases_from_spaces(const CoarseMesh& coarse,
                                            const std::vector<ReducedSpace>& spaces);

}  // namespace gmsfem
