#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "gmsfem/coeff.hpp"
#include "gmsfem/linalg.hpp"
#include "gmsfem/mesh.hpp"
#include "gmsfem/parallel.hpp"

namespace gmsfem {

/// P1 stiffness sum_T kappa_T int grad phi_I . grad phi_J. With a region, only
/// triangles inside it are used and rows/cols are the region's local nodes.
SparseMatrix assemble_stiffness(const FineMesh& mesh, const CoefficientField& kappa,
                                const std::optional<CellBox>& region = std::nullopt,
                                Execution exec = Execution::parallel);

/// Weighted P1 mass sum_T w_T int phi_I phi_J. `weight` holds one value per cell or
/// one per triangle.
SparseMatrix assemble_mass(const FineMesh& mesh, const std::vector<double>& weight,
                           const std::optional<CellBox>& region = std::nullopt,
                           Execution exec = Execution::parallel);
/// Mass weighted by the field's isotropic mean.
SparseMatrix assemble_mass(const FineMesh& mesh, const CoefficientField& weight,
                           const std::optional<CellBox>& region = std::nullopt,
                           Execution exec = Execution::parallel);

/// Serial map-accumulating references for the two assemblers above.
SparseMatrix assemble_stiffness_reference(const FineMesh& mesh, const CoefficientField& kappa,
                                          const std::optional<CellBox>& region = std::nullopt);
SparseMatrix assemble_mass_reference(const FineMesh& mesh, const std::vector<double>& weight,
                                     const std::optional<CellBox>& region = std::nullopt);

/// Per-triangle gradients of the three P1 basis functions, rows = local vertex.
Eigen::Matrix<double, 3, 2> triangle_gradients(const FineMesh& mesh, int t);
double triangle_area(const FineMesh& mesh, int t);

/// b_I = int f phi_I for constant f.
Vector assemble_load(const FineMesh& mesh, double f);
/// b_I = int f phi_I for cellwise-constant f.
Vector assemble_load_cells(const FineMesh& mesh, const std::vector<double>& f);
/// b = M f for a nodal P1 source.
Vector assemble_load_nodal(const FineMesh& mesh, const Vector& f);

struct BoundaryCondition {
  std::function<double(Point)> g;

  static BoundaryCondition zero() {
    return {[](Point) { return 0.0; }};
  }
  static BoundaryCondition linear_xy() {
    return {[](Point p) { return p.x + p.y; }};
  }
  Vector boundary_values(const FineMesh& mesh) const;
};

/// Full-size system with boundary rows replaced by identity and columns eliminated.
std::pair<SparseMatrix, Vector> apply_dirichlet(const FineMesh& mesh, const SparseMatrix& A,
                                                const Vector& b, const BoundaryCondition& bc);

/// The same system restricted to free (non-boundary) nodes, posed for the
/// correction u - lift. The lift equals g on boundary nodes and the given
/// extension (zero by default) inside.
struct DirichletSystem {
  std::vector<int> free;        // free node ids, ascending
  std::vector<int> free_index;  // node -> position in `free`, or -1
  Vector lift;
  SparseMatrix A;               // A_ff
  Vector b;                     // (b - A lift)_f

  int free_count() const { return static_cast<int>(free.size()); }
  /// lift plus the free-node correction.
  Vector expand(const Vector& u_free) const;
  Vector restrict_free(const Vector& u) const;
};

DirichletSystem reduce_dirichlet(const FineMesh& mesh, const SparseMatrix& A, const Vector& b,
                                 const BoundaryCondition& bc, const Vector& lift = Vector());

struct ErrorNorms {
  double energy = 0.0;
  double h1 = 0.0;
  double l2w = 0.0;
  bool absolute = false;  // reference had zero norm, values are not relative
};

/// Squared norms of u - v: energy and H1 via A_kappa, weighted L2 via M_kappa.
ErrorNorms norms(const Vector& u, const Vector& v, const SparseMatrix& A_kappa,
                 const SparseMatrix& M_kappa);
/// Squared errors of u against reference, divided by the reference's squared norms.
ErrorNorms relative_errors(const Vector& u, const Vector& reference, const SparseMatrix& A_kappa,
                           const SparseMatrix& M_kappa);

/// Nodal values of f.
Vector interpolate(const FineMesh& mesh, const std::function<double(Point)>& f);

/// Principal submatrix on the given index list (in list order).
SparseMatrix submatrix(const SparseMatrix& A, const std::vector<int>& rows);

}  // namespace gmsfem
