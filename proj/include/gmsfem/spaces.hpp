#pragma once

#include <string>
#include <vector>

#include "gmsfem/coeff.hpp"
#include "gmsfem/linalg.hpp"
#include "gmsfem/mesh.hpp"
#include "gmsfem/pou.hpp"

namespace gmsfem {

enum class SnapshotKind { harmonic, fine_grid, local_spectral };
SnapshotKind parse_snapshot_kind(const std::string& name);
std::string to_string(SnapshotKind kind);

/// Columns of R are fine-grid functions on the nodes of `box` (box-local order).
struct SnapshotSpace {
  int node = -1;
  CellBox box;
  SnapshotKind kind = SnapshotKind::fine_grid;
  Matrix R;

  int size() const { return static_cast<int>(R.cols()); }
};

/// Identity injection of every nodal function of the box.
SnapshotSpace fine_grid_snapshots(const CellBox& box, int node = -1);

/// For each coefficient sample and each boundary node l of the box: the
/// kappa-harmonic function with nodal boundary data delta_l. Sample-major order.
SnapshotSpace harmonic_snapshots(const FineMesh& mesh, const CellBox& box,
                                 const std::vector<CoefficientField>& samples, int node = -1);

/// Dominant `count` eigenvectors of A~ psi = lambda S~ psi (A~ positive definite).
SnapshotSpace spectral_snapshots(const SparseMatrix& A_tilde, const SparseMatrix& S_tilde, int count,
                                 const CellBox& box, int node = -1);
/// Per sample: A~ = kappa-weighted mass, S~ = kappa-stiffness on the box,
/// `count` dominant eigenvectors each, concatenated sample-major.
SnapshotSpace spectral_snapshots(const FineMesh& mesh, const CellBox& box,
                                 const std::vector<CoefficientField>& samples, int count,
                                 int node = -1);

enum class AForm { pou_stiffness, tilde_kappa_mass, kappa_mass, kappa_stiffness };
AForm parse_a_form(const std::string& name);
std::string to_string(AForm form);

/// Local pencil on the nodes of `box`: a-form over a_region, kappa-stiffness
/// over s_region (both inside box).
struct LocalForms {
  SparseMatrix A;
  SparseMatrix S;
};

struct FormInputs {
  const PartitionOfUnity* pou = nullptr;         // pou_stiffness
  const std::vector<double>* tilde_kappa = nullptr;  // tilde_kappa_mass, one value per triangle
};

LocalForms assemble_local_forms(const FineMesh& mesh, const CellBox& box, const CellBox& a_region,
                                const CellBox& s_region, AForm a_form, const CoefficientField& kappa,
                                const FormInputs& inputs = {});

/// Matrix assembled on `region` re-indexed onto the nodes of `box` (zero elsewhere).
SparseMatrix embed(const SparseMatrix& local, const CellBox& region, const CellBox& box);
/// Rows of R (on `from`) restricted to the nodes of `to` (to inside from).
Matrix restrict_rows(const Matrix& R, const CellBox& from, const CellBox& to);

struct Selection {
  enum class Rule { count, all, threshold, unbounded_plus };
  Rule rule = Rule::all;
  int count = 1;       // count
  double delta = 0.0;  // threshold: keep lambda >= delta * largest finite lambda
  double tau = 0.0;    // unbounded_plus: keep lambda >= tau, then `extra` more
  int extra = 0;

  static Selection keep_count(int n) { return {Rule::count, n, 0.0, 0.0, 0}; }
  static Selection keep_all() { return {Rule::all, 0, 0.0, 0.0, 0}; }
  static Selection keep_threshold(double d) { return {Rule::threshold, 0, d, 0.0, 0}; }
  static Selection unbounded_plus(double t, int n) { return {Rule::unbounded_plus, 0, 0.0, t, n}; }
};

/// Number of leading modes kept by `sel` from a non-increasing spectrum.
int selected_count(const Vector& lambda, const Selection& sel);

enum class Stage { offline, online };

/// R = R_parent * coords; the columns are A-orthonormal and S-orthogonal
/// eigenvectors sorted by non-increasing lambda.
struct ReducedSpace {
  int node = -1;
  CellBox box;
  Stage stage = Stage::offline;
  Matrix R;
  Matrix coords;
  Vector lambda;  // full spectrum of the deflated pencil
  int deflated = 0;
  double lambda_star = 0.0;  // first excluded eigenvalue, 0 if none

  int size() const { return static_cast<int>(R.cols()); }
  /// Same space truncated to its first n columns.
  ReducedSpace truncated(int n) const;
};

/// Projects (A, S) onto span(R_parent), drops directions whose A-norm falls
/// below drop_tol relative to the largest, and keeps the modes chosen by `sel`.
ReducedSpace reduce_space(const Matrix& R_parent, const CellBox& box, const SparseMatrix& A,
                          const SparseMatrix& S, const Selection& sel, Stage stage, int node = -1,
                          double drop_tol = 1e-10);

ReducedSpace build_offline(const SnapshotSpace& snap, const LocalForms& forms, const Selection& sel);
ReducedSpace build_online(const ReducedSpace& off, const LocalForms& forms, const Selection& sel);

/// Per-sample offline spaces concatenated and orthonormalized in the given
/// Gram form (typically H1 = stiffness + mass with unit weight).
ReducedSpace build_offline_union(const SnapshotSpace& snap, const std::vector<LocalForms>& per_sample,
                                 const Selection& sel, const SparseMatrix& gram,
                                 double drop_tol = 1e-10);

}  // namespace gmsfem
