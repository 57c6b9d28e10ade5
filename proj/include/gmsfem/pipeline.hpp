#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gmsfem/coeff.hpp"
#include "gmsfem/config.hpp"
#include "gmsfem/coupling.hpp"
#include "gmsfem/fem.hpp"
#include "gmsfem/mesh.hpp"
#include "gmsfem/pou.hpp"
#include "gmsfem/solvers.hpp"
#include "gmsfem/spaces.hpp"

namespace gmsfem {

struct Problem {
  FineMesh mesh;
  CoarseMesh coarse;
  AffineCoefficient aff;
  std::vector<double> mu;  // online parameter, empty when the field has no parameter
  CoefficientField kappa;  // kappa(mu)
  BoundaryCondition bc;
  double source = 1.0;
};

AffineCoefficient build_affine(const FineMesh& mesh, const RunConfig& cfg);
Problem build_problem(const RunConfig& cfg);

/// Offline parameter samples and normalized weights; a parameter-free field
/// yields the single empty sample.
std::vector<std::vector<double>> offline_samples(const Problem& pb, const RunConfig& cfg);
std::vector<double> offline_weights(const RunConfig& cfg, size_t count);

/// The box that carries a node's spaces: omega_i, or omega_i padded when the
/// s-form is extended.
CellBox space_box(const Problem& pb, const RunConfig& cfg, int node);

/// Local pencil at `node` for coefficient kappa with the POU-derived inputs.
LocalForms node_forms(const Problem& pb, const RunConfig& cfg, int node, const CoefficientField& kappa,
                      const PartitionOfUnity& pou, const std::vector<double>& tilde_kappa);

SnapshotSpace node_snapshots(const Problem& pb, const RunConfig& cfg, int node,
                             const std::vector<CoefficientField>& samples);

struct OfflineStage {
  std::vector<ReducedSpace> spaces;  // one per interior coarse node
  PartitionOfUnity pou;              // built from the sample-averaged coefficient
  int snapshot_columns = 0;
};

OfflineStage run_offline(const Problem& pb, const RunConfig& cfg, Execution exec = Execution::parallel);

/// POU of kappa(mu); the offline one when the field has no parameter or
/// parameters.pou_stage is offline.
PartitionOfUnity online_pou(const Problem& pb, const RunConfig& cfg, const OfflineStage& off,
                            Execution exec = Execution::parallel);

/// Online spaces with the full online spectrum kept; node_kappa[k] is the
/// coefficient used for interior node k (all equal in the linear case).
std::vector<ReducedSpace> run_online(const Problem& pb, const RunConfig& cfg, const OfflineStage& off,
                                     const std::vector<const CoefficientField*>& node_kappa,
                                     const PartitionOfUnity& pou, Execution exec = Execution::parallel);
std::vector<ReducedSpace> run_online(const Problem& pb, const RunConfig& cfg, const OfflineStage& off,
                                     const PartitionOfUnity& pou, Execution exec = Execution::parallel);

/// Spaces truncated by `sel`, with the largest excluded eigenvalue over nodes.
std::vector<ReducedSpace> select_spaces(const std::vector<ReducedSpace>& full, const Selection& sel,
                                        double* lambda_star = nullptr);

struct FineSystem {
  CoefficientField kappa;
  DirichletSystem sys;
  SparseMatrix A_kappa;  // full stiffness, used for energy norms
  SparseMatrix M_kappa;  // full kappa-weighted mass
};

/// With a POU the Dirichlet lift is pou_lift, otherwise g on the boundary only.
FineSystem fine_system(const Problem& pb, const CoefficientField& kappa,
                       const PartitionOfUnity* pou = nullptr);
Vector fine_solve(const FineSystem& fs);

struct GmsResult {
  Vector u;
  int dim = 0;
  std::optional<PcgReport> pcg;
};

/// Coarse solve (Galerkin, Petrov-Galerkin or DG) or, in pcg mode, the fine
/// system solved with the two-level preconditioner on the given spaces.
GmsResult solve_with_spaces(const Problem& pb, const RunConfig& cfg, const FineSystem& fs,
                            const std::vector<ReducedSpace>& spaces, const PartitionOfUnity& pou,
                            Execution exec = Execution::parallel);

/// Free-dof index lists of the overlapping subdomains.
std::vector<std::vector<int>> subdomain_dofs(const Problem& pb, const DirichletSystem& sys, int layers);

PcgReport run_two_level_pcg(const Problem& pb, const DirichletSystem& sys, const CoarseBasis& basis,
                            const SolverConfig& solver, Vector* solution = nullptr,
                            Execution exec = Execution::parallel);

}  // namespace gmsfem
