#pragma once

#include <string>
#include <vector>

#include "gmsfem/coeff.hpp"
#include "gmsfem/linalg.hpp"
#include "gmsfem/mesh.hpp"
#include "gmsfem/parallel.hpp"

namespace gmsfem {

enum class PouKind { bilinear, multiscale, energy_min };

PouKind parse_pou_kind(const std::string& name);
std::string to_string(PouKind kind);

/// chi[i] lives on the nodes of support[i] = omega_i (box-local ordering) and is
/// zero everywhere else.
struct PartitionOfUnity {
  PouKind kind = PouKind::bilinear;
  std::vector<CellBox> support;
  std::vector<Vector> chi;

  int size() const { return static_cast<int>(chi.size()); }
  Vector global(const FineMesh& mesh, int i) const;
  /// sum_i chi_i on the fine grid.
  Vector sum(const FineMesh& mesh) const;
};

PartitionOfUnity bilinear_pou(const FineMesh& mesh, const CoarseMesh& coarse);

/// Per coarse block, kappa-harmonic extension of the bilinear trace.
PartitionOfUnity multiscale_pou(const FineMesh& mesh, const CoarseMesh& coarse,
                                const CoefficientField& kappa, Execution exec = Execution::parallel);

struct EnergyMinOptions {
  double tol = 1e-10;
  int max_it = 0;  // 0: 10 * fine node count
};

struct EnergyMinReport {
  int iterations = 0;
  double residual = 0.0;
};

/// Minimizes sum_i int kappa |grad chi_i|^2 subject to sum_i chi_i = 1 and
/// chi_i = 0 on the part of d(omega_i) inside the domain.
PartitionOfUnity energy_min_pou(const FineMesh& mesh, const CoarseMesh& coarse,
                                const CoefficientField& kappa, const EnergyMinOptions& options = {},
                                EnergyMinReport* report = nullptr,
                                Execution exec = Execution::parallel);

PartitionOfUnity build_pou(PouKind kind, const FineMesh& mesh, const CoarseMesh& coarse,
                           const CoefficientField& kappa, Execution exec = Execution::parallel);

/// sum_i chi_i^T A_omega_i chi_i with the kappa-stiffness on each omega_i.
double pou_energy(const FineMesh& mesh, const PartitionOfUnity& pou, const CoefficientField& kappa);

/// Per-triangle sum_k grad chi_k^T kappa grad chi_k.
std::vector<double> pou_tilde_kappa(const FineMesh& mesh, const PartitionOfUnity& pou,
                                    const CoefficientField& kappa);

/// Box-local node indices of omega_i where the bilinear hat is positive: the
/// nodes on which chi_i is not pinned to zero.
std::vector<int> pou_free_nodes(const FineMesh& mesh, const CoarseMesh& coarse, int i);

}  // namespace gmsfem
