#pragma once

#include <vector>

#include "gmsfem/pipeline.hpp"

namespace gmsfem {

/// Mean of the P1 field u over omega_n for every coarse node n (N_v values).
std::vector<double> block_average(const FineMesh& mesh, const CoarseMesh& coarse, const Vector& u);
/// Mean of u over each coarse block.
std::vector<double> cell_average(const FineMesh& mesh, const CoarseMesh& coarse, const Vector& u);

/// Per-block parameter of the frozen coefficient: the mean of the four corner
/// node averages, or the block's own average.
std::vector<double> block_parameters(const FineMesh& mesh, const CoarseMesh& coarse, const Vector& u,
                                     const std::vector<double>& node_averages, FreezeMode mode);

/// kappa(x, mu_K) cell by cell, with mu_K the parameter of the cell's block.
CoefficientField frozen_coefficient(const AffineCoefficient& aff, const CoarseMesh& coarse,
                                    const std::vector<double>& block_mu);

struct PicardState {
  Vector u;
  std::vector<double> averages;         // per coarse node, after clamping
  int iterations = 0;                   // Picard updates after the initial iterate u^0
  std::vector<double> update_norms;     // relative energy norm of u^n - u^(n-1), n = 1..iterations
  int clamped = 0;                      // averages pulled back into [lo, hi] over the run
  bool converged = false;
};

struct PicardResult {
  PicardState state;
  CoefficientField kappa;  // frozen coefficient of the last solve
  int dim = 0;             // coarse dimension of the last solve (fine dof count for the fine oracle)
  double lambda_star = 0.0;
  std::vector<int> dims;   // coarse dimension of u^0, u^1, ...
};

/// Picard iteration on the reduced space: u^0 is the linear solve at the online
/// parameter; then each step freezes kappa at the averages of the previous
/// iterate, rebuilds the online spaces at each node's own average and solves
/// the coarse problem. Stops when the relative update energy norm is below
/// nonlinear.tol. Throws NumericalError when that norm grows three steps in a row.
PicardResult picard_solve(const Problem& pb, const RunConfig& cfg, const OfflineStage& off,
                          const Selection& sel, Execution exec = Execution::parallel);

/// The same iteration with fine direct solves.
PicardResult picard_fine(const Problem& pb, const RunConfig& cfg, Execution exec = Execution::parallel);

}  // namespace gmsfem
