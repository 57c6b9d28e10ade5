#pragma once

#include <string>
#include <vector>

#include "gmsfem/io.hpp"
#include "gmsfem/nonlinear.hpp"
#include "gmsfem/pipeline.hpp"

namespace gmsfem {

/// The online selection for ladder rung n: n more modes per node on top of the
/// base rule (ignored by the `all` and `threshold` rules).
Selection rung_selection(const Selection& base, int n);
std::string rung_label(const Selection& base, int n);

struct ConvergenceRow {
  std::string label;
  int dim = 0;
  double energy = 0.0, h1 = 0.0, l2w = 0.0;  // relative errors in percent
  double lambda_star = 0.0;
};

struct ConvergenceStudy {
  std::vector<ConvergenceRow> rows;
  Table table;
  Table eigenvalues;  // online spectra of the full spaces
};

/// One row per ladder rung against the fine direct solution.
ConvergenceStudy run_convergence_study(const RunConfig& cfg, Execution exec = Execution::parallel);

struct PrecondRow {
  double eta = 0.0;
  std::string family;
  int dim = 0;
  int iterations = 0;
  double condition = 0.0;
  bool converged = false;
  PcgReport report;
};

struct PrecondStudy {
  std::vector<PrecondRow> rows;
  Table table;
};

/// For every contrast and coarse-space family: two-level PCG on the fine system.
/// Families: spectral (online spaces at ladder rung 0), multiscale and bilinear
/// (one POU function per interior node).
PrecondStudy run_precond_study(const RunConfig& cfg, Execution exec = Execution::parallel);

struct EigendecaySeries {
  std::string form;            // a1, a2, a3_t, a3_ext
  std::vector<double> lambda;  // finite eigenvalues, non-increasing
  int infinite = 0;            // kernel modes of the s-form
  double ratio = 0.0;          // lambda_10 / lambda_1 (last over first if fewer)
};

struct EigendecayStudy {
  std::vector<EigendecaySeries> series;
  int snapshot_count = 0;
  Table table;    // form, rank, lambda
  Table summary;  // form, infinite_count, finite_count, lambda_1, lambda_10, ratio
};

/// Snapshots are global solves with unit forces on small squares outside the
/// target window (or outside the extended one), restricted to the extended
/// window, plus the constant. Ratios use the finite part of each spectrum.
EigendecayStudy run_eigendecay_study(const RunConfig& cfg, Execution exec = Execution::parallel);

struct NonlinearRow {
  std::string label;
  int dim = 0;
  double lambda_star = 0.0;
  double l2w = 0.0, energy = 0.0;  // percent, against the fine Picard solution
  int iterations = 0;
  int clamped = 0;
  std::vector<double> update_norms;
  std::vector<int> dims;
};

struct NonlinearStudy {
  std::vector<NonlinearRow> rows;
  int reference_iterations = 0;
  Table table;
  Table iterations;  // label, iter, update_energy_norm, coarse_dim
};

/// Picard on every ladder rung against the fine-grid Picard solution.
NonlinearStudy run_nonlinear_study(const RunConfig& cfg, Execution exec = Execution::parallel);

}  // namespace gmsfem
