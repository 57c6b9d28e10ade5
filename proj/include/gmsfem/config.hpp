#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gmsfem/pou.hpp"
#include "gmsfem/spaces.hpp"

namespace gmsfem {

struct MeshConfig {
  int nx = 100, ny = 100;
  int Nx = 10, Ny = 10;
  int pad = 0;  // fine-cell ring around omega_i for the s-form
};

enum class FieldSource { preset, file, affine_four, anisotropic_pair, exponential_pair };

struct FieldConfig {
  FieldSource source = FieldSource::preset;
  std::string preset = "channels_inclusions";
  std::string path;
  double eta = 1e6;
  bool tensor = false;  // preset/file: wrap as diag(k, 1)
  double alpha = 1.0;   // exponential_pair
};

enum class OfflineMode { average, union_of_samples };
/// Which coefficient the POU of a parametric run comes from: kappa(mu) or the
/// sample average used offline.
enum class PouStage { online, offline };

struct ParameterConfig {
  std::vector<std::vector<double>> samples;
  std::vector<double> weights;  // empty: uniform
  std::vector<double> online;   // empty: midpoint of the admissible box
  OfflineMode offline_mode = OfflineMode::average;
  PouStage pou_stage = PouStage::online;
};

struct SnapshotConfig {
  SnapshotKind kind = SnapshotKind::fine_grid;
  int count = 8;  // local_spectral: eigenvectors per sample
};

struct FormConfig {
  AForm a = AForm::tilde_kappa_mass;
  bool s_extended = false;  // s-form on omega_i padded by mesh.pad
};

struct SelectionConfig {
  Selection offline = Selection::keep_all();
  Selection online = Selection::unbounded_plus(2.0, 0);
  std::vector<int> ladder = {0, 1, 2, 3, 4};
};

enum class CouplingKind { galerkin, petrov_galerkin, dg };

struct CouplingConfig {
  CouplingKind kind = CouplingKind::galerkin;
  double penalty = 10.0;
};

enum class SolverKind { direct, pcg };

struct SolverConfig {
  SolverKind kind = SolverKind::direct;
  int overlap = 1;
  double tol = 1e-10;
  int max_it = 5000;
};

enum class StudyKind { none, convergence, precond, eigendecay, nonlinear };

struct PrecondStudyConfig {
  std::vector<double> etas = {1e3, 1e5, 1e7};
  std::vector<std::string> families = {"multiscale", "spectral"};
};

struct EigendecayConfig {
  double target[4] = {0.4, 0.6, 0.4, 0.6};    // x0 x1 y0 y1
  double extended[4] = {0.3, 0.7, 0.3, 0.7};
  double force_size = 0.02;
  double force_spacing = 0.1;
  int ranks = 20;
  bool forces_outside_extended = true;  // false: forces only avoid the target window
};

enum class FreezeMode { node_average, cell_average };

struct NonlinearConfig {
  double lo = 0.0, hi = 2.0;  // solution-value range covered by offline samples
  int samples = 10;
  double tol = 1e-6;
  int max_it = 20;
  FreezeMode freeze = FreezeMode::node_average;
};

struct StudyConfig {
  StudyKind kind = StudyKind::none;
  PrecondStudyConfig precond;
  EigendecayConfig eigendecay;
  NonlinearConfig nonlinear;
};

enum class BoundaryKind { linear_xy, zero };

struct RunConfig {
  MeshConfig mesh;
  FieldConfig field;
  ParameterConfig params;
  SnapshotConfig snapshots;
  FormConfig forms;
  PouKind pou = PouKind::multiscale;
  SelectionConfig selection;
  CouplingConfig coupling;
  SolverConfig solver;
  BoundaryKind bc = BoundaryKind::linear_xy;
  double source = 1.0;
  StudyConfig study;
};

/// Parses and validates a JSON document; missing keys keep their defaults.
/// Relative file paths are resolved against base_dir.
RunConfig parse_config(const std::string& json_text, const std::string& base_dir = ".");
RunConfig load_config(const std::string& path);
/// Canonical JSON of the fully-defaulted config (sorted keys, fixed formatting).
std::string canonical_json(const RunConfig& cfg);
/// FNV-1a 64 of canonical_json, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

std::string to_string(FieldSource s);
std::string to_string(StudyKind s);

}  // namespace gmsfem
