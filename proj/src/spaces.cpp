#include "gmsfem/spaces.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gmsfem/error.hpp"
#include "gmsfem/fem.hpp"
#include "gmsfem/solvers.hpp"

namespace gmsfem {

namespace {

bool overlaps(const CellBox& a, const CellBox& b) {
  return std::max(a.i0, b.i0) < std::min(a.i1, b.i1) && std::max(a.j0, b.j0) < std::min(a.j1, b.j1);
}

void check_inside(const CellBox& region, const CellBox& box) {
  if (!box.contains(region)) throw ConfigError("form region is not inside the snapshot box");
}

}  // namespace

SnapshotKind parse_snapshot_kind(const std::string& name) {
  if (name == "harmonic") return SnapshotKind::harmonic;
  if (name == "fine_grid") return SnapshotKind::fine_grid;
  if (name == "local_spectral") return SnapshotKind::local_spectral;
  throw ConfigError("unknown snapshot kind '" + name + "'");
}

std::string to_string(SnapshotKind kind) {
  switch (kind) {
    case SnapshotKind::harmonic: return "harmonic";
    case SnapshotKind::fine_grid: return "fine_grid";
    default: return "local_spectral";
  }
}

AForm parse_a_form(const std::string& name) {
  if (name == "pou_stiffness") return AForm::pou_stiffness;
  if (name == "tilde_kappa_mass") return AForm::tilde_kappa_mass;
  if (name == "kappa_mass") return AForm::kappa_mass;
  if (name == "kappa_stiffness") return AForm::kappa_stiffness;
  throw ConfigError("unknown a-form '" + name + "'");
}

std::string to_string(AForm form) {
  switch (form) {
    case AForm::pou_stiffness: return "pou_stiffness";
    case AForm::tilde_kappa_mass: return "tilde_kappa_mass";
    case AForm::kappa_mass: return "kappa_mass";
    default: return "kappa_stiffness";
  }
}

SnapshotSpace fine_grid_snapshots(const CellBox& box, int node) {
  SnapshotSpace s;
  s.node = node;
  s.box = box;
  s.kind = SnapshotKind::fine_grid;
  s.R = Matrix::Identity(box.node_count(), box.node_count());
  return s;
}

SnapshotSpace harmonic_snapshots(const FineMesh& mesh, const CellBox& box,
                                 const std::vector<CoefficientField>& samples, int node) {
  if (samples.empty()) throw ConfigError("harmonic snapshots need at least one coefficient sample");
  std::vector<int> inner, outer;
  for (int l = 0; l < box.node_count(); ++l) (box.on_boundary(l) ? outer : inner).push_back(l);
  const int nb = static_cast<int>(outer.size()), ni = static_cast<int>(inner.size());
  SnapshotSpace s;
  s.node = node;
  s.box = box;
  s.kind = SnapshotKind::harmonic;
  s.R = Matrix::Zero(box.node_count(), nb * static_cast<int>(samples.size()));
  for (size_t q = 0; q < samples.size(); ++q) {
    const SparseMatrix A = assemble_stiffness(mesh, samples[q], box, Execution::serial);
    const int col0 = static_cast<int>(q) * nb;
    if (ni > 0) {
      std::vector<int> pos(box.node_count(), -1);
      for (int a = 0; a < nb; ++a) pos[outer[a]] = a;
      std::vector<int> ipos(box.node_count(), -1);
      for (int a = 0; a < ni; ++a) ipos[inner[a]] = a;
      Matrix rhs = Matrix::Zero(ni, nb);
      for (int k = 0; k < A.outerSize(); ++k) {
        if (pos[k] < 0) continue;
        for (SparseMatrix::InnerIterator it(A, k); it; ++it) {
          const int r = ipos[it.row()];
          if (r >= 0) rhs(r, pos[k]) = -it.value();
        }
      }
      const Matrix sol = SparseDirect(submatrix(A, inner)).solve(rhs);
      for (int a = 0; a < ni; ++a) s.R.block(inner[a], col0, 1, nb) = sol.row(a);
    }
    for (int a = 0; a < nb; ++a) s.R(outer[a], col0 + a) = 1.0;
  }
  return s;
}

SnapshotSpace spectral_snapshots(const SparseMatrix& A_tilde, const SparseMatrix& S_tilde, int count,
                                 const CellBox& box, int node) {
  if (A_tilde.rows() != box.node_count() || S_tilde.rows() != box.node_count()) {
    throw ConfigError("spectral snapshots: forms do not match the box");
  }
  if (count < 1) throw ConfigError("spectral snapshots: count must be positive");
  const GenEig eig = sparse_leading_modes(A_tilde, S_tilde, count);
  SnapshotSpace s;
  s.node = node;
  s.box = box;
  s.kind = SnapshotKind::local_spectral;
  s.R = eig.vectors.leftCols(std::min<Eigen::Index>(count, eig.vectors.cols()));
  return s;
}

SnapshotSpace spectral_snapshots(const FineMesh& mesh, const CellBox& box,
                                 const std::vector<CoefficientField>& samples, int count, int node) {
  if (samples.empty()) throw ConfigError("spectral snapshots need at least one coefficient sample");
  SnapshotSpace all;
  all.node = node;
  all.box = box;
  all.kind = SnapshotKind::local_spectral;
  std::vector<Matrix> blocks;
  int cols = 0;
  for (const auto& kappa : samples) {
    const SparseMatrix M = assemble_mass(mesh, kappa, box, Execution::serial);
    const SparseMatrix K = assemble_stiffness(mesh, kappa, box, Execution::serial);
    blocks.push_back(spectral_snapshots(M, K, count, box, node).R);
    cols += static_cast<int>(blocks.back().cols());
  }
  all.R.resize(box.node_count(), cols);
  int c = 0;
  for (const auto& b : blocks) {
    all.R.middleCols(c, b.cols()) = b;
    c += static_cast<int>(b.cols());
  }
  return all;
}

SparseMatrix embed(const SparseMatrix& local, const CellBox& region, const CellBox& box) {
  check_inside(region, box);
  if (region == box) return local;
  std::vector<int> map(region.node_count());
  for (int l = 0; l < region.node_count(); ++l) map[l] = box.local_node(region.local_i(l), region.local_j(l));
  std::vector<Triplet> trips;
  trips.reserve(local.nonZeros());
  for (int k = 0; k < local.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(local, k); it; ++it) {
      trips.emplace_back(map[it.row()], map[k], it.value());
    }
  }
  SparseMatrix out(box.node_count(), box.node_count());
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

Matrix restrict_rows(const Matrix& R, const CellBox& from, const CellBox& to) {
  check_inside(to, from);
  if (from == to) return R;
  Matrix out(to.node_count(), R.cols());
  for (int l = 0; l < to.node_count(); ++l) out.row(l) = R.row(from.local_node(to.local_i(l), to.local_j(l)));
  return out;
}

LocalForms assemble_local_forms(const FineMesh& mesh, const CellBox& box, const CellBox& a_region,
                                const CellBox& s_region, AForm a_form, const CoefficientField& kappa,
                                const FormInputs& inputs) {
  LocalForms f;
  f.S = embed(assemble_stiffness(mesh, kappa, s_region, Execution::serial), s_region, box);
  switch (a_form) {
    case AForm::kappa_stiffness:
      f.A = embed(assemble_stiffness(mesh, kappa, a_region, Execution::serial), a_region, box);
      break;
    case AForm::kappa_mass:
      f.A = embed(assemble_mass(mesh, kappa, a_region, Execution::serial), a_region, box);
      break;
    case AForm::tilde_kappa_mass:
      if (!inputs.tilde_kappa) throw ConfigError("tilde_kappa_mass form needs POU weights");
      f.A = embed(assemble_mass(mesh, *inputs.tilde_kappa, a_region, Execution::serial), a_region, box);
      break;
    case AForm::pou_stiffness: {
      if (!inputs.pou) throw ConfigError("pou_stiffness form needs a partition of unity");
      const SparseMatrix K =
          embed(assemble_stiffness(mesh, kappa, a_region, Execution::serial), a_region, box);
      f.A = SparseMatrix(box.node_count(), box.node_count());
      const PartitionOfUnity& pou = *inputs.pou;
      for (int k = 0; k < pou.size(); ++k) {
        const CellBox& sup = pou.support[k];
        if (!overlaps(sup, a_region)) continue;
        Vector d = Vector::Zero(box.node_count());
        for (int l = 0; l < box.node_count(); ++l) {
          const int gi = box.local_i(l), gj = box.local_j(l);
          if (sup.contains_node(gi, gj)) d[l] = pou.chi[k][sup.local_node(gi, gj)];
        }
        f.A += SparseMatrix(d.asDiagonal() * K * d.asDiagonal());
      }
      break;
    }
  }
  return f;
}

int selected_count(const Vector& lambda, const Selection& sel) {
  const int n = static_cast<int>(lambda.size());
  switch (sel.rule) {
    case Selection::Rule::count:
      if (sel.count < 0) throw ConfigError("selection count must be non-negative");
      return std::min(sel.count, n);
    case Selection::Rule::all: return n;
    case Selection::Rule::threshold: {
      double ref = 0.0;
      for (int k = 0; k < n; ++k) {
        if (std::isfinite(lambda[k])) {
          ref = lambda[k];
          break;
        }
      }
      int k = 0;
      while (k < n && (!std::isfinite(lambda[k]) || lambda[k] >= sel.delta * ref)) ++k;
      return k;
    }
    case Selection::Rule::unbounded_plus: {
      if (sel.extra < 0) throw ConfigError("selection extra must be non-negative");
      int k = 0;
      while (k < n && lambda[k] >= sel.tau) ++k;
      return std::min(n, k + sel.extra);
    }
  }
  return n;
}

ReducedSpace ReducedSpace::truncated(int n) const {
  if (n < 0 || n > size()) throw ConfigError("cannot truncate a space of size " + std::to_string(size()) +
                                             " to " + std::to_string(n));
  ReducedSpace t = *this;
  t.R = R.leftCols(n);
  t.coords = coords.leftCols(n);
  t.lambda_star = n < lambda.size() ? lambda[n] : 0.0;
  return t;
}

ReducedSpace reduce_space(const Matrix& R_parent, const CellBox& box, const SparseMatrix& A,
                          const SparseMatrix& S, const Selection& sel, Stage stage, int node,
                          double drop_tol) {
  if (R_parent.rows() != A.rows() || A.rows() != S.rows()) {
    throw ConfigError("reduce_space: basis and forms have different sizes");
  }
  const Matrix Ap = R_parent.transpose() * (A * R_parent);
  const Matrix Sp = R_parent.transpose() * (S * R_parent);
  const GenEig eig = semidefinite_gen_eig(Ap, Sp, drop_tol);
  const int m = static_cast<int>(R_parent.cols()), r = static_cast<int>(eig.lambda.size());

  ReducedSpace out;
  out.node = node;
  out.box = box;
  out.stage = stage;
  out.lambda = eig.lambda;
  out.deflated = m - r;
  const int k = selected_count(eig.lambda, sel);
  out.coords = eig.vectors.leftCols(k);
  out.R = R_parent * out.coords;
  out.lambda_star = k < r ? eig.lambda[k] : 0.0;
  return out;
}

ReducedSpace build_offline(const SnapshotSpace& snap, const LocalForms& forms, const Selection& sel) {
  return reduce_space(snap.R, snap.box, forms.A, forms.S, sel, Stage::offline, snap.node);
}

ReducedSpace build_online(const ReducedSpace& off, const LocalForms& forms, const Selection& sel) {
  ReducedSpace on = reduce_space(off.R, off.box, forms.A, forms.S, sel, Stage::online, off.node);
  on.coords = off.coords * on.coords;
  return on;
}

ReducedSpace build_offline_union(const SnapshotSpace& snap, const std::vector<LocalForms>& per_sample,
                                 const Selection& sel, const SparseMatrix& gram, double drop_tol) {
  if (per_sample.empty()) throw ConfigError("union offline space needs at least one sample");
  std::vector<ReducedSpace> parts;
  int cols = 0;
  double lambda_star = 0.0;
  std::vector<double> lambdas;
  for (const auto& forms : per_sample) {
    parts.push_back(build_offline(snap, forms, sel));
    cols += parts.back().size();
    lambda_star = std::max(lambda_star, parts.back().lambda_star);
    for (int k = 0; k < parts.back().size(); ++k) lambdas.push_back(parts.back().lambda[k]);
  }
  Matrix C(snap.R.cols(), cols);
  int c = 0;
  for (const auto& p : parts) {
    C.middleCols(c, p.size()) = p.coords;
    c += p.size();
  }
  const Matrix RC = snap.R * C;
  const Matrix G = RC.transpose() * (gram * RC);
  const Matrix B = gram_orthonormal_coords(G, drop_tol);
  const int r = static_cast<int>(B.cols());
  if (r == 0) throw NumericalError("union offline space is empty");

  ReducedSpace out;
  out.node = snap.node;
  out.box = snap.box;
  out.stage = Stage::offline;
  out.coords = C * B;
  out.R = snap.R * out.coords;
  std::sort(lambdas.begin(), lambdas.end(), std::greater<>());
  out.lambda = Eigen::Map<Vector>(lambdas.data(), static_cast<Eigen::Index>(lambdas.size()));
  out.deflated = cols - r;
  out.lambda_star = lambda_star;
  return out;
}

}  // namespace gmsfem
