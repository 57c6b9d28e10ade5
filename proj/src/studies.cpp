#include "gmsfem/studies.hpp"

#include <algorithm>
#include <cmath>

#include "gmsfem/error.hpp"

namespace gmsfem {

namespace {

double pct(double squared_ratio) { return 100.0 * std::sqrt(std::max(0.0, squared_ratio)); }

CellBox window_box(const FineMesh& mesh, const double w[4], const char* what) {
  auto snap = [what](double v, int n) {
    const double s = v * n;
    const int k = static_cast<int>(std::lround(s));
    if (std::abs(s - k) > 1e-9) throw ConfigError(std::string(what) + " is not aligned with the fine grid");
    return k;
  };
  CellBox b{snap(w[0], mesh.nx()), snap(w[1], mesh.nx()), snap(w[2], mesh.ny()), snap(w[3], mesh.ny())};
  if (b.i0 < 0 || b.j0 < 0 || b.i1 > mesh.nx() || b.j1 > mesh.ny() || b.i0 >= b.i1 || b.j0 >= b.j1)
    throw ConfigError(std::string(what) + " is empty or leaves the domain");
  return b;
}

// The four bilinear corner functions of a window, as a partition of unity on it.
PartitionOfUnity window_pou(const CellBox& box) {
  PartitionOfUnity p;
  p.kind = PouKind::bilinear;
  for (int corner = 0; corner < 4; ++corner) {
    Vector chi(box.node_count());
    for (int l = 0; l < box.node_count(); ++l) {
      const double s = double(box.local_i(l) - box.i0) / box.cells_x();
      const double r = double(box.local_j(l) - box.j0) / box.cells_y();
      const double fx = corner % 2 ? s : 1.0 - s, fy = corner / 2 ? r : 1.0 - r;
      chi[l] = fx * fy;
    }
    p.support.push_back(box);
    p.chi.push_back(std::move(chi));
  }
  return p;
}

}  // namespace

Selection rung_selection(const Selection& base, int n) {
  Selection s = base;
  if (s.rule == Selection::Rule::unbounded_plus) s.extra += n;
  if (s.rule == Selection::Rule::count) s.count += n;
  return s;
}

std::string rung_label(const Selection& base, int n) {
  switch (base.rule) {
    case Selection::Rule::unbounded_plus: return "GMsFEM+" + std::to_string(base.extra + n);
    case Selection::Rule::count: return "count=" + std::to_string(base.count + n);
    case Selection::Rule::all: return "full";
    case Selection::Rule::threshold: return "threshold";
  }
  return "";
}

ConvergenceStudy run_convergence_study(const RunConfig& cfg, Execution exec) {
  const std::string hash = config_hash(cfg);
  const Problem pb = build_problem(cfg);
  const OfflineStage off = run_offline(pb, cfg, exec);
  const PartitionOfUnity pou = online_pou(pb, cfg, off, exec);
  const auto full = run_online(pb, cfg, off, pou, exec);
  const FineSystem fs = fine_system(pb, pb.kappa, &pou);
  const Vector ref = fine_solve(fs);

  ConvergenceStudy out;
  out.table.header = {"label", "dim", "energy_pct", "h1_pct", "l2w_pct", "lambda_star", "config_hash"};
  for (int n : cfg.selection.ladder) {
    const Selection sel = rung_selection(cfg.selection.online, n);
    ConvergenceRow row;
    const auto spaces = select_spaces(full, sel, &row.lambda_star);
    const GmsResult g = solve_with_spaces(pb, cfg, fs, spaces, pou, exec);
    const ErrorNorms e = relative_errors(g.u, ref, fs.A_kappa, fs.M_kappa);
    row.label = rung_label(cfg.selection.online, n);
    row.dim = g.dim;
    row.energy = pct(e.energy);
    row.h1 = pct(e.h1);
    row.l2w = pct(e.l2w);
    out.table.add({row.label, fmt(row.dim), fmt(row.energy), fmt(row.h1), fmt(row.l2w), fmt(row.lambda_star), hash});
    out.rows.push_back(std::move(row));
  }
  out.eigenvalues = eigenvalue_table(full, hash);
  return out;
}

PrecondStudy run_precond_study(const RunConfig& cfg, Execution exec) {
  const std::string hash = config_hash(cfg);
  PrecondStudy out;
  out.table.header = {"eta", "family", "dim", "iterations", "condition", "converged", "config_hash"};
  const auto& fam = cfg.study.precond.families;
  const bool spectral = std::find(fam.begin(), fam.end(), "spectral") != fam.end();
  for (double eta : cfg.study.precond.etas) {
    RunConfig c = cfg;
    c.field.eta = eta;
    const Problem pb = build_problem(c);
    OfflineStage off;
    PartitionOfUnity pou;
    if (spectral) {
      off = run_offline(pb, c, exec);
      pou = online_pou(pb, c, off, exec);
    } else {
      pou = build_pou(c.pou, pb.mesh, pb.coarse, pb.kappa, exec);
    }
    const FineSystem fs = fine_system(pb, pb.kappa, &pou);
    for (const auto& family : fam) {
      CoarseBasis basis;
      if (family == "spectral") {
        const int rung = c.selection.ladder.empty() ? 0 : c.selection.ladder.front();
        const auto spaces = select_spaces(run_online(pb, c, off, pou, exec), rung_selection(c.selection.online, rung));
        basis = build_coarse_basis(pb.mesh, pb.coarse, spaces, pou);
      } else if (family == "multiscale") {
        basis = pou_coarse_basis(pb.mesh, pb.coarse, multiscale_pou(pb.mesh, pb.coarse, pb.kappa, exec));
      } else if (family == "bilinear") {
        basis = pou_coarse_basis(pb.mesh, pb.coarse, bilinear_pou(pb.mesh, pb.coarse));
      } else {
        throw ConfigError("unknown coarse-space family '" + family + "'");
      }
      PrecondRow row;
      row.eta = eta;
      row.family = family;
      row.dim = basis.dim();
      row.report = run_two_level_pcg(pb, fs.sys, basis, c.solver, nullptr, exec);
      row.iterations = row.report.iterations;
      row.condition = row.report.condition;
      row.converged = row.report.converged;
      out.table.add({fmt(eta), family, fmt(row.dim), fmt(row.iterations), fmt(row.condition),
                     row.converged ? "1" : "0", hash});
      out.rows.push_back(std::move(row));
    }
  }
  return out;
}

EigendecayStudy run_eigendecay_study(const RunConfig& cfg, Execution exec) {
  const std::string hash = config_hash(cfg);
  const auto& ed = cfg.study.eigendecay;
  const Problem pb = build_problem(cfg);
  const FineMesh& mesh = pb.mesh;
  const CellBox target = window_box(mesh, ed.target, "study.eigendecay.target");
  const CellBox ext = window_box(mesh, ed.extended, "study.eigendecay.extended");
  if (!ext.contains(target)) throw ConfigError("study.eigendecay.extended must contain the target window");

  // Unit forces on squares centered on a regular grid, skipping any that touch the target.
  std::vector<std::vector<double>> forces;
  const double* ex = ed.forces_outside_extended ? ed.extended : ed.target;
  const double tx0 = ex[0], tx1 = ex[1], ty0 = ex[2], ty1 = ex[3];
  const int m = static_cast<int>(std::floor(1.0 / ed.force_spacing + 1e-9));
  for (int b = 0; b < m; ++b) {
    for (int a = 0; a < m; ++a) {
      const double cx = (a + 0.5) * ed.force_spacing, cy = (b + 0.5) * ed.force_spacing, h = 0.5 * ed.force_size;
      if (cx + h >= tx0 && cx - h <= tx1 && cy + h >= ty0 && cy - h <= ty1) continue;
      std::vector<double> f(mesh.cell_count(), 0.0);
      int hit = 0;
      for (int j = 0; j < mesh.ny(); ++j) {
        for (int i = 0; i < mesh.nx(); ++i) {
          const double x = (i + 0.5) * mesh.hx(), y = (j + 0.5) * mesh.hy();
          if (std::abs(x - cx) < h && std::abs(y - cy) < h) {
            f[mesh.cell(i, j)] = 1.0;
            ++hit;
          }
        }
      }
      if (hit) forces.push_back(std::move(f));
    }
  }
  if (forces.empty()) throw ConfigError("study.eigendecay: no force square fits outside the target window");

  const SparseMatrix K = assemble_stiffness(mesh, pb.kappa, std::nullopt, exec);
  const DirichletSystem sys = reduce_dirichlet(mesh, K, Vector::Zero(mesh.node_count()), BoundaryCondition::zero());
  Matrix rhs(sys.free_count(), static_cast<int>(forces.size()));
  for (size_t k = 0; k < forces.size(); ++k) rhs.col(k) = sys.restrict_free(assemble_load_cells(mesh, forces[k]));
  const Matrix sol = SparseDirect(sys.A).solve(rhs);
  // The constant joins the snapshots so the kernel of the s-forms is exact.
  Matrix R(ext.node_count(), sol.cols() + 1);
  for (int l = 0; l < ext.node_count(); ++l) {
    const int fi = sys.free_index[mesh.global_node(ext, l)];
    R.block(l, 0, 1, sol.cols()) = fi >= 0 ? Matrix(sol.row(fi)) : Matrix::Zero(1, sol.cols());
    R(l, sol.cols()) = 1.0;
  }

  const PartitionOfUnity wp = window_pou(target);
  struct Choice {
    const char* name;
    AForm a;
    CellBox s_region;
  };
  const std::vector<Choice> choices = {{"a1", AForm::pou_stiffness, target},
                                       {"a2", AForm::kappa_mass, target},
                                       {"a3_t", AForm::kappa_stiffness, target},
                                       {"a3_ext", AForm::kappa_stiffness, ext}};
  EigendecayStudy out;
  out.snapshot_count = static_cast<int>(forces.size());
  out.series.resize(choices.size());
  parallel_for(static_cast<int>(choices.size()), [&](int k) {
    const Choice& ch = choices[k];
    const LocalForms f = assemble_local_forms(mesh, ext, target, ch.s_region, ch.a, pb.kappa, {&wp, nullptr});
    const ReducedSpace rs = reduce_space(R, ext, f.A, f.S, Selection::keep_all(), Stage::offline);
    EigendecaySeries s;
    s.form = ch.name;
    for (int r = 0; r < rs.lambda.size(); ++r) {
      if (std::isfinite(rs.lambda[r])) {
        s.lambda.push_back(rs.lambda[r]);
      } else {
        ++s.infinite;
      }
    }
    if (!s.lambda.empty()) {
      const size_t last = std::min<size_t>(9, s.lambda.size() - 1);
      s.ratio = s.lambda[last] / s.lambda[0];
    }
    out.series[k] = std::move(s);
  }, exec);

  out.table.header = {"form", "rank", "lambda", "config_hash"};
  out.summary.header = {"form", "infinite_count", "finite_count", "lambda_1", "lambda_10", "ratio", "config_hash"};
  for (const auto& s : out.series) {
    const int shown = std::min<int>(ed.ranks, static_cast<int>(s.lambda.size()));
    for (int r = 0; r < shown; ++r) out.table.add({s.form, fmt(r + 1), fmt(s.lambda[r]), hash});
    const double l1 = s.lambda.empty() ? 0.0 : s.lambda[0];
    const double l10 = s.lambda.empty() ? 0.0 : s.lambda[std::min<size_t>(9, s.lambda.size() - 1)];
    out.summary.add({s.form, fmt(s.infinite), fmt(static_cast<int>(s.lambda.size())), fmt(l1), fmt(l10), fmt(s.ratio), hash});
  }
  return out;
}

NonlinearStudy run_nonlinear_study(const RunConfig& cfg, Execution exec) {
  const std::string hash = config_hash(cfg);
  const Problem pb = build_problem(cfg);
  const OfflineStage off = run_offline(pb, cfg, exec);
  const PicardResult ref = picard_fine(pb, cfg, exec);
  const SparseMatrix A = assemble_stiffness(pb.mesh, ref.kappa, std::nullopt, exec);
  const SparseMatrix M = assemble_mass(pb.mesh, ref.kappa, std::nullopt, exec);

  NonlinearStudy out;
  out.reference_iterations = ref.state.iterations;
  out.table.header = {"label", "coarse_dim", "lambda_star", "l2w_pct", "energy_pct", "iterations", "clamped",
                      "config_hash"};
  out.iterations.header = {"label", "iter", "update_energy_norm", "coarse_dim", "config_hash"};
  for (int n : cfg.selection.ladder) {
    const PicardResult r = picard_solve(pb, cfg, off, rung_selection(cfg.selection.online, n), exec);
    const ErrorNorms e = relative_errors(r.state.u, ref.state.u, A, M);
    NonlinearRow row;
    row.label = rung_label(cfg.selection.online, n);
    row.dim = r.dim;
    row.lambda_star = r.lambda_star;
    row.l2w = pct(e.l2w);
    row.energy = pct(e.energy);
    row.iterations = r.state.iterations;
    row.clamped = r.state.clamped;
    row.update_norms = r.state.update_norms;
    row.dims = r.dims;
    out.table.add({row.label, fmt(row.dim), fmt(row.lambda_star), fmt(row.l2w), fmt(row.energy),
                   fmt(row.iterations), fmt(row.clamped), hash});
    for (size_t k = 0; k < row.update_norms.size(); ++k) {
      out.iterations.add({row.label, fmt(static_cast<int>(k + 1)), fmt(row.update_norms[k]), fmt(row.dims[k + 1]), hash});
    }
    out.rows.push_back(std::move(row));
  }
  return out;
}

}  // namespace gmsfem
