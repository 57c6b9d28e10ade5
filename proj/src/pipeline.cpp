#include "gmsfem/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "gmsfem/error.hpp"

namespace gmsfem {

AffineCoefficient build_affine(const FineMesh& mesh, const RunConfig& cfg) {
  const FieldConfig& f = cfg.field;
  switch (f.source) {
    case FieldSource::preset:
    case FieldSource::file: {
      CoefficientField k = f.source == FieldSource::preset
                               ? generate_inclusions_channels(mesh, preset_geometry(f.preset), f.eta)
                               : read_field(f.path);
      k.check_compatible(mesh);
      if (f.tensor && !k.is_tensor()) k = anisotropic_from_scalar(k);
      return single_term(std::move(k));
    }
    case FieldSource::affine_four: return affine_four(mesh, f.eta);
    case FieldSource::anisotropic_pair: return anisotropic_pair(mesh, f.eta);
    case FieldSource::exponential_pair: {
      AffineCoefficient aff = exponential_pair(mesh, f.eta, f.alpha);
      aff.lo = {cfg.study.nonlinear.lo};
      aff.hi = {cfg.study.nonlinear.hi};
      return aff;
    }
  }
  throw ConfigError("unknown field source");
}

Problem build_problem(const RunConfig& cfg) {
  FineMesh mesh(cfg.mesh.nx, cfg.mesh.ny);
  CoarseMesh coarse(mesh, cfg.mesh.Nx, cfg.mesh.Ny, cfg.mesh.pad);
  AffineCoefficient aff = build_affine(mesh, cfg);
  std::vector<double> mu = cfg.params.online;
  if (mu.empty() && aff.p > 0) {
    if (aff.lo.empty() || aff.hi.empty()) throw ConfigError("parameters.online is required for this field");
    for (int j = 0; j < aff.p; ++j) mu.push_back(0.5 * (aff.lo[j] + aff.hi[j]));
  }
  if (static_cast<int>(mu.size()) != aff.p) throw ConfigError("parameters.online has the wrong dimension");
  CoefficientField kappa = evaluate(aff, mu);
  BoundaryCondition bc = cfg.bc == BoundaryKind::zero ? BoundaryCondition::zero() : BoundaryCondition::linear_xy();
  return Problem{std::move(mesh), std::move(coarse), std::move(aff), std::move(mu), std::move(kappa), bc, cfg.source};
}

std::vector<std::vector<double>> offline_samples(const Problem& pb, const RunConfig& cfg) {
  if (pb.aff.p == 0) return {{}};
  std::vector<std::vector<double>> samples = cfg.params.samples;
  if (samples.empty() && cfg.field.source == FieldSource::exponential_pair) {
    const auto& nl = cfg.study.nonlinear;
    for (int k = 0; k < nl.samples; ++k) samples.push_back({nl.lo + (nl.hi - nl.lo) * k / (nl.samples - 1)});
  }
  if (samples.empty()) throw ConfigError("parameters.samples is required for a parametric field");
  for (const auto& s : samples) {
    if (!pb.aff.admissible(s)) throw ConfigError("parameters.samples: point outside the admissible box");
  }
  return samples;
}

std::vector<double> offline_weights(const RunConfig& cfg, size_t count) {
  std::vector<double> t = cfg.params.weights.size() == count ? cfg.params.weights : std::vector<double>(count, 1.0);
  double sum = 0.0;
  for (double v : t) sum += v;
  for (double& v : t) v /= sum;
  return t;
}

CellBox space_box(const Problem& pb, const RunConfig& cfg, int node) {
  return cfg.forms.s_extended ? pb.coarse.extended_neighborhood(node) : pb.coarse.neighborhood(node);
}

LocalForms node_forms(const Problem& pb, const RunConfig& cfg, int node, const CoefficientField& kappa,
                      const PartitionOfUnity& pou, const std::vector<double>& tilde_kappa) {
  const CellBox box = space_box(pb, cfg, node);
  return assemble_local_forms(pb.mesh, box, pb.coarse.neighborhood(node), box, cfg.forms.a, kappa,
                              {&pou, &tilde_kappa});
}

SnapshotSpace node_snapshots(const Problem& pb, const RunConfig& cfg, int node,
                             const std::vector<CoefficientField>& samples) {
  const CellBox box = space_box(pb, cfg, node);
  switch (cfg.snapshots.kind) {
    case SnapshotKind::fine_grid: return fine_grid_snapshots(box, node);
    case SnapshotKind::harmonic: return harmonic_snapshots(pb.mesh, box, samples, node);
    case SnapshotKind::local_spectral:
      return spectral_snapshots(pb.mesh, box, samples, cfg.snapshots.count, node);
  }
  throw ConfigError("unknown snapshot kind");
}

namespace {

std::vector<double> tilde_weights(const Problem& pb, const RunConfig& cfg, const PartitionOfUnity& pou,
                                  const CoefficientField& kappa) {
  if (cfg.forms.a != AForm::tilde_kappa_mass) return {};
  return pou_tilde_kappa(pb.mesh, pou, kappa);
}

SparseMatrix unit_h1(const FineMesh& mesh, const CellBox& box) {
  const CoefficientField one = CoefficientField::constant(mesh.nx(), mesh.ny(), 1.0);
  const std::vector<double> w(mesh.cell_count(), 1.0);
  return assemble_stiffness(mesh, one, box, Execution::serial) + assemble_mass(mesh, w, box, Execution::serial);
}

}  // namespace

OfflineStage run_offline(const Problem& pb, const RunConfig& cfg, Execution exec) {
  const auto samples = offline_samples(pb, cfg);
  const auto weights = offline_weights(cfg, samples.size());
  std::vector<CoefficientField> fields;
  for (const auto& mu : samples) fields.push_back(evaluate(pb.aff, mu));
  const auto& nodes = pb.coarse.interior_nodes();
  const int n = static_cast<int>(nodes.size());

  OfflineStage off;
  off.spaces.resize(n);
  std::vector<int> columns(n, 0);
  const bool use_union = pb.aff.p > 0 && cfg.params.offline_mode == OfflineMode::union_of_samples;
  std::vector<double> theta(pb.aff.terms.size(), 0.0);
  for (size_t l = 0; l < samples.size(); ++l) {
    const auto th = pb.aff.thetas(samples[l]);
    for (size_t q = 0; q < th.size(); ++q) theta[q] += weights[l] * th[q];
  }
  const CoefficientField kbar = pb.aff.p == 0 ? fields.front() : combine(pb.aff, theta);
  off.pou = build_pou(cfg.pou, pb.mesh, pb.coarse, kbar, exec);
  if (!use_union) {
    const auto tk = tilde_weights(pb, cfg, off.pou, kbar);
    parallel_for(n, [&](int k) {
      const SnapshotSpace snap = node_snapshots(pb, cfg, nodes[k], fields);
      columns[k] = snap.size();
      off.spaces[k] = build_offline(snap, node_forms(pb, cfg, nodes[k], kbar, off.pou, tk), cfg.selection.offline);
    }, exec);
  } else {
    std::vector<PartitionOfUnity> pous;
    std::vector<std::vector<double>> tks;
    for (const auto& f : fields) {
      pous.push_back(build_pou(cfg.pou, pb.mesh, pb.coarse, f, exec));
      tks.push_back(tilde_weights(pb, cfg, pous.back(), f));
    }
    parallel_for(n, [&](int k) {
      const SnapshotSpace snap = node_snapshots(pb, cfg, nodes[k], fields);
      columns[k] = snap.size();
      std::vector<LocalForms> forms;
      for (size_t l = 0; l < fields.size(); ++l) {
        forms.push_back(node_forms(pb, cfg, nodes[k], fields[l], pous[l], tks[l]));
      }
      off.spaces[k] = build_offline_union(snap, forms, cfg.selection.offline, unit_h1(pb.mesh, snap.box));
    }, exec);
  }
  for (int c : columns) off.snapshot_columns += c;
  return off;
}

PartitionOfUnity online_pou(const Problem& pb, const RunConfig& cfg, const OfflineStage& off, Execution exec) {
  if ((pb.aff.p == 0 || cfg.params.pou_stage == PouStage::offline) && off.pou.size() > 0) return off.pou;
  return build_pou(cfg.pou, pb.mesh, pb.coarse, pb.kappa, exec);
}

std::vector<ReducedSpace> run_online(const Problem& pb, const RunConfig& cfg, const OfflineStage& off,
                                     const std::vector<const CoefficientField*>& node_kappa,
                                     const PartitionOfUnity& pou, Execution exec) {
  const auto& nodes = pb.coarse.interior_nodes();
  const int n = static_cast<int>(nodes.size());
  if (static_cast<int>(node_kappa.size()) != n || static_cast<int>(off.spaces.size()) != n)
    throw ConfigError("online stage: one coefficient and one offline space per interior node required");
  std::vector<ReducedSpace> out(n);
  if (pb.aff.p == 0) {
    // Same pencil as offline: the online spectrum is the offline one.
    for (int k = 0; k < n; ++k) {
      out[k] = off.spaces[k];
      out[k].stage = Stage::online;
    }
    return out;
  }
  // Tilde weights are shared between nodes that use the same coefficient.
  std::vector<int> owner(n);
  std::vector<std::vector<double>> tks;
  std::vector<const CoefficientField*> seen;
  for (int k = 0; k < n; ++k) {
    const auto it = std::find(seen.begin(), seen.end(), node_kappa[k]);
    if (it != seen.end()) {
      owner[k] = static_cast<int>(it - seen.begin());
    } else {
      owner[k] = static_cast<int>(seen.size());
      seen.push_back(node_kappa[k]);
    }
  }
  tks.resize(seen.size());
  parallel_for(static_cast<int>(seen.size()), [&](int s) { tks[s] = tilde_weights(pb, cfg, pou, *seen[s]); }, exec);
  parallel_for(n, [&](int k) {
    const LocalForms forms = node_forms(pb, cfg, nodes[k], *node_kappa[k], pou, tks[owner[k]]);
    out[k] = build_online(off.spaces[k], forms, Selection::keep_all());
  }, exec);
  return out;
}

std::vector<ReducedSpace> run_online(const Problem& pb, const RunConfig& cfg, const OfflineStage& off,
                                     const PartitionOfUnity& pou, Execution exec) {
  const std::vector<const CoefficientField*> kappas(pb.coarse.interior_nodes().size(), &pb.kappa);
  return run_online(pb, cfg, off, kappas, pou, exec);
}

std::vector<ReducedSpace> select_spaces(const std::vector<ReducedSpace>& full, const Selection& sel,
                                        double* lambda_star) {
  std::vector<ReducedSpace> out;
  out.reserve(full.size());
  double star = 0.0;
  for (const auto& s : full) {
    const int m = std::min(selected_count(s.lambda, sel), s.size());
    out.push_back(s.truncated(m));
    star = std::max(star, out.back().lambda_star);
  }
  if (lambda_star) *lambda_star = star;
  return out;
}

FineSystem fine_system(const Problem& pb, const CoefficientField& kappa, const PartitionOfUnity* pou) {
  FineSystem fs;
  fs.kappa = kappa;
  fs.A_kappa = assemble_stiffness(pb.mesh, kappa);
  fs.M_kappa = assemble_mass(pb.mesh, kappa);
  const Vector lift = pou ? pou_lift(pb.mesh, pb.coarse, *pou, pb.bc) : Vector();
  fs.sys = reduce_dirichlet(pb.mesh, fs.A_kappa, assemble_load(pb.mesh, pb.source), pb.bc, lift);
  return fs;
}

Vector fine_solve(const FineSystem& fs) { return fs.sys.expand(SparseDirect(fs.sys.A).solve(fs.sys.b)); }

std::vector<std::vector<int>> subdomain_dofs(const Problem& pb, const DirichletSystem& sys, int layers) {
  const OverlapDecomposition ov = build_overlap(pb.mesh, pb.coarse, layers);
  std::vector<std::vector<int>> dofs;
  for (const auto& nodes : ov.interior_nodes) {
    std::vector<int> d;
    for (int g : nodes) {
      if (sys.free_index[g] >= 0) d.push_back(sys.free_index[g]);
    }
    dofs.push_back(std::move(d));
  }
  return dofs;
}

PcgReport run_two_level_pcg(const Problem& pb, const DirichletSystem& sys, const CoarseBasis& basis,
                            const SolverConfig& solver, Vector* solution, Execution exec) {
  const TwoLevelPreconditioner B(sys.A, free_rows(basis.P, sys), subdomain_dofs(pb, sys, solver.overlap), exec);
  PcgResult r = pcg(sys.A, sys.b, B.as_function(), solver.tol, solver.max_it);
  if (solution) *solution = sys.expand(r.x);
  return r.report;
}

GmsResult solve_with_spaces(const Problem& pb, const RunConfig& cfg, const FineSystem& fs,
                            const std::vector<ReducedSpace>& spaces, const PartitionOfUnity& pou,
                            Execution exec) {
  GmsResult res;
  switch (cfg.coupling.kind) {
    case CouplingKind::galerkin: {
      const CoarseBasis basis = build_coarse_basis(pb.mesh, pb.coarse, spaces, pou, CouplingMode::galerkin);
      res.dim = basis.dim();
      if (cfg.solver.kind == SolverKind::pcg) {
        res.pcg = run_two_level_pcg(pb, fs.sys, basis, cfg.solver, &res.u, exec);
        if (!res.pcg->converged) throw NumericalError("PCG did not converge within solver.max_it iterations");
      } else {
        res.u = solve_coarse_galerkin(fs.sys, basis).u;
      }
      break;
    }
    case CouplingKind::petrov_galerkin: {
      const CoarseBasis basis = build_coarse_basis(pb.mesh, pb.coarse, spaces, pou, CouplingMode::petrov_galerkin);
      res.dim = basis.dim();
      res.u = solve_coarse_pg(fs.sys, basis).u;
      break;
    }
    case CouplingKind::dg: {
      const auto bases = block_bases_from_spaces(pb.coarse, spaces);
      const DGSolution dg = solve_dg(pb.mesh, pb.coarse, bases, fs.kappa, {cfg.coupling.penalty}, pb.source, pb.bc);
      res.dim = static_cast<int>(dg.c.size());
      // Nodal average of the block copies gives a continuous field for error reporting.
      Vector sum = Vector::Zero(pb.mesh.node_count()), cnt = Vector::Zero(pb.mesh.node_count());
      const BrokenSpace br = broken_space(pb.coarse);
      for (int K = 0; K < pb.coarse.block_count(); ++K) {
        const CellBox box = pb.coarse.block_box(K);
        for (int l = 0; l < box.node_count(); ++l) {
          const int g = pb.mesh.global_node(box, l);
          sum[g] += dg.broken[br.offsets[K] + l];
          cnt[g] += 1.0;
        }
      }
      res.u = sum.cwiseQuotient(cnt);
      break;
    }
  }
  return res;
}

}  // namespace gmsfem
