#include "gmsfem/nonlinear.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "gmsfem/error.hpp"

namespace gmsfem {

namespace {

// Exact P1 integral of u over fine cell (i, j), both triangles.
double cell_integral(const FineMesh& mesh, const Vector& u, int i, int j) {
  const double bl = u[mesh.node(i, j)], br = u[mesh.node(i + 1, j)];
  const double tr = u[mesh.node(i + 1, j + 1)], tl = u[mesh.node(i, j + 1)];
  return mesh.hx() * mesh.hy() / 6.0 * (2.0 * bl + br + 2.0 * tr + tl);
}

double box_average(const FineMesh& mesh, const Vector& u, const CellBox& box) {
  double s = 0.0;
  for (int j = box.j0; j < box.j1; ++j) {
    for (int i = box.i0; i < box.i1; ++i) s += cell_integral(mesh, u, i, j);
  }
  return s / (box.cell_count() * mesh.hx() * mesh.hy());
}

double energy(const SparseMatrix& A, const Vector& v) { return std::sqrt(std::max(0.0, v.dot(A * v))); }

struct Step {
  std::vector<double> averages;
  CoefficientField kappa;
  int clamped = 0;
};

Step freeze(const Problem& pb, const RunConfig& cfg, const Vector& u) {
  Step s;
  s.averages = block_average(pb.mesh, pb.coarse, u);
  const double lo = pb.aff.lo[0], hi = pb.aff.hi[0];
  for (double& a : s.averages) {
    const double c = std::clamp(a, lo, hi);
    if (c != a) ++s.clamped;
    a = c;
  }
  auto mu = block_parameters(pb.mesh, pb.coarse, u, s.averages, cfg.study.nonlinear.freeze);
  for (double& m : mu) {
    const double c = std::clamp(m, lo, hi);
    if (c != m) ++s.clamped;
    m = c;
  }
  s.kappa = frozen_coefficient(pb.aff, pb.coarse, mu);
  return s;
}

void check_field(const Problem& pb) {
  if (pb.aff.p != 1 || pb.aff.lo.size() != 1 || pb.aff.hi.size() != 1)
    throw ConfigError("the Picard iteration needs a one-parameter field with a bounded range");
}

// Appends the update norm and reports whether to stop.
bool record(PicardState& st, const RunConfig& cfg, double update) {
  st.update_norms.push_back(update);
  const auto& h = st.update_norms;
  if (h.size() >= 4 && h[h.size() - 1] > h[h.size() - 2] && h[h.size() - 2] > h[h.size() - 3] &&
      h[h.size() - 3] > h[h.size() - 4])
    throw NumericalError("Picard iteration diverges: update norm grew three steps in a row (iteration " +
                         std::to_string(st.iterations) + ")");
  st.converged = update <= cfg.study.nonlinear.tol;
  return st.converged;
}

}  // namespace

std::vector<double> block_average(const FineMesh& mesh, const CoarseMesh& coarse, const Vector& u) {
  std::vector<double> out(coarse.node_count());
  for (int n = 0; n < coarse.node_count(); ++n) out[n] = box_average(mesh, u, coarse.neighborhood(n));
  return out;
}

std::vector<double> cell_average(const FineMesh& mesh, const CoarseMesh& coarse, const Vector& u) {
  std::vector<double> out(coarse.block_count());
  for (int K = 0; K < coarse.block_count(); ++K) out[K] = box_average(mesh, u, coarse.block_box(K));
  return out;
}

std::vector<double> block_parameters(const FineMesh& mesh, const CoarseMesh& coarse, const Vector& u,
                                     const std::vector<double>& node_averages, FreezeMode mode) {
  if (mode == FreezeMode::cell_average) return cell_average(mesh, coarse, u);
  std::vector<double> out(coarse.block_count());
  for (int K = 0; K < coarse.block_count(); ++K) {
    double s = 0.0;
    for (int n : coarse.block_corners(K)) s += node_averages[n];
    out[K] = 0.25 * s;
  }
  return out;
}

CoefficientField frozen_coefficient(const AffineCoefficient& aff, const CoarseMesh& coarse,
                                    const std::vector<double>& block_mu) {
  if (aff.terms.empty()) throw ConfigError("affine coefficient has no terms");
  if (static_cast<int>(block_mu.size()) != coarse.block_count())
    throw ConfigError("one parameter per coarse block required");
  const CoefficientField& first = aff.terms.front().field;
  bool tensor = false;
  for (const auto& t : aff.terms) tensor = tensor || t.field.is_tensor();
  std::vector<std::vector<double>> theta(block_mu.size());
  for (size_t K = 0; K < block_mu.size(); ++K) theta[K] = aff.thetas({block_mu[K]});

  CoefficientField out = CoefficientField::constant(first.nx, first.ny, 0.0);
  if (tensor) out.k22.assign(out.k11.size(), 0.0);
  // Same accumulation order as combine(), so a uniform parameter gives identical bits.
  for (size_t q = 0; q < aff.terms.size(); ++q) {
    const CoefficientField& f = aff.terms[q].field;
    for (int j = 0; j < out.ny; ++j) {
      for (int i = 0; i < out.nx; ++i) {
        const int c = j * out.nx + i;
        const double th = theta[coarse.block_of_cell(i, j)][q];
        out.k11[c] += th * f.xx(c);
        if (tensor) out.k22[c] += th * f.yy(c);
      }
    }
  }
  for (int c = 0; c < out.cell_count(); ++c) {
    if (!(out.k11[c] > 0.0) || (tensor && !(out.k22[c] > 0.0)))
      throw NumericalError("frozen coefficient is not positive at cell " + std::to_string(c));
  }
  return out;
}

PicardResult picard_solve(const Problem& pb, const RunConfig& cfg, const OfflineStage& off,
                          const Selection& sel, Execution exec) {
  check_field(pb);
  const auto& nodes = pb.coarse.interior_nodes();
  PicardResult res;
  PicardState& st = res.state;

  {
    const PartitionOfUnity pou = online_pou(pb, cfg, off, exec);
    const auto spaces = select_spaces(run_online(pb, cfg, off, pou, exec), sel, &res.lambda_star);
    const FineSystem fs = fine_system(pb, pb.kappa, &pou);
    const GmsResult g = solve_with_spaces(pb, cfg, fs, spaces, pou, exec);
    st.u = g.u;
    res.dim = g.dim;
    res.dims.push_back(g.dim);
    res.kappa = pb.kappa;
  }

  while (st.iterations < cfg.study.nonlinear.max_it) {
    Step s = freeze(pb, cfg, st.u);
    st.clamped += s.clamped;
    st.averages = s.averages;

    // One coefficient per distinct node average.
    std::map<double, int> index;
    std::vector<CoefficientField> fields;
    std::vector<int> which(nodes.size());
    for (size_t k = 0; k < nodes.size(); ++k) {
      const double mu = s.averages[nodes[k]];
      auto it = index.find(mu);
      if (it == index.end()) {
        it = index.emplace(mu, static_cast<int>(fields.size())).first;
        fields.push_back(evaluate(pb.aff, {mu}));
      }
      which[k] = it->second;
    }
    std::vector<const CoefficientField*> node_kappa(nodes.size());
    for (size_t k = 0; k < nodes.size(); ++k) node_kappa[k] = &fields[which[k]];

    const PartitionOfUnity pou = build_pou(cfg.pou, pb.mesh, pb.coarse, s.kappa, exec);
    const auto spaces = select_spaces(run_online(pb, cfg, off, node_kappa, pou, exec), sel, &res.lambda_star);
    const FineSystem fs = fine_system(pb, s.kappa, &pou);
    const GmsResult g = solve_with_spaces(pb, cfg, fs, spaces, pou, exec);

    const double update = energy(fs.A_kappa, g.u - st.u) / std::max(energy(fs.A_kappa, g.u), 1e-300);
    st.u = g.u;
    ++st.iterations;
    res.dim = g.dim;
    res.dims.push_back(g.dim);
    res.kappa = std::move(s.kappa);
    if (record(st, cfg, update)) break;
  }
  return res;
}

PicardResult picard_fine(const Problem& pb, const RunConfig& cfg, Execution) {
  check_field(pb);
  PicardResult res;
  PicardState& st = res.state;
  st.u = fine_solve(fine_system(pb, pb.kappa));
  res.kappa = pb.kappa;
  while (st.iterations < cfg.study.nonlinear.max_it) {
    Step s = freeze(pb, cfg, st.u);
    st.clamped += s.clamped;
    st.averages = s.averages;
    const FineSystem fs = fine_system(pb, s.kappa);
    const Vector u = fine_solve(fs);
    const double update = energy(fs.A_kappa, u - st.u) / std::max(energy(fs.A_kappa, u), 1e-300);
    st.u = u;
    ++st.iterations;
    res.kappa = std::move(s.kappa);
    if (record(st, cfg, update)) break;
  }
  res.dim = pb.mesh.node_count() - static_cast<int>(pb.mesh.boundary_nodes().size());
  res.dims.assign(st.iterations + 1, res.dim);
  return res;
}

}  // namespace gmsfem
