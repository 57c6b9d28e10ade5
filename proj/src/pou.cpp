#include "gmsfem/pou.hpp"

#include <cmath>

#include "gmsfem/error.hpp"
#include "gmsfem/fem.hpp"
#include "gmsfem/solvers.hpp"

namespace gmsfem {

namespace {

// 1D hat of coarse node I at fine index g, blocks of b cells.
double hat(int g, int I, int b) {
  const int d = std::abs(g - I * b);
  return d >= b ? 0.0 : 1.0 - static_cast<double>(d) / b;
}

double bilinear_value(const CoarseMesh& coarse, int node, int gi, int gj) {
  return hat(gi, coarse.node_I(node), coarse.block_cells_x()) *
         hat(gj, coarse.node_J(node), coarse.block_cells_y());
}

PartitionOfUnity empty_pou(PouKind kind, const CoarseMesh& coarse) {
  PartitionOfUnity pou;
  pou.kind = kind;
  for (int i = 0; i < coarse.node_count(); ++i) {
    pou.support.push_back(coarse.neighborhood(i));
    pou.chi.push_back(Vector::Zero(pou.support.back().node_count()));
  }
  return pou;
}

// Divide every chi_i by sum_k chi_k nodewise.
void renormalize(const FineMesh& mesh, PartitionOfUnity& pou) {
  const Vector s = pou.sum(mesh);
  for (int i = 0; i < pou.size(); ++i) {
    const CellBox& box = pou.support[i];
    for (int l = 0; l < box.node_count(); ++l) pou.chi[i][l] /= s[mesh.global_node(box, l)];
  }
}

}  // namespace

PouKind parse_pou_kind(const std::string& name) {
  if (name == "bilinear") return PouKind::bilinear;
  if (name == "multiscale" || name == "ms") return PouKind::multiscale;
  if (name == "energy_min" || name == "emf") return PouKind::energy_min;
  throw ConfigError("unknown partition of unity '" + name + "'");
}

std::string to_string(PouKind kind) {
  switch (kind) {
    case PouKind::bilinear: return "bilinear";
    case PouKind::multiscale: return "multiscale";
    default: return "energy_min";
  }
}

Vector PartitionOfUnity::global(const FineMesh& mesh, int i) const {
  Vector g = Vector::Zero(mesh.node_count());
  const CellBox& box = support[i];
  for (int l = 0; l < box.node_count(); ++l) g[mesh.global_node(box, l)] = chi[i][l];
  return g;
}

Vector PartitionOfUnity::sum(const FineMesh& mesh) const {
  Vector s = Vector::Zero(mesh.node_count());
  for (int i = 0; i < size(); ++i) {
    const CellBox& box = support[i];
    for (int l = 0; l < box.node_count(); ++l) s[mesh.global_node(box, l)] += chi[i][l];
  }
  return s;
}

PartitionOfUnity bilinear_pou(const FineMesh& mesh, const CoarseMesh& coarse) {
  PartitionOfUnity pou = empty_pou(PouKind::bilinear, coarse);
  (void)mesh;
  for (int i = 0; i < pou.size(); ++i) {
    const CellBox& box = pou.support[i];
    for (int l = 0; l < box.node_count(); ++l) {
      pou.chi[i][l] = bilinear_value(coarse, i, box.local_i(l), box.local_j(l));
    }
  }
  return pou;
}

std::vector<int> pou_free_nodes(const FineMesh& mesh, const CoarseMesh& coarse, int i) {
  (void)mesh;
  const CellBox box = coarse.neighborhood(i);
  std::vector<int> free;
  for (int l = 0; l < box.node_count(); ++l) {
    if (bilinear_value(coarse, i, box.local_i(l), box.local_j(l)) > 0.0) free.push_back(l);
  }
  return free;
}

PartitionOfUnity multiscale_pou(const FineMesh& mesh, const CoarseMesh& coarse,
                                const CoefficientField& kappa, Execution exec) {
  kappa.check_compatible(mesh);
  PartitionOfUnity pou = empty_pou(PouKind::multiscale, coarse);
  // Per block: values of its four corner functions on the block's nodes.
  std::vector<std::array<Vector, 4>> local(coarse.block_count());
  parallel_for(
      coarse.block_count(),
      [&](int K) {
        const CellBox box = coarse.block_box(K);
        const SparseMatrix A = assemble_stiffness(mesh, kappa, box, Execution::serial);
        std::vector<int> inner, outer;
        for (int l = 0; l < box.node_count(); ++l) (box.on_boundary(l) ? outer : inner).push_back(l);
        const SparseMatrix A_ii = submatrix(A, inner);
        std::vector<int> pos(box.node_count(), -1);
        for (size_t a = 0; a < outer.size(); ++a) pos[outer[a]] = static_cast<int>(a);
        SparseDirect solver(A_ii);
        const auto corners = coarse.block_corners(K);
        Matrix rhs = Matrix::Zero(static_cast<int>(inner.size()), 4);
        for (int c = 0; c < 4; ++c) {
          Vector& v = local[K][c];
          v = Vector::Zero(box.node_count());
          for (int l : outer) v[l] = bilinear_value(coarse, corners[c], box.local_i(l), box.local_j(l));
          const Vector Av = A * v;
          for (size_t a = 0; a < inner.size(); ++a) rhs(static_cast<int>(a), c) = -Av[inner[a]];
        }
        const Matrix sol = solver.solve(rhs);
        for (int c = 0; c < 4; ++c) {
          for (size_t a = 0; a < inner.size(); ++a) local[K][c][inner[a]] = sol(static_cast<int>(a), c);
        }
      },
      exec);
  for (int K = 0; K < coarse.block_count(); ++K) {
    const CellBox box = coarse.block_box(K);
    const auto corners = coarse.block_corners(K);
    for (int c = 0; c < 4; ++c) {
      const CellBox& omega = pou.support[corners[c]];
      for (int l = 0; l < box.node_count(); ++l) {
        pou.chi[corners[c]][omega.local_node(box.local_i(l), box.local_j(l))] = local[K][c][l];
      }
    }
  }
  renormalize(mesh, pou);
  return pou;
}

PartitionOfUnity energy_min_pou(const FineMesh& mesh, const CoarseMesh& coarse,
                                const CoefficientField& kappa, const EnergyMinOptions& options,
                                EnergyMinReport* report, Execution exec) {
  kappa.check_compatible(mesh);
  PartitionOfUnity pou = empty_pou(PouKind::energy_min, coarse);
  const int nv = coarse.node_count();
  std::vector<std::vector<int>> free_local(nv), free_global(nv);
  std::vector<SparseDirect> solvers(nv);
  parallel_for(
      nv,
      [&](int i) {
        const CellBox& box = pou.support[i];
        free_local[i] = pou_free_nodes(mesh, coarse, i);
        for (int l : free_local[i]) free_global[i].push_back(mesh.global_node(box, l));
        solvers[i] = SparseDirect(submatrix(assemble_stiffness(mesh, kappa, box, Execution::serial),
                                            free_local[i]));
      },
      exec);

  const int n = mesh.node_count();
  const LinearOperator T = [&](const Vector& p, Vector& y) {
    std::vector<Vector> parts(nv);
    parallel_for(
        nv,
        [&](int i) {
          const auto& g = free_global[i];
          Vector r(g.size());
          for (size_t a = 0; a < g.size(); ++a) r[static_cast<int>(a)] = p[g[a]];
          parts[i] = solvers[i].solve(r);
        },
        exec);
    y = Vector::Zero(n);
    for (int i = 0; i < nv; ++i) {
      for (size_t a = 0; a < free_global[i].size(); ++a) y[free_global[i][a]] += parts[i][static_cast<int>(a)];
    }
  };
  const double H = std::max(1.0 / coarse.Nx(), 1.0 / coarse.Ny());
  const SparseMatrix precond =
      assemble_stiffness(mesh, kappa, std::nullopt, exec) + assemble_mass(mesh, kappa, std::nullopt, exec) / (H * H);
  const Preconditioner M = [&](const Vector& r, Vector& z) { z.noalias() = precond * r; };
  const int max_it = options.max_it > 0 ? options.max_it : 10 * n;
  const PcgResult res = pcg(T, Vector::Ones(n), M, options.tol, max_it);
  if (report) {
    report->iterations = res.report.iterations;
    report->residual = res.report.residuals.back();
  }
  if (!res.report.converged) {
    throw NumericalError("energy-minimizing POU: multiplier CG stopped after " +
                         std::to_string(res.report.iterations) + " iterations at residual " +
                         std::to_string(res.report.residuals.back()));
  }
  parallel_for(
      nv,
      [&](int i) {
        const auto& g = free_global[i];
        Vector r(g.size());
        for (size_t a = 0; a < g.size(); ++a) r[static_cast<int>(a)] = res.x[g[a]];
        const Vector c = solvers[i].solve(r);
        for (size_t a = 0; a < g.size(); ++a) pou.chi[i][free_local[i][a]] = c[static_cast<int>(a)];
      },
      exec);
  renormalize(mesh, pou);
  return pou;
}

PartitionOfUnity build_pou(PouKind kind, const FineMesh& mesh, const CoarseMesh& coarse,
                           const CoefficientField& kappa, Execution exec) {
  switch (kind) {
    case PouKind::bilinear: return bilinear_pou(mesh, coarse);
    case PouKind::multiscale: return multiscale_pou(mesh, coarse, kappa, exec);
    default: return energy_min_pou(mesh, coarse, kappa, {}, nullptr, exec);
  }
}

double pou_energy(const FineMesh& mesh, const PartitionOfUnity& pou, const CoefficientField& kappa) {
  double e = 0.0;
  for (int i = 0; i < pou.size(); ++i) {
    const SparseMatrix A = assemble_stiffness(mesh, kappa, pou.support[i], Execution::serial);
    e += pou.chi[i].dot(A * pou.chi[i]);
  }
  return e;
}

std::vector<double> pou_tilde_kappa(const FineMesh& mesh, const PartitionOfUnity& pou,
                                    const CoefficientField& kappa) {
  kappa.check_compatible(mesh);
  std::vector<double> w(mesh.triangle_count(), 0.0);
  for (int i = 0; i < pou.size(); ++i) {
    const CellBox& box = pou.support[i];
    for (int j = box.j0; j < box.j1; ++j) {
      for (int ci = box.i0; ci < box.i1; ++ci) {
        const int c = mesh.cell(ci, j);
        for (int t : {2 * c, 2 * c + 1}) {
          const auto g = triangle_gradients(mesh, t);
          double gx = 0.0, gy = 0.0;
          for (int a = 0; a < 3; ++a) {
            const int v = mesh.triangles()[t][a];
            const double x = pou.chi[i][box.local_node(mesh.node_i(v), mesh.node_j(v))];
            gx += x * g(a, 0);
            gy += x * g(a, 1);
          }
          w[t] += kappa.xx(c) * gx * gx + kappa.yy(c) * gy * gy;
        }
      }
    }
  }
  return w;
}

}  // namespace gmsfem
