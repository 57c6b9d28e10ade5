#include "gmsfem/fem.hpp"

#include <map>
#include <string>

#include "gmsfem/error.hpp"

namespace gmsfem {

namespace {

// Triangles inside the region, in the canonical order (cells row-major, lower
// triangle first).
std::vector<int> region_triangles(const FineMesh& mesh, const CellBox& box) {
  std::vector<int> tris;
  tris.reserve(2 * box.cell_count());
  for (int j = box.j0; j < box.j1; ++j) {
    for (int i = box.i0; i < box.i1; ++i) {
      const int c = mesh.cell(i, j);
      tris.push_back(2 * c);
      tris.push_back(2 * c + 1);
    }
  }
  return tris;
}

struct Layout {
  CellBox box;
  bool local;
  int dim;
  int index(const FineMesh& mesh, int node) const {
    return local ? box.local_node(mesh.node_i(node), mesh.node_j(node)) : node;
  }
};

Layout make_layout(const FineMesh& mesh, const std::optional<CellBox>& region) {
  if (!region) return {mesh.whole(), false, mesh.node_count()};
  const CellBox& b = *region;
  if (!mesh.whole().contains(b) || b.cells_x() < 1 || b.cells_y() < 1) {
    throw ConfigError("assembly region outside the mesh or empty");
  }
  return {b, true, b.node_count()};
}

using ElementMatrix = Eigen::Matrix3d;

ElementMatrix stiffness_element(const FineMesh& mesh, const CoefficientField& kappa, int t) {
  const auto g = triangle_gradients(mesh, t);
  const double area = triangle_area(mesh, t);
  const int c = t / 2;
  ElementMatrix K;
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      K(a, b) = area * (kappa.xx(c) * g(a, 0) * g(b, 0) + kappa.yy(c) * g(a, 1) * g(b, 1));
    }
  }
  return K;
}

ElementMatrix mass_element(const FineMesh& mesh, const std::vector<double>& weight, int t) {
  const double w = static_cast<int>(weight.size()) == mesh.triangle_count() ? weight[t] : weight[t / 2];
  const double s = triangle_area(mesh, t) / 12.0 * w;
  ElementMatrix M;
  M.setConstant(s);
  M.diagonal().setConstant(2.0 * s);
  return M;
}

void check_weight(const FineMesh& mesh, const std::vector<double>& weight) {
  const int n = static_cast<int>(weight.size());
  if (n != mesh.cell_count() && n != mesh.triangle_count()) {
    throw ConfigError("mass weight has " + std::to_string(n) + " entries, expected " +
                      std::to_string(mesh.cell_count()) + " cells or " +
                      std::to_string(mesh.triangle_count()) + " triangles");
  }
}

template <class ElementFn>
SparseMatrix assemble_parallel(const FineMesh& mesh, const Layout& layout, ElementFn element,
                               Execution exec) {
  const std::vector<int> tris = region_triangles(mesh, layout.box);
  std::vector<Triplet> slots(9 * tris.size());
  parallel_for(
      static_cast<int>(tris.size()),
      [&](int k) {
        const int t = tris[k];
        const ElementMatrix E = element(t);
        const auto& v = mesh.triangles()[t];
        for (int a = 0; a < 3; ++a) {
          for (int b = 0; b < 3; ++b) {
            slots[9 * k + 3 * a + b] =
                Triplet(layout.index(mesh, v[a]), layout.index(mesh, v[b]), E(a, b));
          }
        }
      },
      exec);
  SparseMatrix A(layout.dim, layout.dim);
  A.setFromTriplets(slots.begin(), slots.end());
  return A;
}

template <class ElementFn>
SparseMatrix assemble_reference(const FineMesh& mesh, const Layout& layout, ElementFn element) {
  std::vector<std::map<int, double>> rows(layout.dim);
  for (int t : region_triangles(mesh, layout.box)) {
    const ElementMatrix E = element(t);
    const auto& v = mesh.triangles()[t];
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) rows[layout.index(mesh, v[a])][layout.index(mesh, v[b])] += E(a, b);
    }
  }
  std::vector<Triplet> trips;
  for (int r = 0; r < layout.dim; ++r) {
    for (const auto& [col, val] : rows[r]) trips.emplace_back(r, col, val);
  }
  SparseMatrix A(layout.dim, layout.dim);
  A.setFromTriplets(trips.begin(), trips.end());
  return A;
}

}  // namespace

Eigen::Matrix<double, 3, 2> triangle_gradients(const FineMesh& mesh, int t) {
  const auto& v = mesh.triangles()[t];
  const Point p0 = mesh.coord(v[0]), p1 = mesh.coord(v[1]), p2 = mesh.coord(v[2]);
  Eigen::Matrix2d J;
  J << p1.x - p0.x, p2.x - p0.x, p1.y - p0.y, p2.y - p0.y;
  const Eigen::Matrix2d Jit = J.inverse().transpose();
  Eigen::Matrix<double, 3, 2> ref;
  ref << -1, -1, 1, 0, 0, 1;
  return (Jit * ref.transpose()).transpose();
}

double triangle_area(const FineMesh& mesh, int /*t*/) { return 0.5 * mesh.hx() * mesh.hy(); }

SparseMatrix assemble_stiffness(const FineMesh& mesh, const CoefficientField& kappa,
                                const std::optional<CellBox>& region, Execution exec) {
  kappa.check_compatible(mesh);
  return assemble_parallel(
      mesh, make_layout(mesh, region), [&](int t) { return stiffness_element(mesh, kappa, t); }, exec);
}

SparseMatrix assemble_mass(const FineMesh& mesh, const std::vector<double>& weight,
                           const std::optional<CellBox>& region, Execution exec) {
  check_weight(mesh, weight);
  return assemble_parallel(
      mesh, make_layout(mesh, region), [&](int t) { return mass_element(mesh, weight, t); }, exec);
}

SparseMatrix assemble_mass(const FineMesh& mesh, const CoefficientField& weight,
                           const std::optional<CellBox>& region, Execution exec) {
  weight.check_compatible(mesh);
  std::vector<double> w(weight.cell_count());
  for (int c = 0; c < weight.cell_count(); ++c) w[c] = weight.mean(c);
  return assemble_mass(mesh, w, region, exec);
}

SparseMatrix assemble_stiffness_reference(const FineMesh& mesh, const CoefficientField& kappa,
                                          const std::optional<CellBox>& region) {
  kappa.check_compatible(mesh);
  return assemble_reference(mesh, make_layout(mesh, region),
                            [&](int t) { return stiffness_element(mesh, kappa, t); });
}

SparseMatrix assemble_mass_reference(const FineMesh& mesh, const std::vector<double>& weight,
                                     const std::optional<CellBox>& region) {
  check_weight(mesh, weight);
  return assemble_reference(mesh, make_layout(mesh, region),
                            [&](int t) { return mass_element(mesh, weight, t); });
}

Vector assemble_load(const FineMesh& mesh, double f) {
  return assemble_load_cells(mesh, std::vector<double>(mesh.cell_count(), f));
}

Vector assemble_load_cells(const FineMesh& mesh, const std::vector<double>& f) {
  if (static_cast<int>(f.size()) != mesh.cell_count()) throw ConfigError("load needs one value per cell");
  Vector b = Vector::Zero(mesh.node_count());
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const double share = f[t / 2] * triangle_area(mesh, t) / 3.0;
    for (int v : mesh.triangles()[t]) b[v] += share;
  }
  return b;
}

Vector assemble_load_nodal(const FineMesh& mesh, const Vector& f) {
  if (f.size() != mesh.node_count()) throw ConfigError("nodal load has wrong length");
  return assemble_mass(mesh, std::vector<double>(mesh.cell_count(), 1.0)) * f;
}

Vector BoundaryCondition::boundary_values(const FineMesh& mesh) const {
  Vector g = Vector::Zero(mesh.node_count());
  for (int n : mesh.boundary_nodes()) g[n] = this->g(mesh.coord(n));
  return g;
}

std::pair<SparseMatrix, Vector> apply_dirichlet(const FineMesh& mesh, const SparseMatrix& A,
                                                const Vector& b, const BoundaryCondition& bc) {
  if (A.rows() != mesh.node_count() || A.cols() != A.rows() || b.size() != A.rows()) {
    throw ConfigError("apply_dirichlet: inconsistent system sizes");
  }
  const Vector g = bc.boundary_values(mesh);
  Vector rhs = b - A * g;
  std::vector<Triplet> trips;
  for (int k = 0; k < A.outerSize(); ++k) {
    if (mesh.is_boundary(k)) continue;
    for (SparseMatrix::InnerIterator it(A, k); it; ++it) {
      if (!mesh.is_boundary(static_cast<int>(it.row()))) trips.emplace_back(it.row(), it.col(), it.value());
    }
  }
  for (int n : mesh.boundary_nodes()) {
    trips.emplace_back(n, n, 1.0);
    rhs[n] = g[n];
  }
  SparseMatrix out(A.rows(), A.cols());
  out.setFromTriplets(trips.begin(), trips.end());
  return {std::move(out), std::move(rhs)};
}

Vector DirichletSystem::expand(const Vector& u_free) const {
  Vector u = lift;
  for (size_t k = 0; k < free.size(); ++k) u[free[k]] += u_free[static_cast<int>(k)];
  return u;
}

Vector DirichletSystem::restrict_free(const Vector& u) const {
  Vector r(free_count());
  for (size_t k = 0; k < free.size(); ++k) r[static_cast<int>(k)] = u[free[k]];
  return r;
}

DirichletSystem reduce_dirichlet(const FineMesh& mesh, const SparseMatrix& A, const Vector& b,
                                 const BoundaryCondition& bc, const Vector& lift) {
  if (A.rows() != mesh.node_count() || b.size() != A.rows()) {
    throw ConfigError("reduce_dirichlet: inconsistent system sizes");
  }
  DirichletSystem sys;
  sys.free_index.assign(mesh.node_count(), -1);
  for (int n = 0; n < mesh.node_count(); ++n) {
    if (!mesh.is_boundary(n)) {
      sys.free_index[n] = static_cast<int>(sys.free.size());
      sys.free.push_back(n);
    }
  }
  if (lift.size() != 0 && lift.size() != mesh.node_count()) throw ConfigError("reduce_dirichlet: lift has wrong length");
  sys.lift = lift.size() ? lift : Vector::Zero(mesh.node_count());
  for (int n : mesh.boundary_nodes()) sys.lift[n] = bc.g(mesh.coord(n));
  sys.A = submatrix(A, sys.free);
  sys.b = sys.restrict_free(b - A * sys.lift);
  return sys;
}

ErrorNorms norms(const Vector& u, const Vector& v, const SparseMatrix& A_kappa,
                 const SparseMatrix& M_kappa) {
  if (u.size() != v.size() || A_kappa.rows() != u.size() || M_kappa.rows() != u.size()) {
    throw ConfigError("norms: size mismatch");
  }
  const Vector e = u - v;
  ErrorNorms n;
  n.energy = e.dot(A_kappa * e);
  n.h1 = n.energy;
  n.l2w = e.dot(M_kappa * e);
  return n;
}

ErrorNorms relative_errors(const Vector& u, const Vector& reference, const SparseMatrix& A_kappa,
                           const SparseMatrix& M_kappa) {
  ErrorNorms err = norms(u, reference, A_kappa, M_kappa);
  const ErrorNorms ref = norms(reference, Vector::Zero(reference.size()), A_kappa, M_kappa);
  if (ref.energy == 0.0 || ref.l2w == 0.0) {
    err.absolute = true;
    return err;
  }
  err.energy /= ref.energy;
  err.h1 /= ref.h1;
  err.l2w /= ref.l2w;
  return err;
}

Vector interpolate(const FineMesh& mesh, const std::function<double(Point)>& f) {
  Vector u(mesh.node_count());
  for (int n = 0; n < mesh.node_count(); ++n) u[n] = f(mesh.coord(n));
  return u;
}

SparseMatrix submatrix(const SparseMatrix& A, const std::vector<int>& rows) {
  std::vector<int> map(A.rows(), -1);
  for (size_t k = 0; k < rows.size(); ++k) map[rows[k]] = static_cast<int>(k);
  std::vector<Triplet> trips;
  for (int k = 0; k < A.outerSize(); ++k) {
    if (map[k] < 0) continue;
    for (SparseMatrix::InnerIterator it(A, k); it; ++it) {
      const int r = map[it.row()];
      if (r >= 0) trips.emplace_back(r, map[k], it.value());
    }
  }
  const int n = static_cast<int>(rows.size());
  SparseMatrix S(n, n);
  S.setFromTriplets(trips.begin(), trips.end());
  return S;
}

}  // namespace gmsfem
