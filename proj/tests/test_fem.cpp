#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gmsfem/error.hpp"
#include "gmsfem/fem.hpp"
#include "oracles.hpp"

using namespace gmsfem;

namespace {

Matrix dense(const SparseMatrix& A) { return Matrix(A); }

CoefficientField random_field(int nx, int ny, unsigned seed, bool tensor = false) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 4.0);
  CoefficientField k = CoefficientField::constant(nx, ny, 1.0);
  for (double& v : k.k11) v = std::pow(10.0, U(rng));
  if (tensor) {
    k.k22 = k.k11;
    for (double& v : k.k22) v = std::pow(10.0, U(rng));
  }
  return k;
}

}  // namespace

TEST(Stiffness, SingleCellByHand) {
  // Both triangles of the unit cell give the 5-point pattern: diagonal 1,
  // -1/2 along edges, 0 across the diagonal. Nodes BL BR TL TR.
  const FineMesh m(1, 1);
  const Matrix K = dense(assemble_stiffness(m, CoefficientField::constant(1, 1, 1.0)));
  Matrix ref(4, 4);
  ref << 1, -0.5, -0.5, 0,
         -0.5, 1, 0, -0.5,
         -0.5, 0, 1, -0.5,
         0, -0.5, -0.5, 1;
  EXPECT_LT((K - ref).norm(), 1e-14);
}

TEST(Stiffness, TensorSplitsDirections) {
  const FineMesh m(1, 1);
  CoefficientField k = CoefficientField::constant(1, 1, 3.0);
  k.k22 = {5.0};
  const Matrix K = dense(assemble_stiffness(m, k));
  const Vector x = interpolate(m, [](Point p) { return p.x; });
  const Vector y = interpolate(m, [](Point p) { return p.y; });
  EXPECT_NEAR(x.dot(K * x), 3.0, 1e-14);
  EXPECT_NEAR(y.dot(K * y), 5.0, 1e-14);
}

TEST(Stiffness, ConstantsInKernelAndLinearEnergy) {
  const FineMesh m(7, 5);
  const CoefficientField k = random_field(7, 5, 3);
  const SparseMatrix K = assemble_stiffness(m, k);
  const Vector one = Vector::Ones(m.node_count());
  EXPECT_LT((K * one).norm(), 1e-9 * k.contrast());
  // u = x: energy = sum over cells of kappa * h^2.
  const Vector x = interpolate(m, [](Point p) { return p.x; });
  double expect = 0.0;
  for (double v : k.k11) expect += v * m.hx() * m.hy();
  EXPECT_NEAR(x.dot(K * x), expect, 1e-12 * expect);
}

TEST(Mass, ElementMatrixAndTotal) {
  const FineMesh m(1, 1);
  const Matrix M = dense(assemble_mass(m, std::vector<double>{1.0}));
  // Each triangle: area/12 [2 1 1; 1 2 1; 1 1 2], area 1/2.
  Matrix ref(4, 4);
  ref << 2, 0.5, 0.5, 1,
         0.5, 1, 0, 0.5,
         0.5, 0, 1, 0.5,
         1, 0.5, 0.5, 2;
  ref /= 12.0;
  EXPECT_LT((M - ref).norm(), 1e-15);

  const FineMesh g(6, 4);
  const CoefficientField k = random_field(6, 4, 9);
  const Vector one = Vector::Ones(g.node_count());
  double integral = 0.0;
  for (double v : k.k11) integral += v * g.hx() * g.hy();
  EXPECT_NEAR(one.dot(assemble_mass(g, k) * one), integral, 1e-12 * integral);
}

TEST(Assembly, ParallelMatchesReference) {
  const FineMesh m(16, 12);
  for (bool tensor : {false, true}) {
    const CoefficientField k = random_field(16, 12, 5, tensor);
    for (const std::optional<CellBox> region : {std::optional<CellBox>{}, std::optional<CellBox>{CellBox{3, 11, 2, 9}}}) {
      const Matrix a = dense(assemble_stiffness(m, k, region));
      const Matrix b = dense(assemble_stiffness_reference(m, k, region));
      EXPECT_LT((a - b).norm(), 1e-12 * b.norm());
      EXPECT_EQ(a, dense(assemble_stiffness(m, k, region, Execution::serial)));
      std::vector<double> w(k.k11);
      EXPECT_LT((dense(assemble_mass(m, w, region)) - dense(assemble_mass_reference(m, w, region))).norm(), 1e-14);
    }
  }
}

TEST(Assembly, RegionIsLocalBlock) {
  const FineMesh m(8, 8);
  const CoefficientField k = random_field(8, 8, 1);
  const CellBox box{2, 6, 1, 4};
  const Matrix local = dense(assemble_stiffness(m, k, box));
  ASSERT_EQ(local.rows(), box.node_count());
  // Masking kappa outside the box reproduces the local matrix on its nodes.
  CoefficientField masked = k;
  for (int j = 0; j < 8; ++j)
    for (int i = 0; i < 8; ++i)
      if (!box.contains_cell(i, j)) masked.k11[m.cell(i, j)] = 0.0;
  const Matrix full = dense(assemble_stiffness_reference(m, masked));
  for (int a = 0; a < box.node_count(); ++a)
    for (int b = 0; b < box.node_count(); ++b) {
      const int ga = m.node(box.local_i(a), box.local_j(a)), gb = m.node(box.local_i(b), box.local_j(b));
      EXPECT_NEAR(local(a, b), full(ga, gb), 1e-10);
    }
  EXPECT_THROW(assemble_stiffness(m, k, CellBox{5, 9, 0, 2}), ConfigError);
}

TEST(Load, IntegratesSource) {
  const FineMesh m(5, 3);
  EXPECT_NEAR(assemble_load(m, 2.0).sum(), 2.0, 1e-14);
  std::vector<double> f(m.cell_count(), 0.0);
  f[m.cell(2, 1)] = 1.0;
  EXPECT_NEAR(assemble_load_cells(m, f).sum(), m.hx() * m.hy(), 1e-15);
}

TEST(Dirichlet, LinearSolutionsAreExact) {
  // kappa-harmonic with linear data and constant kappa: P1 reproduces x + y.
  const FineMesh m(9, 7);
  const CoefficientField k = CoefficientField::constant(9, 7, 4.0);
  const SparseMatrix A = assemble_stiffness(m, k);
  const Vector b = Vector::Zero(m.node_count());
  const auto bc = BoundaryCondition::linear_xy();
  const DirichletSystem sys = reduce_dirichlet(m, A, b, bc);
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(sys.A);
  const Vector u = sys.expand(ldlt.solve(sys.b));
  const Vector exact = interpolate(m, [](Point p) { return p.x + p.y; });
  EXPECT_LT((u - exact).lpNorm<Eigen::Infinity>(), 1e-12);

  const auto [Af, bf] = apply_dirichlet(m, A, b, bc);
  Eigen::SparseLU<SparseMatrix> lu(Af);
  EXPECT_LT((lu.solve(bf) - exact).lpNorm<Eigen::Infinity>(), 1e-12);
}

TEST(Dirichlet, ManufacturedSolutionConvergesSecondOrder) {
  const double pi = std::acos(-1.0);
  auto err = [&](int n) {
    const FineMesh m(n, n);
    const CoefficientField k = CoefficientField::constant(n, n, 1.0);
    const Vector f = interpolate(m, [&](Point p) { return 2 * pi * pi * std::sin(pi * p.x) * std::sin(pi * p.y); });
    const SparseMatrix A = assemble_stiffness(m, k);
    const DirichletSystem sys = reduce_dirichlet(m, A, assemble_load_nodal(m, f), BoundaryCondition::zero());
    Eigen::SimplicialLDLT<SparseMatrix> ldlt(sys.A);
    const Vector u = sys.expand(ldlt.solve(sys.b));
    const Vector exact = interpolate(m, [&](Point p) { return std::sin(pi * p.x) * std::sin(pi * p.y); });
    const SparseMatrix M = assemble_mass(m, k);
    const Vector e = u - exact;
    return std::sqrt(e.dot(M * e));
  };
  const double e1 = err(16), e2 = err(32);
  EXPECT_GT(e1 / e2, 3.5);
  EXPECT_LT(e2, 2e-3);
}

TEST(Norms, RelativeErrorsAreSquaredRatios) {
  const FineMesh m(6, 6);
  const CoefficientField k = random_field(6, 6, 2);
  const SparseMatrix A = assemble_stiffness(m, k), M = assemble_mass(m, k);
  const Vector ref = interpolate(m, [](Point p) { return std::sin(3 * p.x) + p.y * p.y; });
  EXPECT_EQ(relative_errors(ref, ref, A, M).energy, 0.0);
  const ErrorNorms e = relative_errors(2.0 * ref, ref, A, M);
  EXPECT_NEAR(e.energy, 1.0, 1e-12);
  EXPECT_NEAR(e.l2w, 1.0, 1e-12);
  EXPECT_NEAR(relative_errors(ref + 0.5 * ref, ref, A, M).h1, 0.25, 1e-12);
}

TEST(Submatrix, PrincipalBlock) {
  std::mt19937 rng(4);
  const Matrix D = oracle::random_spd(rng, 8);
  const SparseMatrix S = D.sparseView();
  const std::vector<int> rows = {6, 1, 3};
  const Matrix sub = dense(submatrix(S, rows));
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) EXPECT_EQ(sub(a, b), D(rows[a], rows[b]));
}
