#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gmsfem/fem.hpp"
#include "gmsfem/solvers.hpp"
#include "oracles.hpp"

using namespace gmsfem;

TEST(DenseGenEig, DiagonalPencil) {
  const Matrix A = Matrix::Identity(3, 3);
  const Matrix S = Vector(Eigen::Vector3d(1, 2, 4)).asDiagonal();
  const GenEig e = dense_gen_eig(A, S);
  EXPECT_NEAR(e.lambda[0], 1.0, 1e-14);
  EXPECT_NEAR(e.lambda[1], 0.5, 1e-14);
  EXPECT_NEAR(e.lambda[2], 0.25, 1e-14);
  EXPECT_EQ(e.infinite_count, 0);
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(std::abs(e.vectors(k, k)), 1.0, 1e-14);
}

TEST(DenseGenEig, ZeroRowGivesOneInfiniteMode) {
  const Matrix A = Matrix::Identity(3, 3);
  Matrix S = Vector(Eigen::Vector3d(0, 2, 4)).asDiagonal();
  const GenEig e = dense_gen_eig(A, S);
  EXPECT_EQ(e.infinite_count, 1);
  EXPECT_TRUE(std::isinf(e.lambda[0]));
  EXPECT_NEAR(std::abs(e.vectors(0, 0)), 1.0, 1e-14);
}

TEST(DenseGenEig, MatchesInertiaBisectionAtFive) {
  std::mt19937 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix A = oracle::random_spd(rng, 5), S = oracle::random_spd(rng, 5, 0.1);
    const GenEig e = dense_gen_eig(A, S);
    const double hi = 2.0 * e.nu.maxCoeff() + 1.0;
    for (int k = 0; k < 5; ++k) {
      const double nu = oracle::bisect_nu(A, S, k, 0.0, hi);
      EXPECT_NEAR(e.nu[k], nu, 1e-8 * std::abs(nu));
      EXPECT_NEAR(e.lambda[k], 1.0 / nu, 1e-8 / nu);
    }
  }
}

TEST(DenseGenEig, ResidualAndNormalization) {
  std::mt19937 rng(5);
  for (int n : {3, 17, 40}) {
    const Matrix A = oracle::random_spd(rng, n), S = oracle::random_psd(rng, n, n / 2 + 1);
    const GenEig e = dense_gen_eig(A, S);
    const Matrix G = e.vectors.transpose() * A * e.vectors;
    EXPECT_LT((G - Matrix::Identity(n, n)).norm(), 1e-9);
    for (int k = 0; k < n; ++k) {
      const Vector v = e.vectors.col(k);
      EXPECT_LE((S * v - e.nu[k] * A * v).norm(), 1e-8 * S.norm());
      if (k > 0) {
        EXPECT_GE(e.lambda[k - 1], e.lambda[k]);
      }
    }
    EXPECT_EQ(e.infinite_count, n - (n / 2 + 1));
  }
}

TEST(DenseGenEig, RejectsIndefiniteA) {
  Matrix A = Matrix::Identity(2, 2);
  A(1, 1) = -1.0;
  EXPECT_ANY_THROW(dense_gen_eig(A, Matrix::Identity(2, 2)));
}

TEST(SemidefiniteGenEig, AgreesWithDenseOnDefinitePencils) {
  std::mt19937 rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 25), r = 1 + static_cast<int>(rng() % n);
    const Matrix A = oracle::random_spd(rng, n), S = oracle::random_psd(rng, n, r);
    const GenEig d = dense_gen_eig(A, S), s = semidefinite_gen_eig(A, S);
    EXPECT_EQ(s.infinite_count, n - r);
    for (int k = n - r; k < n; ++k) EXPECT_NEAR(s.lambda[k], d.lambda[k], 1e-8 * d.lambda[k]);
  }
}

TEST(SemidefiniteGenEig, SingularADirectionsAreDeflated) {
  // A singular on e0 but A + S definite: e0 carries lambda = 0.
  Matrix A = Matrix::Zero(3, 3), S = Matrix::Identity(3, 3);
  A(1, 1) = 2.0;
  A(2, 2) = 3.0;
  const GenEig e = semidefinite_gen_eig(A, S);
  ASSERT_EQ(e.lambda.size(), 3);
  EXPECT_NEAR(e.lambda[0], 3.0, 1e-12);
  EXPECT_NEAR(e.lambda[1], 2.0, 1e-12);
  EXPECT_NEAR(e.lambda[2], 0.0, 1e-12);
}

TEST(SparseLeadingModes, MatchesDenseOnLaplacianPencil) {
  const FineMesh m(14, 12);
  CoefficientField k = CoefficientField::constant(14, 12, 1.0);
  for (int c = 0; c < k.cell_count(); c += 7) k.k11[c] = 1e3;
  const SparseMatrix S = assemble_stiffness(m, k), A = assemble_mass(m, k);
  const GenEig d = dense_gen_eig(Matrix(A), Matrix(S));
  const GenEig s = sparse_leading_modes(A, S, 6);
  ASSERT_GE(s.lambda.size(), 6);
  EXPECT_TRUE(std::isinf(d.lambda[0]));
  EXPECT_TRUE(std::isinf(s.lambda[0]));
  for (int q = 1; q < 6; ++q) EXPECT_NEAR(s.lambda[q], d.lambda[q], 1e-7 * d.lambda[q]);
  const Matrix G = s.vectors.leftCols(6).transpose() * A * s.vectors.leftCols(6);
  EXPECT_LT((G - Matrix::Identity(6, 6)).norm(), 1e-8);
}

TEST(PivotedCholesky, ReconstructsRankDeficientGram) {
  std::mt19937 rng(3);
  const Matrix G = oracle::random_psd(rng, 12, 5);
  const PivotedCholesky pc = pivoted_cholesky(G, 1e-12);
  EXPECT_EQ(pc.rank, 5);
  Matrix Gp(12, 12);
  for (int a = 0; a < 12; ++a)
    for (int b = 0; b < 12; ++b) Gp(a, b) = G(pc.pivots[a], pc.pivots[b]);
  EXPECT_LT((Gp - pc.L * pc.L.transpose()).norm(), 1e-10 * G.norm());
  const Matrix B = gram_orthonormal_coords(G, 1e-12);
  EXPECT_LT((B.transpose() * G * B - Matrix::Identity(5, 5)).norm(), 1e-9);
}

TEST(SparseDirect, IdentityAndHandInverse) {
  SparseMatrix I(4, 4);
  I.setIdentity();
  const Vector b = Vector::LinSpaced(4, 1.0, 4.0);
  EXPECT_EQ(SparseDirect(I).solve(b), b);

  // (tridiag(-1,2,-1))^-1 (i,j) = min(i,j) (n+1-max(i,j)) / (n+1), 1-based.
  const int n = 5;
  const SparseMatrix K = oracle::laplacian_1d(n).sparseView();
  const Matrix inv = SparseDirect(K).solve(Matrix(Matrix::Identity(n, n)));
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= n; ++j)
      EXPECT_NEAR(inv(i - 1, j - 1), std::min(i, j) * (n + 1.0 - std::max(i, j)) / (n + 1.0), 1e-14);
}

TEST(SparseDirect, RandomSpdResidual) {
  std::mt19937 rng(13);
  const Matrix A = oracle::random_spd(rng, 30);
  const Vector b = oracle::random_matrix(rng, 30, 1);
  const Vector x = SparseDirect(SparseMatrix(A.sparseView())).solve(b);
  EXPECT_LT((A * x - b).norm(), 1e-12 * b.norm() * A.norm());
  EXPECT_ANY_THROW(SparseDirect(SparseMatrix((-A).sparseView())));
}

TEST(CoarseSolver, ConsistentSingularSystem) {
  std::mt19937 rng(17);
  const Matrix G = oracle::random_psd(rng, 10, 6);
  const Vector b = G * oracle::random_matrix(rng, 10, 1);
  const CoarseSolver cs(G);
  EXPECT_EQ(cs.rank(), 6);
  EXPECT_LT((G * cs.solve(b) - b).norm(), 1e-9 * b.norm());
}

TEST(Pcg, IdentityConvergesInOneStep) {
  SparseMatrix I(6, 6);
  I.setIdentity();
  const PcgResult r = pcg(I, Vector::Ones(6), identity_preconditioner(), 1e-12, 10);
  EXPECT_TRUE(r.report.converged);
  EXPECT_EQ(r.report.iterations, 1);
}

TEST(Pcg, TwoByTwoConditionIsExact) {
  SparseMatrix A(2, 2);
  A.insert(0, 0) = 1.0;
  A.insert(1, 1) = 10.0;
  const PcgResult r = pcg(A, Vector::Ones(2), identity_preconditioner(), 1e-14, 10);
  EXPECT_NEAR(r.report.condition, 10.0, 0.1);
}

TEST(Pcg, ConditionEstimateMatchesDense) {
  std::mt19937 rng(23);
  for (int n : {50, 120, 200}) {
    // Spectrum spread over [1, 1e3] with a random eigenbasis.
    const Eigen::HouseholderQR<Matrix> qr(oracle::random_matrix(rng, n, n));
    const Matrix Q = qr.householderQ();
    const Vector d = Vector::LinSpaced(n, 0.0, 3.0).unaryExpr([](double t) { return std::pow(10.0, t); });
    const Matrix A = Q * d.asDiagonal() * Q.transpose();
    const PcgResult r = pcg(SparseMatrix(A.sparseView()), Vector::Ones(n), identity_preconditioner(), 1e-12, 5 * n);
    EXPECT_TRUE(r.report.converged);
    EXPECT_NEAR(r.report.condition, 1e3, 0.05 * 1e3) << n;
  }
}

TEST(Pcg, EnergyErrorNonIncreasing) {
  std::mt19937 rng(29);
  const int n = 40;
  const Matrix A = oracle::random_spd(rng, n, 0.5);
  const Vector b = oracle::random_matrix(rng, n, 1);
  const Vector x = A.llt().solve(b);
  const SparseMatrix As = A.sparseView();
  double prev = x.dot(A * x);
  for (int k = 1; k <= 25; ++k) {
    const PcgResult r = pcg(As, b, identity_preconditioner(), 1e-30, k);
    const Vector e = r.x - x;
    const double cur = e.dot(A * e);
    EXPECT_LE(cur, prev * (1 + 1e-10)) << k;
    prev = cur;
  }
}

TEST(Lanczos, TridiagonalExtremes) {
  // CG on diag(1, 3) from b = (1, 1): alpha_0 = 1/2 (r0.r0 / r0.A r0 = 2/4).
  SparseMatrix A(2, 2);
  A.insert(0, 0) = 1.0;
  A.insert(1, 1) = 3.0;
  const PcgResult r = pcg(A, Vector::Ones(2), identity_preconditioner(), 1e-14, 10);
  EXPECT_NEAR(r.report.lambda_min, 1.0, 1e-10);
  EXPECT_NEAR(r.report.lambda_max, 3.0, 1e-10);
  const auto [lo, hi] = lanczos_extremes({0.5}, {});
  EXPECT_NEAR(lo, 2.0, 1e-14);
  EXPECT_NEAR(hi, 2.0, 1e-14);
}

namespace {

SparseMatrix grid_laplacian(int n, double eta) {
  const FineMesh m(n, n);
  CoefficientField k = CoefficientField::constant(n, n, 1.0);
  for (int j = n / 3; j < n / 3 + 1; ++j)
    for (int i = 1; i < n - 1; ++i) k.k11[m.cell(i, j)] = eta;
  const SparseMatrix A = assemble_stiffness(m, k);
  return reduce_dirichlet(m, A, Vector::Zero(m.node_count()), BoundaryCondition::zero()).A;
}

}  // namespace

TEST(TwoLevel, WholeDomainSubdomainIsExact) {
  const SparseMatrix A = grid_laplacian(8, 10.0);
  std::vector<int> all(A.rows());
  for (int i = 0; i < A.rows(); ++i) all[i] = i;
  const TwoLevelPreconditioner B(A, SparseMatrix(A.rows(), 0), {all});
  const PcgResult r = pcg(A, Vector::Ones(A.rows()), B.as_function(), 1e-10, 10);
  EXPECT_EQ(r.report.iterations, 1);
}

TEST(TwoLevel, SymmetricAndSubmatrices) {
  const int n = 12;
  const SparseMatrix A = grid_laplacian(n, 1e4);
  const int N = A.rows();
  std::vector<std::vector<int>> doms;
  for (int s = 0; s < 3; ++s) {
    std::vector<int> d;
    for (int i = std::max(0, s * N / 3 - 11); i < std::min(N, (s + 1) * N / 3 + 11); ++i) d.push_back(i);
    doms.push_back(d);
  }
  SparseMatrix P(N, 2);
  for (int i = 0; i < N; ++i) {
    P.insert(i, 0) = 1.0;
    P.insert(i, 1) = static_cast<double>(i) / N;
  }
  const TwoLevelPreconditioner B(A, P, doms);
  for (int s = 0; s < 3; ++s) EXPECT_EQ(Matrix(B.subdomain_matrix(s)), Matrix(submatrix(A, doms[s])));

  std::mt19937 rng(2);
  const Vector u = oracle::random_matrix(rng, N, 1), v = oracle::random_matrix(rng, N, 1);
  Vector Bu, Bv, Bu_ref;
  B.apply(u, Bu);
  B.apply(v, Bv);
  B.apply_reference(u, Bu_ref);
  EXPECT_NEAR(Bu.dot(v), u.dot(Bv), 1e-10 * std::abs(Bu.dot(v)));
  EXPECT_EQ(Bu, Bu_ref);
  EXPECT_GT(u.dot(Bu), 0.0);
}
