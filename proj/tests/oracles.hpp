#pragma once

// Independent reference computations shared by the unit tests.

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "gmsfem/linalg.hpp"

namespace oracle {

using gmsfem::Matrix;
using gmsfem::Vector;

inline Matrix random_matrix(std::mt19937& rng, int r, int c) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  Matrix m(r, c);
  for (int j = 0; j < c; ++j)
    for (int i = 0; i < r; ++i) m(i, j) = U(rng);
  return m;
}

inline Matrix random_spd(std::mt19937& rng, int n, double shift = 1.0) {
  const Matrix X = random_matrix(rng, n, n);
  return X * X.transpose() + shift * Matrix::Identity(n, n);
}

// Semidefinite with exactly the given rank (generically).
inline Matrix random_psd(std::mt19937& rng, int n, int rank) {
  const Matrix Y = random_matrix(rng, n, rank);
  return Y * Y.transpose();
}

// Number of eigenvalues nu of S v = nu A v below x, by Sylvester inertia of S - x A.
inline int count_below(const Matrix& A, const Matrix& S, double x) {
  const Eigen::SelfAdjointEigenSolver<Matrix> es(S - x * A, Eigen::EigenvaluesOnly);
  int neg = 0;
  for (int k = 0; k < es.eigenvalues().size(); ++k) neg += es.eigenvalues()[k] < 0.0;
  return neg;
}

// k-th smallest (0-based) nu of the pencil by bisection on the inertia count.
inline double bisect_nu(const Matrix& A, const Matrix& S, int k, double lo, double hi) {
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (count_below(A, S, mid) > k) hi = mid;
    else lo = mid;
  }
  return 0.5 * (lo + hi);
}

// Tridiagonal 1D Laplacian tridiag(-1, 2, -1) of size n.
inline Matrix laplacian_1d(int n) {
  Matrix K = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    K(i, i) = 2.0;
    if (i > 0) K(i, i - 1) = K(i - 1, i) = -1.0;
  }
  return K;
}

}  // namespace oracle
