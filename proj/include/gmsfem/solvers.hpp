#pragma once

#include <functional>
#include <memory>
#include <vector>

#include <Eigen/SparseCholesky>

#include "gmsfem/linalg.hpp"
#include "gmsfem/parallel.hpp"

namespace gmsfem {

/// Reversed-pencil solution of A psi = lambda S psi: S v = nu A v with A SPD,
/// lambda = 1/nu, and lambda = +inf where nu < cutoff * max(|nu|).
struct GenEig {
  Vector lambda;    // non-increasing, infinite modes first
  Vector nu;        // non-decreasing
  Matrix vectors;   // A-orthonormal columns
  int infinite_count = 0;
};

GenEig dense_gen_eig(const Matrix& A, const Matrix& S, double inf_cutoff = 1e-12);

/// The same pencil for semidefinite A and S whose sum is definite on the span.
/// Works in the balanced form T = A + c S with c = tr(A)/tr(S): directions with
/// T-norm below drop_tol (relative, pivoted Cholesky) are deflated, then
/// A v = theta T v gives lambda = c theta / (1 - theta), infinite where
/// 1 - theta < inf_cutoff. Columns are A-normalized where theta > 0.
GenEig semidefinite_gen_eig(const Matrix& A, const Matrix& S, double drop_tol = 1e-10,
                            double inf_cutoff = 1e-12);

/// Leading `count` modes (largest lambda) of the sparse pencil A psi = lambda S psi
/// with A SPD, by block subspace iteration on (S + sigma A)^-1 A. Falls back to
/// dense_gen_eig for small pencils or large counts.
GenEig sparse_leading_modes(const SparseMatrix& A, const SparseMatrix& S, int count, double tol = 1e-9,
                            int max_it = 2000);

/// Symmetric eigenproblem of S in an A-orthonormal basis B (B^T A B = I): the
/// same result as dense_gen_eig on the pencil projected onto B.
GenEig gen_eig_in_basis(const Matrix& B_t_S_B, const Matrix& B, double inf_cutoff = 1e-12);

/// G[p, p] = L L^T on the first `rank` pivots; pivots stop when the remaining
/// diagonal falls below rel_tol * max diagonal of G.
struct PivotedCholesky {
  std::vector<int> pivots;  // full permutation
  Matrix L;                 // n x rank, rows in pivot order
  int rank = 0;
};

PivotedCholesky pivoted_cholesky(const Matrix& G, double rel_tol);

/// Coordinates B (n x rank) with B^T G B = I spanning the pivot columns of G.
Matrix gram_orthonormal_coords(const Matrix& G, double rel_tol);

/// Sparse SPD factorization reused across right-hand sides.
class SparseDirect {
 public:
  SparseDirect() = default;
  explicit SparseDirect(const SparseMatrix& A);
  Vector solve(const Vector& b) const;
  Matrix solve(const Matrix& B) const;
  int size() const { return n_; }

 private:
  std::shared_ptr<Eigen::SimplicialLLT<SparseMatrix>> llt_;
  int n_ = 0;
};

/// Dense PSD solver that works on a maximal well-conditioned set of columns of
/// the Jacobi-scaled matrix; redundant columns get zero coefficients.
class CoarseSolver {
 public:
  CoarseSolver() = default;
  explicit CoarseSolver(const Matrix& G, double rel_tol = 1e-13);
  Vector solve(const Vector& b) const;
  int rank() const { return static_cast<int>(active_.size()); }
  int size() const { return n_; }

 private:
  int n_ = 0;
  std::vector<int> active_;
  Vector scale_;
  Eigen::LLT<Matrix> llt_;
};

using Preconditioner = std::function<void(const Vector& r, Vector& z)>;
/// y = A x for a matrix-free SPD operator.
using LinearOperator = std::function<void(const Vector& x, Vector& y)>;

struct PcgReport {
  int iterations = 0;
  std::vector<double> residuals;  // relative preconditioned residual per iteration, [0] = 1
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double condition = 0.0;
  bool converged = false;
  bool residual_growth = false;  // some residual exceeded 10x its predecessor
};

struct PcgResult {
  Vector x;
  PcgReport report;
};

/// PCG from x = 0. Stops when sqrt(r^T z / r0^T z0) <= tol.
PcgResult pcg(const SparseMatrix& A, const Vector& b, const Preconditioner& M_inv, double tol,
              int max_it);
PcgResult pcg(const LinearOperator& A, const Vector& b, const Preconditioner& M_inv, double tol,
              int max_it);
/// z = r.
Preconditioner identity_preconditioner();

/// Extremal eigenvalues of the Lanczos tridiagonal built from CG coefficients.
std::pair<double, double> lanczos_extremes(const std::vector<double>& alpha,
                                           const std::vector<double>& beta);

/// B^-1 = P S0^-1 P^T + sum_i R_i^T A_i^-1 R_i on the dofs of A.
class TwoLevelPreconditioner {
 public:
  TwoLevelPreconditioner(const SparseMatrix& A, const SparseMatrix& P,
                         std::vector<std::vector<int>> subdomain_dofs,
                         Execution exec = Execution::parallel);

  void apply(const Vector& r, Vector& z) const;
  /// Serial reference of apply.
  void apply_reference(const Vector& r, Vector& z) const;
  Preconditioner as_function() const;

  int coarse_dim() const { return static_cast<int>(P_.cols()); }
  int subdomain_count() const { return static_cast<int>(dofs_.size()); }
  const std::vector<int>& subdomain(int k) const { return dofs_[k]; }
  const SparseMatrix& subdomain_matrix(int k) const { return local_[k]; }
  const CoarseSolver& coarse() const { return coarse_; }

 private:
  void apply_impl(const Vector& r, Vector& z, Execution exec) const;

  SparseMatrix P_;
  CoarseSolver coarse_;
  std::vector<std::vector<int>> dofs_;
  std::vector<SparseMatrix> local_;
  std::vector<SparseDirect> solvers_;
  Execution exec_;
};

}  // namespace gmsfem
