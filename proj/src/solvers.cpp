#include "gmsfem/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "gmsfem/error.hpp"
#include "gmsfem/fem.hpp"

namespace gmsfem {

namespace {

// Make the largest-magnitude entry of every column positive.
void fix_signs(Matrix& V) {
  for (int k = 0; k < V.cols(); ++k) {
    Eigen::Index imax = 0;
    V.col(k).cwiseAbs().maxCoeff(&imax);
    if (V(imax, k) < 0.0) V.col(k) *= -1.0;
  }
}

GenEig finish(const Eigen::SelfAdjointEigenSolver<Matrix>& es, Matrix vectors, double inf_cutoff) {
  GenEig out;
  out.nu = es.eigenvalues();
  out.vectors = std::move(vectors);
  fix_signs(out.vectors);
  const int n = static_cast<int>(out.nu.size());
  const double scale = n > 0 ? out.nu.cwiseAbs().maxCoeff() : 0.0;
  out.lambda.resize(n);
  for (int k = 0; k < n; ++k) {
    if (scale == 0.0 || out.nu[k] < inf_cutoff * scale) {
      out.lambda[k] = std::numeric_limits<double>::infinity();
      ++out.infinite_count;
    } else {
      out.lambda[k] = 1.0 / out.nu[k];
    }
  }
  return out;
}

}  // namespace

GenEig dense_gen_eig(const Matrix& A, const Matrix& S, double inf_cutoff) {
  if (A.rows() != A.cols() || S.rows() != S.cols() || A.rows() != S.rows()) {
    throw ConfigError("dense_gen_eig: pencil matrices must be square and of equal size");
  }
  const Matrix As = 0.5 * (A + A.transpose());
  Eigen::LLT<Matrix> llt(As);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("dense_gen_eig: A is not positive definite");
  }
  const Matrix L = llt.matrixL();
  Matrix C = L.triangularView<Eigen::Lower>().solve(0.5 * (S + S.transpose()));
  C = L.triangularView<Eigen::Lower>().solve(C.transpose()).transpose();
  C = 0.5 * (C + C.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(C);
  if (es.info() != Eigen::Success) throw NumericalError("dense_gen_eig: eigensolver failed");
  Matrix V = L.transpose().triangularView<Eigen::Upper>().solve(es.eigenvectors());
  return finish(es, std::move(V), inf_cutoff);
}

GenEig gen_eig_in_basis(const Matrix& BtSB, const Matrix& B, double inf_cutoff) {
  const Matrix C = 0.5 * (BtSB + BtSB.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(C);
  if (es.info() != Eigen::Success) throw NumericalError("gen_eig_in_basis: eigensolver failed");
  return finish(es, B * es.eigenvectors(), inf_cutoff);
}

GenEig sparse_leading_modes(const SparseMatrix& A, const SparseMatrix& S, int count, double tol, int max_it) {
  const int n = static_cast<int>(A.rows());
  if (A.cols() != n || S.rows() != n || S.cols() != n)
    throw ConfigError("sparse_leading_modes: pencil matrices must be square and of equal size");
  if (count < 1) throw ConfigError("sparse_leading_modes: count must be positive");
  const int p = std::min(n, std::max(2 * count, count + 8));
  if (n <= 64 || 3 * p >= n) {
    GenEig full = dense_gen_eig(Matrix(A), Matrix(S));
    const int m = std::min(count, static_cast<int>(full.lambda.size()));
    full.lambda.conservativeResize(m);
    full.nu.conservativeResize(m);
    full.vectors.conservativeResize(Eigen::NoChange, m);
    full.infinite_count = std::min(full.infinite_count, m);
    return full;
  }
  const double trA = A.diagonal().sum(), trS = S.diagonal().sum();
  if (!(trA > 0.0)) throw NumericalError("sparse_leading_modes: A is not positive definite");
  const double sigma = trS > 0.0 ? 1e-6 * trS / trA : 1.0;
  const SparseMatrix K = S + sigma * A;
  const SparseDirect solver(K);

  // Fixed start block: smooth cosine modes in index space plus the constant.
  Matrix Q(n, p);
  for (int k = 0; k < p; ++k) {
    for (int i = 0; i < n; ++i) Q(i, k) = std::cos(M_PI * k * (i + 0.5) / n) + 1e-3 * std::sin(1.7 * (i + 1) * (k + 1));
  }
  GenEig g;
  for (int it = 0; it < max_it; ++it) {
    const Matrix X = solver.solve(Matrix(A * Q));
    const Matrix B = X * gram_orthonormal_coords(X.transpose() * (A * X), 1e-14);
    g = gen_eig_in_basis(B.transpose() * (S * B), B);
    Q = g.vectors;
    const int m = std::min(count, static_cast<int>(g.nu.size()));
    const double scale = g.nu[m - 1] + sigma;
    const Matrix AQ = A * Q.leftCols(m);
    const Matrix R = S * Q.leftCols(m) - AQ * g.nu.head(m).asDiagonal();
    bool done = true;
    for (int k = 0; k < m && done; ++k) done = R.col(k).norm() <= tol * scale * AQ.col(k).norm();
    if (done) break;
    if (it + 1 == max_it) throw NumericalError("sparse_leading_modes: subspace iteration did not converge");
    if (static_cast<int>(Q.cols()) < count) throw NumericalError("sparse_leading_modes: subspace collapsed");
  }
  const int m = std::min(count, static_cast<int>(g.lambda.size()));
  g.lambda.conservativeResize(m);
  g.nu.conservativeResize(m);
  g.vectors.conservativeResize(Eigen::NoChange, m);
  g.infinite_count = std::min(g.infinite_count, m);
  return g;
}

GenEig semidefinite_gen_eig(const Matrix& A, const Matrix& S, double drop_tol, double inf_cutoff) {
  if (A.rows() != A.cols() || S.rows() != S.cols() || A.rows() != S.rows()) {
    throw ConfigError("semidefinite_gen_eig: pencil matrices must be square and of equal size");
  }
  const Matrix As = 0.5 * (A + A.transpose()), Ss = 0.5 * (S + S.transpose());
  const double trA = As.trace(), trS = Ss.trace();
  if (!(trA > 0.0)) throw NumericalError("semidefinite_gen_eig: a-form vanishes on the span");
  const double c = trS > 0.0 ? trA / trS : 1.0;
  const Matrix B = gram_orthonormal_coords(As + c * Ss, drop_tol);
  const int r = static_cast<int>(B.cols());
  Eigen::SelfAdjointEigenSolver<Matrix> es(B.transpose() * As * B);
  if (es.info() != Eigen::Success) throw NumericalError("semidefinite_gen_eig: eigensolver failed");
  GenEig out;
  out.lambda.resize(r);
  out.nu.resize(r);
  out.vectors.resize(A.rows(), r);
  const Matrix V = B * es.eigenvectors();
  for (int k = 0; k < r; ++k) {
    const int src = r - 1 - k;  // descending theta
    const double theta = std::clamp(es.eigenvalues()[src], 0.0, 1.0);
    out.vectors.col(k) = V.col(src);
    if (trS == 0.0 || 1.0 - theta < inf_cutoff) {
      out.lambda[k] = std::numeric_limits<double>::infinity();
      out.nu[k] = 0.0;
      ++out.infinite_count;
    } else {
      out.lambda[k] = c * theta / (1.0 - theta);
      out.nu[k] = theta > 0.0 ? 1.0 / out.lambda[k] : std::numeric_limits<double>::infinity();
    }
    if (theta > 0.0) out.vectors.col(k) /= std::sqrt(theta);
  }
  fix_signs(out.vectors);
  return out;
}

PivotedCholesky pivoted_cholesky(const Matrix& G, double rel_tol) {
  using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const int n = static_cast<int>(G.rows());
  PivotedCholesky pc;
  pc.pivots.resize(n);
  for (int i = 0; i < n; ++i) pc.pivots[i] = i;
  if (n == 0) return pc;
  Vector d = G.diagonal();
  const double tol = rel_tol * std::max(0.0, d.maxCoeff());
  RowMatrix L = RowMatrix::Zero(n, n);
  Vector col(n);
  int k = 0;
  for (; k < n; ++k) {
    int p = k;
    for (int i = k + 1; i < n; ++i) {
      if (d[pc.pivots[i]] > d[pc.pivots[p]]) p = i;
    }
    if (!(d[pc.pivots[p]] > tol)) break;
    std::swap(pc.pivots[k], pc.pivots[p]);
    L.row(k).head(k).swap(L.row(p).head(k));
    const double lkk = std::sqrt(d[pc.pivots[k]]);
    L(k, k) = lkk;
    const int rest = n - k - 1;
    if (rest == 0) continue;
    const int pk = pc.pivots[k];
    for (int i = 0; i < rest; ++i) col[i] = G(pc.pivots[k + 1 + i], pk);
    if (k > 0) col.head(rest).noalias() -= L.block(k + 1, 0, rest, k) * L.row(k).head(k).transpose();
    for (int i = 0; i < rest; ++i) {
      const double v = col[i] / lkk;
      L(k + 1 + i, k) = v;
      d[pc.pivots[k + 1 + i]] -= v * v;
    }
  }
  pc.rank = k;
  pc.L = L.leftCols(k);
  return pc;
}

Matrix gram_orthonormal_coords(const Matrix& G, double rel_tol) {
  const PivotedCholesky pc = pivoted_cholesky(0.5 * (G + G.transpose()), rel_tol);
  const int r = pc.rank;
  const Matrix Linv_t =
      pc.L.topRows(r).triangularView<Eigen::Lower>().solve(Matrix::Identity(r, r)).transpose();
  Matrix B = Matrix::Zero(G.rows(), r);
  for (int a = 0; a < r; ++a) B.row(pc.pivots[a]) = Linv_t.row(a);
  return B;
}

SparseDirect::SparseDirect(const SparseMatrix& A)
    : llt_(std::make_shared<Eigen::SimplicialLLT<SparseMatrix>>()), n_(static_cast<int>(A.rows())) {
  if (A.rows() != A.cols()) throw ConfigError("sparse_direct: matrix is not square");
  llt_->compute(A);
  if (llt_->info() != Eigen::Success) {
    throw NumericalError("sparse_direct: matrix of size " + std::to_string(n_) +
                         " is not positive definite");
  }
}

Vector SparseDirect::solve(const Vector& b) const {
  if (!llt_) throw NumericalError("sparse_direct: solve before factorization");
  return llt_->solve(b);
}

Matrix SparseDirect::solve(const Matrix& B) const {
  if (!llt_) throw NumericalError("sparse_direct: solve before factorization");
  return llt_->solve(B);
}

CoarseSolver::CoarseSolver(const Matrix& G, double rel_tol) : n_(static_cast<int>(G.rows())) {
  scale_ = Vector::Zero(n_);
  for (int i = 0; i < n_; ++i) {
    if (G(i, i) > 0.0) scale_[i] = 1.0 / std::sqrt(G(i, i));
  }
  const Matrix Gs = scale_.asDiagonal() * (0.5 * (G + G.transpose())) * scale_.asDiagonal();
  const PivotedCholesky pc = pivoted_cholesky(Gs, rel_tol);
  active_.assign(pc.pivots.begin(), pc.pivots.begin() + pc.rank);
  std::sort(active_.begin(), active_.end());
  if (n_ > 0 && active_.empty()) throw NumericalError("coarse matrix has rank 0");
  Matrix sub(rank(), rank());
  for (int a = 0; a < rank(); ++a) {
    for (int b = 0; b < rank(); ++b) sub(a, b) = Gs(active_[a], active_[b]);
  }
  llt_.compute(sub);
  if (llt_.info() != Eigen::Success) {
    throw NumericalError("coarse matrix factorization failed at rank " + std::to_string(rank()));
  }
}

Vector CoarseSolver::solve(const Vector& b) const {
  Vector bs(rank());
  for (int a = 0; a < rank(); ++a) bs[a] = scale_[active_[a]] * b[active_[a]];
  const Vector cs = llt_.solve(bs);
  Vector c = Vector::Zero(n_);
  for (int a = 0; a < rank(); ++a) c[active_[a]] = scale_[active_[a]] * cs[a];
  return c;
}

namespace {

// Eigenvalues of the symmetric tridiagonal (d, e) below x, by Sturm sequence.
int sturm_count(const Vector& d, const Vector& e, double x) {
  int count = 0;
  double q = 1.0;
  for (int i = 0; i < d.size(); ++i) {
    const double off = i > 0 ? e[i - 1] * e[i - 1] : 0.0;
    q = d[i] - x - (i > 0 ? off / q : 0.0);
    if (q == 0.0) q = -1e-300;
    if (q < 0.0) ++count;
  }
  return count;
}

// k-th smallest eigenvalue by bisection inside the Gershgorin interval.
double tridiagonal_eigenvalue(const Vector& d, const Vector& e, int k, double lo, double hi) {
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (sturm_count(d, e, mid) > k) hi = mid;
    else lo = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

std::pair<double, double> lanczos_extremes(const std::vector<double>& alpha,
                                           const std::vector<double>& beta) {
  const int k = static_cast<int>(alpha.size());
  if (k == 0) return {0.0, 0.0};
  Vector diag(k), sub(std::max(0, k - 1));
  for (int i = 0; i < k; ++i) {
    diag[i] = 1.0 / alpha[i] + (i > 0 ? beta[i - 1] / alpha[i - 1] : 0.0);
    if (i + 1 < k) sub[i] = std::sqrt(beta[i]) / alpha[i];
  }
  if (k == 1) return {diag[0], diag[0]};
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (int i = 0; i < k; ++i) {
    const double r = (i > 0 ? std::abs(sub[i - 1]) : 0.0) + (i + 1 < k ? std::abs(sub[i]) : 0.0);
    lo = std::min(lo, diag[i] - r);
    hi = std::max(hi, diag[i] + r);
  }
  return {tridiagonal_eigenvalue(diag, sub, 0, lo, hi), tridiagonal_eigenvalue(diag, sub, k - 1, lo, hi)};
}

PcgResult pcg(const SparseMatrix& A, const Vector& b, const Preconditioner& M_inv, double tol,
              int max_it) {
  if (A.rows() != A.cols() || b.size() != A.rows()) throw ConfigError("pcg: size mismatch");
  return pcg([&A](const Vector& x, Vector& y) { y.noalias() = A * x; }, b, M_inv, tol, max_it);
}

Preconditioner identity_preconditioner() {
  return [](const Vector& r, Vector& z) { z = r; };
}

PcgResult pcg(const LinearOperator& A, const Vector& b, const Preconditioner& M_inv, double tol,
              int max_it) {
  const int n = static_cast<int>(b.size());
  PcgResult res;
  res.x = Vector::Zero(n);
  Vector r = b, z(n);
  M_inv(r, z);
  double rho = r.dot(z);
  const double rho0 = rho;
  res.report.residuals.push_back(1.0);
  if (rho0 <= 0.0) {
    res.report.converged = rho0 == 0.0;
    if (rho0 < 0.0) throw NumericalError("pcg: preconditioner is not positive");
    return res;
  }
  Vector p = z, q(n);
  std::vector<double> alphas, betas;
  for (int it = 0; it < max_it; ++it) {
    A(p, q);
    const double pq = p.dot(q);
    if (!(pq > 0.0)) throw NumericalError("pcg: non-positive curvature, operator is not SPD");
    const double alpha = rho / pq;
    alphas.push_back(alpha);
    res.x += alpha * p;
    r -= alpha * q;
    M_inv(r, z);
    const double rho_new = r.dot(z);
    const double rel = std::sqrt(std::max(0.0, rho_new) / rho0);
    if (rel > 10.0 * res.report.residuals.back()) res.report.residual_growth = true;
    res.report.residuals.push_back(rel);
    res.report.iterations = it + 1;
    if (rel <= tol) {
      res.report.converged = true;
      break;
    }
    const double beta = rho_new / rho;
    betas.push_back(beta);
    p = z + beta * p;
    rho = rho_new;
  }
  const auto [lo, hi] = lanczos_extremes(alphas, betas);
  res.report.lambda_min = lo;
  res.report.lambda_max = hi;
  res.report.condition = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  return res;
}

TwoLevelPreconditioner::TwoLevelPreconditioner(const SparseMatrix& A, const SparseMatrix& P,
                                               std::vector<std::vector<int>> subdomain_dofs,
                                               Execution exec)
    : P_(P), dofs_(std::move(subdomain_dofs)), exec_(exec) {
  if (P.cols() > 0 && P.rows() != A.rows()) throw ConfigError("coarse prolongation size mismatch");
  if (P.cols() > 0) {
    const Matrix G = Matrix(P.transpose() * (A * P));
    coarse_ = CoarseSolver(G);
  }
  const int m = static_cast<int>(dofs_.size());
  local_.resize(m);
  solvers_.resize(m);
  parallel_for(
      m,
      [&](int k) {
        local_[k] = submatrix(A, dofs_[k]);
        try {
          solvers_[k] = SparseDirect(local_[k]);
        } catch (const NumericalError& e) {
          throw NumericalError("subdomain " + std::to_string(k) + ": " + e.what());
        }
      },
      exec);
}

void TwoLevelPreconditioner::apply_impl(const Vector& r, Vector& z, Execution exec) const {
  z = Vector::Zero(r.size());
  if (P_.cols() > 0) z = P_ * coarse_.solve(P_.transpose() * r);
  const int m = static_cast<int>(dofs_.size());
  std::vector<Vector> parts(m);
  parallel_for(
      m,
      [&](int k) {
        const auto& d = dofs_[k];
        Vector rk(d.size());
        for (size_t a = 0; a < d.size(); ++a) rk[static_cast<int>(a)] = r[d[a]];
        parts[k] = solvers_[k].solve(rk);
      },
      exec);
  for (int k = 0; k < m; ++k) {
    const auto& d = dofs_[k];
    for (size_t a = 0; a < d.size(); ++a) z[d[a]] += parts[k][static_cast<int>(a)];
  }
}

void TwoLevelPreconditioner::apply(const Vector& r, Vector& z) const { apply_impl(r, z, exec_); }

void TwoLevelPreconditioner::apply_reference(const Vector& r, Vector& z) const {
  apply_impl(r, z, Execution::serial);
}

Preconditioner TwoLevelPreconditioner::as_function() const {
  return [this](const Vector& r, Vector& z) { apply(r, z); };
}

}  // namespace gmsfem
