#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace gmsfem {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

}  // namespace gmsfem
