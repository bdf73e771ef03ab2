#pragma once

#include <string_view>

#include <Eigen/Dense>

namespace cbb {

/// Data matrices are stored row-major: one row per context / step.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Square d x d accumulators (Gram matrices, ridge matrices).
using SquareMatrix = Eigen::MatrixXd;

// Throw std::invalid_argument naming `what` if any entry is NaN or infinite.
void require_finite(const Matrix& m, std::string_view what);
void require_finite(const Vector& v, std::string_view what);

}  // namespace cbb
