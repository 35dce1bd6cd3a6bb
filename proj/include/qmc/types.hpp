#pragma once

#include <Eigen/Dense>

namespace qmc {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Candidate / recovered matrix X.
using DenseMatrix = Matrix<double>;

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& x)
{
    return x.allFinite();
}

}  // namespace qmc
