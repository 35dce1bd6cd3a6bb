#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "qmc/error.hpp"
#include "qmc/types.hpp"

namespace qmc {

// Thin SVD X = U diag(σ) Vᵀ with k = min(rows, cols) singular values,
// sorted nonincreasing.
template <typename Scalar>
struct SvdResult {
    Matrix<Scalar> left_vectors;   // rows × k
    Vector<Scalar> singular_values;
    Matrix<Scalar> right_vectors;  // cols × k
};

template <typename Derived>
SvdResult<typename Derived::Scalar> thin_svd(const Eigen::MatrixBase<Derived>& x)
{
    using Scalar = typename Derived::Scalar;
    if (!x.allFinite()) {
        throw DomainError("SVD of a matrix with non-finite entries");
    }
    Eigen::BDCSVD<Matrix<Scalar>> svd(x.derived(), Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success) {
        throw NumericalError("SVD failed to converge on a " + std::to_string(x.rows()) + "x" +
                             std::to_string(x.cols()) + " matrix");
    }
    return {svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

template <typename Derived>
Vector<typename Derived::Scalar> singular_values(const Eigen::MatrixBase<Derived>& x)
{
    using Scalar = typename Derived::Scalar;
    if (!x.allFinite()) {
        throw DomainError("SVD of a matrix with non-finite entries");
    }
    Eigen::BDCSVD<Matrix<Scalar>> svd(x.derived());
    if (svd.info() != Eigen::Success) {
        throw NumericalError("SVD failed to converge");
    }
    return svd.singularValues();
}

// Gaussian smoothing width δ.
struct SrfParams {
    double delta;

    explicit SrfParams(double d) : delta(d)
    {
        if (!(delta > 0.0) || !std::isfinite(delta)) {
            throw DomainError("SRF width delta must be positive and finite");
        }
    }
};

// n - Σ exp(-σ²/2δ²) over given singular values; n is their count.
template <typename Scalar>
Scalar srf_from_singular_values(const Vector<Scalar>& sigma, double delta)
{
    using std::expm1;
    const Scalar two_d2 = Scalar(2) * static_cast<Scalar>(delta * delta);
    Scalar total(0);
    for (Eigen::Index i = 0; i < sigma.size(); ++i) {
        total += -expm1(-sigma(i) * sigma(i) / two_d2);
    }
    return total;
}

// Smoothed rank n - F_δ(X), n = min(rows, cols).
template <typename Derived>
typename Derived::Scalar srf_value(const Eigen::MatrixBase<Derived>& x, SrfParams params)
{
    return srf_from_singular_values(singular_values(x), params.delta);
}

// G_δ(X) = ∂F_δ/∂X = U diag(-σ_i/δ² exp(-σ_i²/2δ²)) Vᵀ. The smoothed rank
// n - F_δ has gradient -G_δ.
template <typename Derived>
Matrix<typename Derived::Scalar> srf_gradient(const Eigen::MatrixBase<Derived>& x,
                                              SrfParams params)
{
    using Scalar = typename Derived::Scalar;
    using std::exp;
    const auto svd = thin_svd(x);
    const Scalar d2 = static_cast<Scalar>(params.delta * params.delta);
    const Vector<Scalar> weights = svd.singular_values.unaryExpr(
        [d2](Scalar s) { return -s / d2 * exp(-s * s / (Scalar(2) * d2)); });
    return svd.left_vectors * weights.asDiagonal() * svd.right_vectors.transpose();
}

// Relative distance between n - F_δ(X) and its large-δ limit ‖X‖_F²/(2δ²).
template <typename Derived>
typename Derived::Scalar frobenius_limit_gap(const Eigen::MatrixBase<Derived>& x, double delta)
{
    using Scalar = typename Derived::Scalar;
    using std::abs;
    const SrfParams params(delta);
    const Scalar limit = x.squaredNorm() / (Scalar(2) * static_cast<Scalar>(delta * delta));
    if (!(limit > Scalar(0))) {
        throw DomainError("Frobenius limit gap is undefined for the zero matrix");
    }
    return abs(srf_value(x, params) - limit) / limit;
}

// Count of singular values above `relative_threshold`·σ_max.
template <typename Derived>
Eigen::Index numerical_rank(const Eigen::MatrixBase<Derived>& x, double relative_threshold)
{
    const auto s = singular_values(x);
    if (s.size() == 0 || s(0) == 0) {
        return 0;
    }
    return (s.array() > relative_threshold * s(0)).count();
}

}  // namespace qmc
