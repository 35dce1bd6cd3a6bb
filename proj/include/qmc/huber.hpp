#pragma once

#include <cmath>

#include "qmc/error.hpp"
#include "qmc/quantization.hpp"
#include "qmc/types.hpp"

namespace qmc {

// Huber penalty for one observed entry: quadratic within gap/2 of the level
// center, linear beyond, shifted down by gap²/4 so that it is negative exactly
// on the open quantization interval.
struct HuberParams {
    double gap = 1.0;
    double center = 0.0;

    HuberParams(double gap_, double center_) : gap(gap_), center(center_)
    {
        if (!(gap > 0.0) || !std::isfinite(gap) || !std::isfinite(center)) {
            throw DomainError("Huber gap must be positive and center finite");
        }
    }
};

template <typename Scalar>
Scalar huber_translated(const HuberParams& p, Scalar x)
{
    using std::abs;
    if (!std::isfinite(static_cast<double>(x))) {
        throw DomainError("Huber loss evaluated at a non-finite point");
    }
    const Scalar g = static_cast<Scalar>(p.gap);
    const Scalar d = abs(x - static_cast<Scalar>(p.center));
    const Scalar shift = g * g / Scalar(4);
    if (d <= g / Scalar(2)) {
        return d * d - shift;
    }
    return g * (d - g / Scalar(4)) - shift;
}

template <typename Scalar>
Scalar huber_derivative(const HuberParams& p, Scalar x)
{
    if (!std::isfinite(static_cast<double>(x))) {
        throw DomainError("Huber derivative evaluated at a non-finite point");
    }
    const Scalar g = static_cast<Scalar>(p.gap);
    const Scalar d = x - static_cast<Scalar>(p.center);
    if (d <= -g / Scalar(2)) {
        return -g;
    }
    if (d >= g / Scalar(2)) {
        return g;
    }
    return Scalar(2) * d;
}

// Σ over Ω of the translated Huber loss.
template <typename Derived>
typename Derived::Scalar huber_sum(const Eigen::MatrixBase<Derived>& x, const ObservedMatrix& obs)
{
    using Scalar = typename Derived::Scalar;
    check_shape(x, obs);
    const double g = obs.scheme().gap();
    Scalar total(0);
    for (const auto& o : obs.observations()) {
        total += huber_translated(HuberParams(g, obs.center(o)), x(o.row, o.col));
    }
    return total;
}

// Gradient of huber_sum: the Huber derivative on Ω, zero elsewhere.
template <typename Derived>
Matrix<typename Derived::Scalar> huber_gradient(const Eigen::MatrixBase<Derived>& x,
                                                const ObservedMatrix& obs)
{
    using Scalar = typename Derived::Scalar;
    check_shape(x, obs);
    const double g = obs.scheme().gap();
    Matrix<Scalar> grad = Matrix<Scalar>::Zero(x.rows(), x.cols());
    for (const auto& o : obs.observations()) {
        grad(o.row, o.col) = huber_derivative(HuberParams(g, obs.center(o)), x(o.row, o.col));
    }
    return grad;
}

}  // namespace qmc
