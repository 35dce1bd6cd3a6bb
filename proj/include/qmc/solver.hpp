#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "qmc/error.hpp"
#include "qmc/huber.hpp"
#include "qmc/quantization.hpp"
#include "qmc/srf.hpp"
#include "qmc/types.hpp"

namespace qmc {

// Inputs of the graduated non-convexity solver. Defaults are tuned on
// synthetic 60×50 rank-3 instances with five unit-gap levels.
struct SolverConfig {
    double step_size = 10.0;           // μ
    double decay_factor = 0.93;        // α, δ ← αδ between outer iterations
    double regularization = 0.03;      // λ
    double delta_init_constant = 2.0;  // C, δ₀ = C·σ_max(M)
    double inner_tolerance = 1e-5;
    double outer_tolerance = 1e-4;
    std::size_t max_inner_iterations = 200;
    std::size_t max_outer_iterations = 200;
    // The outer stopping test is skipped before this many outer iterations;
    // at large δ the warm start is already nearly stationary.
    std::size_t min_outer_iterations = 2;
    // Halve μ and retry whenever a step increases the objective.
    bool backtracking = true;
    // After min_outer_iterations, stop before the first outer iteration that
    // takes a feasible iterate (all observed intervals met) out of feasibility.
    bool keep_feasible = true;

    void validate() const;
};

template <typename Scalar>
struct BasicSolveReport {
    Matrix<Scalar> recovered;
    std::vector<double> delta_trace;
    std::vector<std::vector<Scalar>> objective_trace;  // per outer iteration
    std::vector<std::size_t> inner_iteration_counts;
    std::vector<bool> inner_converged;
    std::size_t outer_iterations = 0;
    bool outer_converged = false;
    // Set when keep_feasible ended the run; the discarded iterate is not traced.
    bool stopped_feasible = false;
};

using SolveReport = BasicSolveReport<double>;

inline void SolverConfig::validate() const
{
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw DomainError(std::string(name) + " must be positive and finite");
        }
    };
    positive(step_size, "step_size");
    positive(regularization, "regularization");
    positive(delta_init_constant, "delta_init_constant");
    positive(inner_tolerance, "inner_tolerance");
    positive(outer_tolerance, "outer_tolerance");
    if (!(decay_factor > 0.0 && decay_factor < 1.0)) {
        throw DomainError("decay_factor must lie in (0, 1)");
    }
    if (max_inner_iterations < 1 || max_outer_iterations < 1) {
        throw DomainError("iteration caps must be at least 1");
    }
}

namespace detail {

inline void check_delta_lambda(double delta, double lambda)
{
    if (!(delta > 0.0) || !std::isfinite(delta)) {
        throw DomainError("delta must be positive and finite");
    }
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        throw DomainError("lambda must be positive and finite");
    }
}

template <typename Scalar>
struct ValueAndGradient {
    Scalar value;
    Matrix<Scalar> gradient;
};

// Objective and gradient sharing one SVD.
template <typename Derived>
ValueAndGradient<typename Derived::Scalar> evaluate(const Eigen::MatrixBase<Derived>& x,
                                                    const ObservedMatrix& obs, double delta,
                                                    double lambda)
{
    using Scalar = typename Derived::Scalar;
    using std::exp;
    const auto svd = thin_svd(x);
    const Scalar d2 = static_cast<Scalar>(delta * delta);
    const Scalar lam = static_cast<Scalar>(lambda);
    // -G_δ has diagonal factors +σ/δ² exp(-σ²/2δ²).
    const Vector<Scalar> w = svd.singular_values.unaryExpr(
        [d2](Scalar s) { return s / d2 * exp(-s * s / (Scalar(2) * d2)); });
    Matrix<Scalar> grad = svd.left_vectors * w.asDiagonal() * svd.right_vectors.transpose();
    grad += lam * huber_gradient(x, obs);
    const Scalar value = srf_from_singular_values(svd.singular_values, delta) +
                         lam * huber_sum(x, obs);
    return {value, std::move(grad)};
}

template <typename A, typename B>
double relative_change(const Eigen::MatrixBase<A>& next, const Eigen::MatrixBase<B>& prev)
{
    using std::max;
    const double denom = max(static_cast<double>(prev.norm()), 1.0);
    return static_cast<double>((next - prev).norm()) / denom;
}

}  // namespace detail

// G̃_δ(X, λ) = n - F_δ(X) + λ H_Ω(X).
template <typename Derived>
typename Derived::Scalar objective(const Eigen::MatrixBase<Derived>& x, const ObservedMatrix& obs,
                                   double delta, double lambda)
{
    detail::check_delta_lambda(delta, lambda);
    check_shape(x, obs);
    using Scalar = typename Derived::Scalar;
    return srf_value(x, SrfParams(delta)) + static_cast<Scalar>(lambda) * huber_sum(x, obs);
}

// ∇G̃_δ = -G_δ(X) + λ G_H(X).
template <typename Derived>
Matrix<typename Derived::Scalar> objective_gradient(const Eigen::MatrixBase<Derived>& x,
                                                    const ObservedMatrix& obs, double delta,
                                                    double lambda)
{
    detail::check_delta_lambda(delta, lambda);
    check_shape(x, obs);
    using Scalar = typename Derived::Scalar;
    return -srf_gradient(x, SrfParams(delta)) +
           static_cast<Scalar>(lambda) * huber_gradient(x, obs);
}

// Minimizer of x²/(2δ²) + λ H̃(x) for one entry with level center m.
inline double warm_start_entry(double m, double gap, double delta, double lambda)
{
    const double t = 2.0 * lambda * delta * delta;
    const double quadratic = m * t / (1.0 + t);
    if (std::abs(quadratic - m) <= 0.5 * gap) {
        return quadratic;
    }
    const double sign = m > 0.0 ? 1.0 : -1.0;
    // Linear branch on the side of m facing the origin.
    const double linear = sign * lambda * gap * delta * delta;
    if (sign * (m - linear) > 0.5 * gap) {
        return linear;
    }
    return m - sign * 0.5 * gap;
}

// argmin_X ‖X‖_F²/(2δ²) + λ H_Ω(X), solved entrywise in closed form.
template <typename Scalar = double>
Matrix<Scalar> init_warm_start(const ObservedMatrix& obs, double delta, double lambda)
{
    detail::check_delta_lambda(delta, lambda);
    Matrix<Scalar> z = Matrix<Scalar>::Zero(static_cast<Eigen::Index>(obs.rows()),
                                            static_cast<Eigen::Index>(obs.cols()));
    const double g = obs.scheme().gap();
    for (const auto& o : obs.observations()) {
        z(o.row, o.col) = static_cast<Scalar>(warm_start_entry(obs.center(o), g, delta, lambda));
    }
    return z;
}

template <typename Scalar>
struct InnerResult {
    Matrix<Scalar> iterate;
    std::vector<Scalar> objective_trace;
    std::size_t iterations = 0;
    bool converged = false;
};

// Fixed-step gradient descent on G̃_δ from x0. Stops when the relative
// Frobenius change of consecutive iterates drops below inner_tolerance.
template <typename Derived>
InnerResult<typename Derived::Scalar> inner_gd_traced(const Eigen::MatrixBase<Derived>& x0,
                                                      const ObservedMatrix& obs, double delta,
                                                      const SolverConfig& config)
{
    using Scalar = typename Derived::Scalar;
    config.validate();
    detail::check_delta_lambda(delta, config.regularization);
    check_shape(x0, obs);

    constexpr int kMaxConsecutiveIncreases = 10;
    InnerResult<Scalar> result;
    Matrix<Scalar> x = x0;
    double step = config.step_size;
    int increases = 0;

    auto current = detail::evaluate(x, obs, delta, config.regularization);
    result.objective_trace.push_back(current.value);
    while (result.iterations < config.max_inner_iterations) {
        Matrix<Scalar> next = x - static_cast<Scalar>(step) * current.gradient;
        if (!next.allFinite()) {
            throw StepSizeError("gradient step produced non-finite entries at step size " +
                                    std::to_string(config.step_size),
                                config.step_size);
        }
        auto candidate = detail::evaluate(next, obs, delta, config.regularization);
        ++result.iterations;
        if (config.backtracking && candidate.value > current.value) {
            step *= 0.5;
            if (step < 1e-12 * config.step_size) {
                result.converged = true;
                break;
            }
            continue;
        }
        if (candidate.value > current.value) {
            if (++increases >= kMaxConsecutiveIncreases) {
                throw StepSizeError("objective increased for " +
                                        std::to_string(kMaxConsecutiveIncreases) +
                                        " consecutive iterations; step size " +
                                        std::to_string(config.step_size) + " is too large",
                                    config.step_size);
            }
        } else {
            increases = 0;
        }
        const double change = detail::relative_change(next, x);
        x = std::move(next);
        current = std::move(candidate);
        result.objective_trace.push_back(current.value);
        if (change < config.inner_tolerance) {
            result.converged = true;
            break;
        }
    }
    result.iterate = std::move(x);
    return result;
}

template <typename Derived>
Matrix<typename Derived::Scalar> inner_gd(const Eigen::MatrixBase<Derived>& x0,
                                          const ObservedMatrix& obs, double delta,
                                          const SolverConfig& config)
{
    return inner_gd_traced(x0, obs, delta, config).iterate;
}

// Graduated non-convexity: δ₀ = C·σ_max(M), closed-form warm start, then
// alternate gradient descent and δ ← αδ with warm starts.
template <typename Scalar = double>
BasicSolveReport<Scalar> solve(const ObservedMatrix& obs, const SolverConfig& config)
{
    config.validate();
    if (obs.empty()) {
        throw DomainError("cannot solve with an empty observation set");
    }
    const Matrix<Scalar> m = obs.zero_filled().template cast<Scalar>();
    const auto sigma = singular_values(m);
    const double sigma_max = sigma.size() ? static_cast<double>(sigma(0)) : 0.0;
    if (!(sigma_max > 0.0)) {
        throw DomainError("observed matrix is zero; initial delta undefined");
    }

    BasicSolveReport<Scalar> report;
    double delta = config.delta_init_constant * sigma_max;
    Matrix<Scalar> z = init_warm_start<Scalar>(obs, delta, config.regularization);
    bool feasible = config.keep_feasible && violation_count(z, obs) == 0;
    for (std::size_t k = 0; k < config.max_outer_iterations; ++k) {
        auto inner = inner_gd_traced(z, obs, delta, config);
        if (config.keep_feasible) {
            const bool next = violation_count(inner.iterate, obs) == 0;
            if (feasible && !next && k >= config.min_outer_iterations) {
                report.stopped_feasible = true;
                break;
            }
            feasible = next;
        }
        report.delta_trace.push_back(delta);
        report.objective_trace.push_back(std::move(inner.objective_trace));
        report.inner_iteration_counts.push_back(inner.iterations);
        report.inner_converged.push_back(inner.converged);
        const double change = detail::relative_change(inner.iterate, z);
        z = std::move(inner.iterate);
        report.outer_iterations = k + 1;
        delta *= config.decay_factor;
        if (k + 1 >= config.min_outer_iterations && change < config.outer_tolerance) {
            report.outer_converged = true;
            break;
        }
    }
    report.recovered = std::move(z);
    return report;
}

}  // namespace qmc
