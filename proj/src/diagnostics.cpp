#include "qmc/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "qmc/error.hpp"
#include "qmc/huber.hpp"
#include "qmc/srf.hpp"

namespace qmc {

LambdaWindow lambda_window(std::size_t r_star, double delta_gap, std::size_t omega_size, double g,
                           double epsilon)
{
    if (r_star == 0 || omega_size == 0 || !(g > 0.0) || !(epsilon > 0.0) ||
        !(delta_gap > 0.0)) {
        throw DomainError("lambda window inputs must be positive");
    }
    const double threshold = static_cast<double>(omega_size - 1) * g * g / 4.0;
    if (!(delta_gap > threshold)) {
        throw AssumptionError("separation Δ = " + std::to_string(delta_gap) +
                              " must exceed (|Ω|-1)g²/4 = " + std::to_string(threshold));
    }
    LambdaWindow w;
    w.lower = static_cast<double>(r_star) / (delta_gap - threshold);
    w.upper = 4.0 / (g * g * static_cast<double>(omega_size) + epsilon);
    w.feasible = w.lower <= w.upper;
    return w;
}

namespace {

DenseMatrix gradient(const DenseMatrix& x, const ObservedMatrix& obs, double delta, double lambda)
{
    DenseMatrix grad = -srf_gradient(x, SrfParams(delta));
    if (lambda != 0.0) {
        grad += lambda * huber_gradient(x, obs);
    }
    return grad;
}

bool has_repeated_singular_values(const DenseMatrix& x, double tolerance)
{
    const auto s = singular_values(x);
    const double scale = std::max(1.0, s.size() ? s(0) : 0.0);
    for (Eigen::Index i = 1; i < s.size(); ++i) {
        if (s(i - 1) - s(i) < tolerance * scale) {
            return true;
        }
    }
    return false;
}

void check_probe_inputs(const DenseMatrix& x, const ObservedMatrix& obs, double lambda,
                        const ProbeOptions& options)
{
    check_shape(x, obs);
    if (static_cast<std::size_t>(x.size()) > options.max_entries) {
        throw CapacityError("convexity probe supports at most " +
                            std::to_string(options.max_entries) + " entries, got " +
                            std::to_string(x.size()));
    }
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        throw DomainError("lambda must be nonnegative and finite");
    }
}

}  // namespace

DenseMatrix objective_hessian(const DenseMatrix& x, const ObservedMatrix& obs, double delta,
                              double lambda)
{
    const SrfParams params(delta);
    const Eigen::Index n = x.size();
    // Resolve both the SRF scale δ and the Huber kink scale g.
    const double h = 1e-4 * std::min({params.delta, obs.scheme().gap(), 1.0});
    DenseMatrix hess(n, n);
    DenseMatrix probe = x;
    for (Eigen::Index k = 0; k < n; ++k) {
        const double saved = probe.data()[k];
        probe.data()[k] = saved + h;
        const DenseMatrix plus = gradient(probe, obs, delta, lambda);
        probe.data()[k] = saved - h;
        const DenseMatrix minus = gradient(probe, obs, delta, lambda);
        probe.data()[k] = saved;
        hess.col(k) = (plus - minus).reshaped() / (2.0 * h);
    }
    return hess;
}

ConvexityProbeReport convexity_probe(const DenseMatrix& x_star, const ObservedMatrix& obs,
                                     double delta, double lambda, double radius,
                                     std::size_t samples, std::uint64_t seed,
                                     const ProbeOptions& options)
{
    check_probe_inputs(x_star, obs, lambda, options);
    if (samples < 1) {
        throw DomainError("convexity probe needs at least one sample");
    }
    if (!(radius >= 0.0) || !std::isfinite(radius)) {
        throw DomainError("probe radius must be nonnegative");
    }
    const SrfParams params(delta);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    const auto dim = static_cast<double>(x_star.size());

    ConvexityProbeReport report;
    report.delta_probed = params.delta;
    report.min_eigenvalue_found = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < samples; ++s) {
        DenseMatrix point = x_star;
        if (s > 0 && radius > 0.0) {
            DenseMatrix dir(x_star.rows(), x_star.cols());
            for (Eigen::Index k = 0; k < dir.size(); ++k) {
                dir.data()[k] = normal(rng);
            }
            const double r = radius * std::pow(uniform(rng), 1.0 / dim);
            point += (r / dir.norm()) * dir;
        }
        if (has_repeated_singular_values(point, options.degeneracy_tolerance)) {
            ++report.skipped_points;
            continue;
        }
        DenseMatrix hess = objective_hessian(point, obs, params.delta, lambda);
        const DenseMatrix sym = 0.5 * (hess + hess.transpose());
        Eigen::SelfAdjointEigenSolver<DenseMatrix> eig(sym, Eigen::EigenvaluesOnly);
        if (eig.info() != Eigen::Success) {
            throw NumericalError("eigenvalue solver failed on probed Hessian");
        }
        report.min_eigenvalue_found = std::min(report.min_eigenvalue_found, eig.eigenvalues()(0));
        ++report.sample_points;
    }
    report.condition_holds = report.sample_points > 0 &&
                             report.min_eigenvalue_found >= -options.psd_tolerance;
    return report;
}

DeltaSearch suggest_delta_traced(const DenseMatrix& x_star, const ObservedMatrix& obs,
                                 double lambda, double radius, std::size_t samples,
                                 std::uint64_t seed, const ProbeOptions& options)
{
    check_probe_inputs(x_star, obs, lambda, options);
    const auto sigma = singular_values(x_star);
    const double sigma_max = sigma.size() ? sigma(0) : 0.0;
    if (!(sigma_max > 0.0)) {
        throw DomainError("delta search needs a nonzero reference matrix");
    }
    DeltaSearch search;
    auto holds = [&](double delta) {
        const bool ok =
            convexity_probe(x_star, obs, delta, lambda, radius, samples, seed, options)
                .condition_holds;
        search.trace.emplace_back(delta, ok);
        return ok;
    };
    double lo = std::log(1e-6 * sigma_max);
    double hi = std::log(1e3 * sigma_max);
    if (!holds(std::exp(hi))) {
        throw SearchError("no delta up to 1e3·σ_max makes the sampled Hessians PSD");
    }
    if (holds(std::exp(lo))) {
        search.delta = std::exp(lo);
        return search;
    }
    // Invariant: probe fails at lo, holds at hi.
    while (hi - lo > 1e-3) {
        const double mid = 0.5 * (lo + hi);
        (holds(std::exp(mid)) ? hi : lo) = mid;
    }
    search.delta = std::exp(hi);
    return search;
}

double suggest_delta(const DenseMatrix& x_star, const ObservedMatrix& obs, double lambda,
                     double radius, std::size_t samples, std::uint64_t seed,
                     const ProbeOptions& options)
{
    return suggest_delta_traced(x_star, obs, lambda, radius, samples, seed, options).delta;
}

}  // namespace qmc
