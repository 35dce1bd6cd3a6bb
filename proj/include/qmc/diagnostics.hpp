#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "qmc/quantization.hpp"
#include "qmc/types.hpp"

namespace qmc {

// Regularization interval on which the Huber-penalized rank problem keeps the
// constrained minimizer as its unique global minimizer.
struct LambdaWindow {
    double lower = 0.0;  // r* / (Δ - (|Ω|-1)g²/4)
    double upper = 0.0;  // 4 / (g²|Ω| + ε)
    bool feasible = false;
};

// Δ must exceed (|Ω|-1)g²/4; throws AssumptionError otherwise.
LambdaWindow lambda_window(std::size_t r_star, double delta_gap, std::size_t omega_size, double g,
                           double epsilon);

struct ConvexityProbeReport {
    double delta_probed = 0.0;
    std::size_t sample_points = 0;   // evaluated samples
    std::size_t skipped_points = 0;  // samples dropped at repeated singular values
    double min_eigenvalue_found = 0.0;
    bool condition_holds = false;
};

struct ProbeOptions {
    double psd_tolerance = 1e-6;
    // Singular values closer than this (relative to max(1, σ_max)) mark a
    // non-smooth point of the SVD.
    double degeneracy_tolerance = 1e-6;
    std::size_t max_entries = 64;
};

// Finite-difference Hessian of G̃_δ (vectorized column-major) at x. λ may be 0.
DenseMatrix objective_hessian(const DenseMatrix& x, const ObservedMatrix& obs, double delta,
                              double lambda);

// Samples `samples` seeded points uniformly in the Frobenius ball of `radius`
// around x_star (the first sample is x_star itself) and checks that the
// Hessian of G̃_δ is PSD at each.
ConvexityProbeReport convexity_probe(const DenseMatrix& x_star, const ObservedMatrix& obs,
                                     double delta, double lambda, double radius,
                                     std::size_t samples, std::uint64_t seed,
                                     const ProbeOptions& options = {});

struct DeltaSearch {
    double delta = 0.0;
    // (δ, probe result) in evaluation order.
    std::vector<std::pair<double, bool>> trace;
};

// Smallest δ in [1e-6·σ_max, 1e3·σ_max] (log-bisection) at which the sampled
// probe holds. Throws SearchError when even the upper end fails.
DeltaSearch suggest_delta_traced(const DenseMatrix& x_star, const ObservedMatrix& obs,
                                 double lambda, double radius, std::size_t samples,
                                 std::uint64_t seed, const ProbeOptions& options = {});

double suggest_delta(const DenseMatrix& x_star, const ObservedMatrix& obs, double lambda,
                     double radius, std::size_t samples, std::uint64_t seed,
                     const ProbeOptions& options = {});

}  // namespace qmc
