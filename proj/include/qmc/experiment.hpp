#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qmc/data_io.hpp"
#include "qmc/eval.hpp"
#include "qmc/solver.hpp"

namespace qmc {

struct SynthSpec {
    std::size_t rows = 60;
    std::size_t cols = 50;
    std::size_t rank = 3;
};

// Either a ratings file or a synthetic generator; the scheme applies to both.
struct DataSource {
    std::optional<std::filesystem::path> ratings;
    SynthSpec synth;
    QuantizationScheme scheme = QuantizationScheme::uniform(1.0, 1.0, 5);

    // Full observation set for one seed (synthetic instances depend on it).
    ObservedMatrix load(std::uint64_t seed) const;
};

struct ExperimentConfig {
    DataSource source;
    std::vector<double> missing_rates;
    std::vector<std::uint64_t> seeds;
    SolverConfig solver;
    unsigned parallel = 1;
};

struct ExperimentRow {
    double missing_rate = 0.0;
    std::optional<std::uint64_t> seed;  // empty on per-rate mean rows
    double rmse_continuous = 0.0;
    double rmse_quantized = 0.0;
    double accuracy = 0.0;
    double runtime_seconds = 0.0;
    double outer_iters = 0.0;
    std::string error;  // non-empty when the cell failed
    bool diverged = false;

    bool failed() const { return !error.empty(); }
};

// One row per (rate, seed) ordered by rate then seed, followed after each
// rate's seed rows by a mean row over that rate's successful seeds.
std::vector<ExperimentRow> run_experiment(const ExperimentConfig& config);

inline constexpr const char* kCsvHeader =
    "missing_rate,seed,rmse_continuous,rmse_quantized,accuracy,runtime_seconds,outer_iters";

// Failed rows carry "nan" metrics; their causes follow as '#' comment lines.
void write_csv(std::ostream& out, const std::vector<ExperimentRow>& rows);

struct GridPoint {
    double step_size;
    double decay_factor;
    double regularization;
    double delta_init_constant;
    double validation_rmse = 0.0;
    std::string error;
};

struct GridSearchResult {
    SolverConfig best;
    double best_score = 0.0;
    std::vector<GridPoint> table;
};

struct GridSpec {
    std::vector<double> step_sizes;
    std::vector<double> decay_factors;
    std::vector<double> regularizations;
    std::vector<double> delta_init_constants;
};

// Exhaustive search over the Cartesian grid, scored by RMSE on a validation
// split carved from `train` (never the test split). Grid values are visited
// in ascending lexicographic (μ, α, λ, C) order; ties keep the first.
GridSearchResult grid_search(const SolverConfig& base, const GridSpec& grid,
                             const ObservedMatrix& train, double validation_fraction,
                             std::uint64_t seed);

// Plain-text key=value settings; '#' starts a comment.
std::map<std::string, std::string> read_key_values(const std::filesystem::path& path);

}  // namespace qmc
