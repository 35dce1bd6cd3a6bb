#include "qmc/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <future>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "qmc/error.hpp"

namespace qmc {

ObservedMatrix DataSource::load(std::uint64_t seed) const
{
    if (ratings) {
        return load_ratings(*ratings, '\t', scheme).to_observed();
    }
    return generate_synthetic(synth.rows, synth.cols, synth.rank, scheme, 1.0, seed).observed;
}

namespace {

ExperimentRow run_cell(const ExperimentConfig& config, const ObservedMatrix* shared, double rate,
                       std::uint64_t seed)
{
    ExperimentRow row;
    row.missing_rate = rate;
    row.seed = seed;
    try {
        const ObservedMatrix full = shared ? *shared : config.source.load(seed);
        const auto split = make_split(full, rate, seed);
        const auto start = std::chrono::steady_clock::now();
        const auto report = solve(split.train, config.solver);
        row.runtime_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const auto eval = evaluate(report.recovered, split.train, split.test);
        row.rmse_continuous = eval.rmse_continuous;
        row.rmse_quantized = eval.rmse_quantized;
        row.accuracy = eval.accuracy;
        row.outer_iters = static_cast<double>(report.outer_iterations);
    } catch (const std::exception& e) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        row.rmse_continuous = row.rmse_quantized = row.accuracy = nan;
        row.runtime_seconds = row.outer_iters = nan;
        row.error = e.what();
        row.diverged = dynamic_cast<const StepSizeError*>(&e) != nullptr;
    }
    return row;
}

}  // namespace

std::vector<ExperimentRow> run_experiment(const ExperimentConfig& config)
{
    if (config.missing_rates.empty() || config.seeds.empty()) {
        throw DomainError("experiment needs at least one missing rate and one seed");
    }
    config.solver.validate();
    // A ratings file is parsed once and shared read-only across cells.
    std::optional<ObservedMatrix> shared;
    if (config.source.ratings) {
        shared = config.source.load(0);
    }
    const ObservedMatrix* shared_ptr = shared ? &*shared : nullptr;

    struct Cell {
        double rate;
        std::uint64_t seed;
    };
    std::vector<Cell> cells;
    for (double rate : config.missing_rates) {
        for (auto seed : config.seeds) {
            cells.push_back({rate, seed});
        }
    }
    std::vector<ExperimentRow> results(cells.size());
    const std::size_t workers = std::max(1u, config.parallel);
    for (std::size_t begin = 0; begin < cells.size(); begin += workers) {
        const std::size_t end = std::min(cells.size(), begin + workers);
        std::vector<std::future<ExperimentRow>> batch;
        for (std::size_t k = begin; k < end; ++k) {
            batch.push_back(std::async(workers > 1 ? std::launch::async : std::launch::deferred,
                                       run_cell, std::cref(config), shared_ptr, cells[k].rate,
                                       cells[k].seed));
        }
        for (std::size_t k = begin; k < end; ++k) {
            results[k] = batch[k - begin].get();
        }
    }

    std::vector<ExperimentRow> rows;
    std::size_t k = 0;
    for (double rate : config.missing_rates) {
        ExperimentRow mean;
        mean.missing_rate = rate;
        std::size_t ok = 0;
        for (std::size_t s = 0; s < config.seeds.size(); ++s, ++k) {
            const auto& r = results[k];
            rows.push_back(r);
            if (r.failed()) {
                continue;
            }
            ++ok;
            mean.rmse_continuous += r.rmse_continuous;
            mean.rmse_quantized += r.rmse_quantized;
            mean.accuracy += r.accuracy;
            mean.runtime_seconds += r.runtime_seconds;
            mean.outer_iters += r.outer_iters;
        }
        if (ok == 0) {
            mean.error = "all seeds failed";
            const double nan = std::numeric_limits<double>::quiet_NaN();
            mean.rmse_continuous = mean.rmse_quantized = mean.accuracy = nan;
            mean.runtime_seconds = mean.outer_iters = nan;
        } else {
            const auto n = static_cast<double>(ok);
            mean.rmse_continuous /= n;
            mean.rmse_quantized /= n;
            mean.accuracy /= n;
            mean.runtime_seconds /= n;
            mean.outer_iters /= n;
        }
        rows.push_back(mean);
    }
    return rows;
}

namespace {

// Shortest text that parses back to the same double.
std::string shortest(double v)
{
    if (std::isnan(v)) {
        return "nan";
    }
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

}  // namespace

void write_csv(std::ostream& out, const std::vector<ExperimentRow>& rows)
{
    out << kCsvHeader << '\n';
    for (const auto& r : rows) {
        out << shortest(r.missing_rate) << ',';
        if (r.seed) {
            out << *r.seed;
        } else {
            out << "mean";
        }
        out << ',' << shortest(r.rmse_continuous) << ',' << shortest(r.rmse_quantized) << ','
            << shortest(r.accuracy) << ',' << shortest(r.runtime_seconds) << ','
            << shortest(r.outer_iters) << '\n';
    }
    for (const auto& r : rows) {
        if (r.failed() && r.seed) {
            out << "# error missing_rate=" << shortest(r.missing_rate) << " seed=" << *r.seed
                << ": " << r.error << '\n';
        }
    }
}

GridSearchResult grid_search(const SolverConfig& base, const GridSpec& grid,
                             const ObservedMatrix& train, double validation_fraction,
                             std::uint64_t seed)
{
    if (grid.step_sizes.empty() || grid.decay_factors.empty() || grid.regularizations.empty() ||
        grid.delta_init_constants.empty()) {
        throw DomainError("every grid axis needs at least one value");
    }
    auto sorted = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
        return v;
    };
    const auto mus = sorted(grid.step_sizes);
    const auto alphas = sorted(grid.decay_factors);
    const auto lambdas = sorted(grid.regularizations);
    const auto cs = sorted(grid.delta_init_constants);
    const auto split = make_split(train, validation_fraction, seed);

    GridSearchResult result;
    bool found = false;
    for (double mu : mus) {
        for (double alpha : alphas) {
            for (double lambda : lambdas) {
                for (double c : cs) {
                    SolverConfig cfg = base;
                    cfg.step_size = mu;
                    cfg.decay_factor = alpha;
                    cfg.regularization = lambda;
                    cfg.delta_init_constant = c;
                    GridPoint point{mu, alpha, lambda, c, 0.0, {}};
                    try {
                        const auto report = solve(split.train, cfg);
                        point.validation_rmse = rmse(report.recovered, split.test);
                        if (!std::isfinite(point.validation_rmse)) {
                            throw NumericalError("non-finite validation RMSE");
                        }
                        if (!found || point.validation_rmse < result.best_score) {
                            found = true;
                            result.best = cfg;
                            result.best_score = point.validation_rmse;
                        }
                    } catch (const std::exception& e) {
                        point.validation_rmse = std::numeric_limits<double>::quiet_NaN();
                        point.error = e.what();
                    }
                    result.table.push_back(point);
                }
            }
        }
    }
    if (!found) {
        throw SearchError("every grid point failed");
    }
    return result;
}

std::map<std::string, std::string> read_key_values(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open config " + path.string());
    }
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) {
            return std::string();
        }
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    };
    std::map<std::string, std::string> values;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line.substr(0, line.find('#')));
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ParseError("expected key=value", line_no);
        }
        const auto key = trim(line.substr(0, eq));
        if (key.empty()) {
            throw ParseError("empty key", line_no);
        }
        values[key] = trim(line.substr(eq + 1));
    }
    return values;
}

}  // namespace qmc
