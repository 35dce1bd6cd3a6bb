// Command-line driver: synthetic data, single recoveries, metrics, the
// missing-rate experiment grid, hyperparameter search and diagnostics.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "qmc/data_io.hpp"
#include "qmc/diagnostics.hpp"
#include "qmc/error.hpp"
#include "qmc/eval.hpp"
#include "qmc/experiment.hpp"
#include "qmc/solver.hpp"

namespace {

enum ExitCode : int { kOk = 0, kConfigError = 2, kDataError = 3, kDivergence = 4 };

struct ConfigError : qmc::Error {
    using qmc::Error::Error;
};

// Options shared by subcommands that build a data source and a solver.
struct Common {
    std::string config_path;
    std::string data;
    std::string synth;
    std::size_t levels = 5;
    double gap = 1.0;
    double first_level = 1.0;
    double mu = 0, alpha = 0, lambda = 0, c = 0, inner_tol = 0, outer_tol = 0;
    std::size_t max_inner = 0, max_outer = 0, min_outer = 0;
    bool no_backtracking = false;
    bool no_keep_feasible = false;
};

void add_data_options(CLI::App* app, Common& o)
{
    app->add_option("--config", o.config_path, "key=value settings file (flags override it)");
    app->add_option("--data", o.data, "MovieLens-style ratings file (tab separated)");
    app->add_option("--synth", o.synth, "synthetic instance ROWSxCOLSxRANK");
    app->add_option("--levels", o.levels, "number of quantization levels");
    app->add_option("--gap", o.gap, "quantization gap");
    app->add_option("--first-level", o.first_level, "center of the lowest level");
}

void add_solver_options(CLI::App* app, Common& o)
{
    app->add_option("--mu", o.mu, "gradient step size");
    app->add_option("--alpha", o.alpha, "delta decay factor");
    app->add_option("--lambda", o.lambda, "Huber regularization weight");
    app->add_option("--c", o.c, "delta initialization constant");
    app->add_option("--inner-tol", o.inner_tol, "inner loop relative-change tolerance");
    app->add_option("--outer-tol", o.outer_tol, "outer loop relative-change tolerance");
    app->add_option("--max-inner", o.max_inner, "inner iteration cap");
    app->add_option("--max-outer", o.max_outer, "outer iteration cap");
    app->add_option("--min-outer", o.min_outer, "outer iterations before convergence is tested");
    app->add_flag("--no-backtracking", o.no_backtracking,
                  "plain fixed-step descent (stops on 10 consecutive objective increases)");
    app->add_flag("--no-keep-feasible", o.no_keep_feasible,
                  "keep shrinking delta after the iterate leaves the observed intervals");
}

double to_double(const std::string& key, const std::string& v)
{
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size()) {
            throw std::invalid_argument(v);
        }
        return d;
    } catch (const std::exception&) {
        throw ConfigError("config value for '" + key + "' is not a number: " + v);
    }
}

template <typename T>
std::vector<T> parse_list(const std::string& key, const std::string& text)
{
    std::vector<T> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (item.empty()) {
            continue;
        }
        out.push_back(static_cast<T>(to_double(key, item)));
    }
    if (out.empty()) {
        throw ConfigError("empty list for '" + key + "'");
    }
    return out;
}

// Fills every option the user did not pass on the command line from the config file.
void apply_config(CLI::App* app, const std::string& path)
{
    if (path.empty()) {
        return;
    }
    std::map<std::string, std::string> kv;
    try {
        kv = qmc::read_key_values(path);
    } catch (const qmc::ParseError& e) {
        throw ConfigError(e.what());
    }
    for (const auto& [key, value] : kv) {
        CLI::Option* opt = nullptr;
        try {
            opt = app->get_option("--" + key);
        } catch (const CLI::OptionNotFound&) {
            throw ConfigError("unknown config key '" + key + "'");
        }
        if (opt->count() == 0) {
            opt->clear();
            if (opt->get_type_size() == 0) {
                // flag
                if (value == "true" || value == "1") {
                    opt->add_result("true");
                }
            } else {
                opt->add_result(value);
            }
            opt->run_callback();
        }
    }
}

qmc::SolverConfig solver_config(const Common& o)
{
    qmc::SolverConfig cfg;
    if (o.mu) cfg.step_size = o.mu;
    if (o.alpha) cfg.decay_factor = o.alpha;
    if (o.lambda) cfg.regularization = o.lambda;
    if (o.c) cfg.delta_init_constant = o.c;
    if (o.inner_tol) cfg.inner_tolerance = o.inner_tol;
    if (o.outer_tol) cfg.outer_tolerance = o.outer_tol;
    if (o.max_inner) cfg.max_inner_iterations = o.max_inner;
    if (o.max_outer) cfg.max_outer_iterations = o.max_outer;
    if (o.min_outer) cfg.min_outer_iterations = o.min_outer;
    cfg.backtracking = !o.no_backtracking;
    cfg.keep_feasible = !o.no_keep_feasible;
    try {
        cfg.validate();
    } catch (const qmc::DomainError& e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

qmc::SynthSpec parse_synth(const std::string& text)
{
    qmc::SynthSpec spec;
    char x1 = 0, x2 = 0;
    std::istringstream in(text);
    std::string rest;
    if (!(in >> spec.rows >> x1 >> spec.cols >> x2 >> spec.rank) || x1 != 'x' || x2 != 'x' ||
        (in >> rest)) {
        throw ConfigError("--synth expects ROWSxCOLSxRANK, got '" + text + "'");
    }
    return spec;
}

qmc::DataSource data_source(const Common& o)
{
    if (o.data.empty() == o.synth.empty()) {
        throw ConfigError("exactly one of --data or --synth is required");
    }
    qmc::DataSource src;
    try {
        src.scheme = qmc::QuantizationScheme::uniform(o.first_level, o.gap, o.levels);
    } catch (const qmc::DomainError& e) {
        throw ConfigError(e.what());
    }
    if (!o.data.empty()) {
        src.ratings = o.data;
    } else {
        src.synth = parse_synth(o.synth);
    }
    return src;
}

void print_eval(const qmc::EvalResult& r)
{
    std::cout << std::setprecision(6) << "rmse_continuous " << r.rmse_continuous << '\n'
              << "rmse_quantized " << r.rmse_quantized << '\n'
              << "accuracy " << r.accuracy << '\n'
              << "baseline_rmse " << r.baseline_rmse << '\n';
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Quantized matrix completion with a smoothed rank and Huber penalty"};
    app.require_subcommand(1);

    // synth
    Common synth_opts;
    std::string synth_prefix;
    double fraction = 1.0;
    std::uint64_t synth_seed = 1;
    auto* synth = app.add_subcommand("synth", "write a synthetic low-rank quantized instance");
    add_data_options(synth, synth_opts);
    synth->add_option("--fraction", fraction, "observed fraction of entries");
    synth->add_option("--seed", synth_seed, "random seed");
    synth->add_option("--out", synth_prefix, "output prefix (PREFIX.truth.txt, PREFIX.obs.txt)")
        ->required();

    // solve
    Common solve_opts;
    std::string solve_obs, solve_out;
    auto* solve = app.add_subcommand("solve", "recover a matrix from an observation file");
    add_data_options(solve, solve_opts);
    add_solver_options(solve, solve_opts);
    solve->add_option("--obs", solve_obs, "observation file written by 'synth'");
    solve->add_option("--out", solve_out, "where to write the recovered matrix")->required();

    // eval
    std::string eval_matrix, eval_test, eval_train;
    auto* eval = app.add_subcommand("eval", "metrics of a saved matrix on held-out observations");
    eval->add_option("--recovered", eval_matrix, "recovered matrix file")->required();
    eval->add_option("--test", eval_test, "held-out observation file")->required();
    eval->add_option("--train", eval_train, "training observations (for the baseline)")
        ->required();

    // experiment
    Common exp_opts;
    std::string rates_text = "0.1,0.2,0.3,0.5", seeds_text = "1", exp_out;
    unsigned parallel = 1;
    auto* experiment = app.add_subcommand("experiment", "missing-rate × seed grid to CSV");
    add_data_options(experiment, exp_opts);
    add_solver_options(experiment, exp_opts);
    experiment->add_option("--missing-rates", rates_text, "comma-separated missing rates");
    experiment->add_option("--seeds", seeds_text, "comma-separated seeds");
    experiment->add_option("--out", exp_out, "CSV path (stdout when omitted)");
    experiment->add_option("--parallel", parallel, "concurrent cells");

    // gridsearch
    Common grid_opts;
    std::string mu_grid, alpha_grid, lambda_grid, c_grid;
    double grid_rate = 0.1, validation_fraction = 0.1;
    std::uint64_t grid_seed = 1;
    auto* gridsearch = app.add_subcommand("gridsearch", "validation grid search over mu, alpha, lambda, C");
    add_data_options(gridsearch, grid_opts);
    add_solver_options(gridsearch, grid_opts);
    gridsearch->add_option("--mu-grid", mu_grid, "comma-separated step sizes");
    gridsearch->add_option("--alpha-grid", alpha_grid, "comma-separated decay factors");
    gridsearch->add_option("--lambda-grid", lambda_grid, "comma-separated regularizations");
    gridsearch->add_option("--c-grid", c_grid, "comma-separated init constants");
    gridsearch->add_option("--missing-rate", grid_rate, "test split held out before searching");
    gridsearch->add_option("--validation-fraction", validation_fraction,
                           "fraction of training data used for validation");
    gridsearch->add_option("--seed", grid_seed, "split seed");

    // probe
    std::string probe_matrix, probe_obs;
    double probe_delta = 0, probe_lambda = 0, probe_radius = 0;
    std::size_t probe_samples = 16;
    std::uint64_t probe_seed = 1;
    bool probe_suggest = false;
    auto* probe = app.add_subcommand("probe", "sampled local convexity check of the objective");
    probe->add_option("--matrix", probe_matrix, "reference matrix file")->required();
    probe->add_option("--obs", probe_obs, "observation file")->required();
    probe->add_option("--delta", probe_delta, "smoothing width to probe");
    probe->add_option("--lambda", probe_lambda, "Huber weight (0 allowed)");
    probe->add_option("--radius", probe_radius, "Frobenius ball radius");
    probe->add_option("--samples", probe_samples, "sample count");
    probe->add_option("--seed", probe_seed, "sampling seed");
    probe->add_flag("--suggest", probe_suggest, "search for the smallest passing delta instead");

    // lambda-window
    std::size_t r_star = 1, omega = 1;
    double delta_gap = 0, lw_gap = 1, epsilon = 1e-2;
    auto* lw = app.add_subcommand("lambda-window", "regularization interval from the separation bound");
    lw->add_option("--r-star", r_star, "rank of the constrained minimizer")->required();
    lw->add_option("--delta-gap", delta_gap, "separation constant")->required();
    lw->add_option("--omega", omega, "number of observations")->required();
    lw->add_option("--gap", lw_gap, "quantization gap");
    lw->add_option("--epsilon", epsilon, "small positive slack");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (*synth) {
            apply_config(synth, synth_opts.config_path);
            if (synth_opts.synth.empty()) {
                throw ConfigError("synth requires --synth ROWSxCOLSxRANK");
            }
            const auto src = data_source(synth_opts);
            const auto inst = qmc::generate_synthetic(src.synth.rows, src.synth.cols,
                                                      src.synth.rank, src.scheme, fraction,
                                                      synth_seed);
            qmc::save_matrix(synth_prefix + ".truth.txt", inst.ground_truth);
            qmc::save_observed(synth_prefix + ".obs.txt", inst.observed);
            std::cout << "wrote " << synth_prefix << ".truth.txt and " << synth_prefix
                      << ".obs.txt (" << inst.observed.size() << " observations)\n";
        } else if (*solve) {
            apply_config(solve, solve_opts.config_path);
            const auto cfg = solver_config(solve_opts);
            std::optional<qmc::ObservedMatrix> obs;
            if (!solve_obs.empty()) {
                obs = qmc::load_observed(solve_obs);
            } else {
                obs = data_source(solve_opts).load(1);
            }
            const auto report = qmc::solve(*obs, cfg);
            qmc::save_matrix(solve_out, report.recovered);
            std::cout << "outer_iterations " << report.outer_iterations << '\n'
                      << "final_delta " << report.delta_trace.back() << '\n'
                      << "violations " << qmc::violation_count(report.recovered, *obs) << '\n';
        } else if (*eval) {
            const auto x = qmc::load_matrix(eval_matrix);
            const auto test = qmc::load_observed(eval_test);
            const auto train = qmc::load_observed(eval_train);
            print_eval(qmc::evaluate(x, train, test));
        } else if (*experiment) {
            apply_config(experiment, exp_opts.config_path);
            qmc::ExperimentConfig cfg;
            cfg.source = data_source(exp_opts);
            cfg.solver = solver_config(exp_opts);
            cfg.missing_rates = parse_list<double>("missing-rates", rates_text);
            cfg.seeds = parse_list<std::uint64_t>("seeds", seeds_text);
            cfg.parallel = parallel;
            const auto rows = qmc::run_experiment(cfg);
            if (exp_out.empty()) {
                qmc::write_csv(std::cout, rows);
            } else {
                std::ofstream out(exp_out);
                if (!out) {
                    throw ConfigError("cannot write " + exp_out);
                }
                qmc::write_csv(out, rows);
            }
            bool diverged = false;
            for (const auto& r : rows) {
                if (r.failed() && r.seed) {
                    std::cerr << "cell missing_rate=" << r.missing_rate << " seed=" << *r.seed
                              << " failed: " << r.error << '\n';
                    diverged = diverged || r.diverged;
                }
            }
            if (diverged) {
                return kDivergence;
            }
        } else if (*gridsearch) {
            apply_config(gridsearch, grid_opts.config_path);
            const auto base = solver_config(grid_opts);
            auto axis = [&](const std::string& key, const std::string& text, double fallback) {
                return text.empty() ? std::vector<double>{fallback} : parse_list<double>(key, text);
            };
            qmc::GridSpec grid{axis("mu-grid", mu_grid, base.step_size),
                               axis("alpha-grid", alpha_grid, base.decay_factor),
                               axis("lambda-grid", lambda_grid, base.regularization),
                               axis("c-grid", c_grid, base.delta_init_constant)};
            const auto full = data_source(grid_opts).load(grid_seed);
            const auto split = qmc::make_split(full, grid_rate, grid_seed);
            const auto result =
                qmc::grid_search(base, grid, split.train, validation_fraction, grid_seed);
            std::cout << "mu,alpha,lambda,c,validation_rmse\n";
            for (const auto& p : result.table) {
                std::cout << p.step_size << ',' << p.decay_factor << ',' << p.regularization << ','
                          << p.delta_init_constant << ',' << p.validation_rmse << '\n';
            }
            std::cout << "best mu=" << result.best.step_size
                      << " alpha=" << result.best.decay_factor
                      << " lambda=" << result.best.regularization
                      << " c=" << result.best.delta_init_constant << " rmse=" << result.best_score
                      << '\n';
        } else if (*probe) {
            const auto x = qmc::load_matrix(probe_matrix);
            const auto obs = qmc::load_observed(probe_obs);
            if (probe_suggest) {
                const double d = qmc::suggest_delta(x, obs, probe_lambda, probe_radius,
                                                    probe_samples, probe_seed);
                std::cout << "suggested_delta " << d << '\n';
            } else {
                const auto r = qmc::convexity_probe(x, obs, probe_delta, probe_lambda,
                                                    probe_radius, probe_samples, probe_seed);
                std::cout << "delta " << r.delta_probed << '\n'
                          << "samples " << r.sample_points << '\n'
                          << "skipped " << r.skipped_points << '\n'
                          << "min_eigenvalue " << r.min_eigenvalue_found << '\n'
                          << "condition_holds " << (r.condition_holds ? "true" : "false") << '\n';
            }
        } else if (*lw) {
            const auto w = qmc::lambda_window(r_star, delta_gap, omega, lw_gap, epsilon);
            std::cout << std::setprecision(10) << "lower " << w.lower << '\n'
                      << "upper " << w.upper << '\n'
                      << "feasible " << (w.feasible ? "true" : "false") << '\n';
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const qmc::StepSizeError& e) {
        std::cerr << "solver diverged: " << e.what() << '\n';
        return kDivergence;
    } catch (const qmc::DomainError& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return kConfigError;
    } catch (const qmc::Error& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kDataError;
    }
    return kOk;
}
