#include "varbn/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "varbn/aggregate.hpp"
#include "varbn/csv.hpp"
#include "varbn/rng.hpp"

namespace varbn {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::vector<double> parse_double_list(const std::string& value, const std::string& key) {
    std::vector<double> out;
    for (const auto& tok : split(value, ','))
        out.push_back(parse_double(trim(tok), "config key " + key));
    return out;
}

std::size_t parse_size(const std::string& value, const std::string& key) {
    try {
        const long long v = std::stoll(trim(value));
        if (v < 0) throw std::invalid_argument(value);
        return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
        throw std::runtime_error("cannot parse non-negative integer for config key " + key);
    }
}

std::uint64_t parse_u64(const std::string& value, const std::string& key) {
    try {
        return std::stoull(trim(value));
    } catch (const std::exception&) {
        throw std::runtime_error("cannot parse seed for config key " + key);
    }
}

}  // namespace

void ExperimentConfig::validate() const {
    generator.validate();
    if (window_grid.empty()) throw std::invalid_argument("window_grid is empty");
    for (std::size_t t : window_grid) {
        if (t < 1) throw std::invalid_argument("window values must be positive");
        if (t > generator.length)
            throw std::invalid_argument("window " + std::to_string(t) + " exceeds series length");
    }
    if (realizations < 1) throw std::invalid_argument("realizations must be at least 1");
    if (n_states < 2) throw std::invalid_argument("n_states must be at least 2");
    if (repetitions < 1) throw std::invalid_argument("repetitions must be at least 1");
    if (samples_per_rep < 2) throw std::invalid_argument("samples_per_rep must be at least 2");
}

ExperimentConfig parse_config_text(const std::string& text) {
    // Defaults are the toy-model constants: 3 processes, 5000 steps,
    // homogeneous decay 25, exponential means 100/50/10.
    ExperimentConfig cfg;
    cfg.generator.n_processes = 3;
    cfg.generator.length = 5000;
    cfg.generator.marginal.means = {100.0, 50.0, 10.0};

    double tau = 25.0;
    std::vector<double> tau_matrix;
    std::size_t max_lag = 0;  // 0 selects the default rule

    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config line " + std::to_string(line_no) +
                                     ": expected key = value");
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (key == "n_processes")
            cfg.generator.n_processes = parse_size(value, key);
        else if (key == "length")
            cfg.generator.length = parse_size(value, key);
        else if (key == "tau")
            tau = parse_double(value, "config key tau");
        else if (key == "tau_matrix") {
            tau_matrix.clear();
            for (const auto& row : split(value, ';'))
                for (double v : parse_double_list(row, key)) tau_matrix.push_back(v);
        } else if (key == "means")
            cfg.generator.marginal.means = parse_double_list(value, key);
        else if (key == "basin_factor")
            cfg.generator.basin_factor = parse_double(value, "config key basin_factor");
        else if (key == "plateau_window")
            cfg.generator.plateau_window = parse_size(value, key);
        else if (key == "max_iterations")
            cfg.generator.max_iterations = parse_size(value, key);
        else if (key == "max_lag")
            max_lag = parse_size(value, key);
        else if (key == "trace_stride")
            cfg.generator.trace_stride = parse_size(value, key);
        else if (key == "seed")
            cfg.master_seed = parse_u64(value, key);
        else if (key == "window_grid") {
            cfg.window_grid.clear();
            for (const auto& tok : split(value, ','))
                cfg.window_grid.push_back(parse_size(tok, key));
        } else if (key == "realizations")
            cfg.realizations = parse_size(value, key);
        else if (key == "horizon")
            cfg.horizon = parse_size(value, key);
        else if (key == "n_states")
            cfg.n_states = parse_size(value, key);
        else if (key == "repetitions")
            cfg.repetitions = parse_size(value, key);
        else if (key == "samples_per_rep")
            cfg.samples_per_rep = parse_size(value, key);
        else if (key == "mode") {
            if (value == "greedy")
                cfg.mode = LearnMode::greedy;
            else if (value == "exhaustive")
                cfg.mode = LearnMode::exhaustive;
            else
                throw std::runtime_error("mode must be greedy or exhaustive");
        } else if (key == "out_dir")
            cfg.out_dir = value;
        else
            throw std::runtime_error("unknown config key '" + key + "'");
    }

    const std::size_t n = cfg.generator.n_processes;
    if (!tau_matrix.empty()) {
        if (tau_matrix.size() != n * n)
            throw std::runtime_error("tau_matrix must have n_processes^2 entries");
        cfg.generator.target.n = n;
        cfg.generator.target.tau = tau_matrix;
        cfg.generator.target.max_lag = 1;  // placeholder until resolved below
    } else {
        cfg.generator.target = CorrelationTarget::homogeneous(n, tau, 1);
    }
    cfg.generator.target.max_lag =
        max_lag > 0 ? max_lag : default_max_lag(cfg.generator.length, cfg.generator.target);
    cfg.generator.seed = cfg.master_seed;
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    return parse_config_text(read_file(path));
}

std::uint64_t realization_seed(std::uint64_t master, std::size_t realization, unsigned stage) {
    return derive_seed(master, static_cast<std::uint64_t>(realization) * 8 + stage);
}

namespace {

GeneratorConfig realization_generator(const ExperimentConfig& cfg, std::size_t r) {
    GeneratorConfig gen = cfg.generator;
    gen.seed = realization_seed(cfg.master_seed, r, 0);
    return gen;
}

void ensure_dir(const std::string& dir) {
    std::filesystem::create_directories(dir);
}

void write_pair_correlation_csv(const std::string& path, const CorrelationEstimate& est,
                                double tau, std::size_t i, std::size_t j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "lag,c_" << (i + 1) << (j + 1) << ",C_" << (i + 1) << (j + 1) << '\n';
    for (std::size_t t = 0; t <= est.max_lag; ++t)
        out << t << ',' << format_double(est.at(i, j, t)) << ','
            << format_double(std::exp(-static_cast<double>(t) / tau)) << '\n';
    if (!out) throw std::runtime_error("failed writing " + path);
}

}  // namespace

void experiment_fig1(const ExperimentConfig& config) {
    config.validate();
    if (config.generator.n_processes < 2)
        throw std::invalid_argument("the correlation figure needs at least 2 processes");
    const std::size_t agg_window = 25;
    if (config.generator.length / agg_window < 4)
        throw std::invalid_argument("series too short to aggregate over 25 steps");

    auto [series, report] = run_generator(realization_generator(config, 0));

    const double tau = config.generator.target.decay(0, 1);
    const std::size_t raw_lags = std::min<std::size_t>(1000, series.n_steps - 2);
    const CorrelationEstimate raw = empirical_correlation(series, raw_lags);

    const ExtractedDatabase db = extract(series, agg_window);
    const LossMatrix agg = as_series(db);
    const std::size_t agg_lags = std::min<std::size_t>(40, agg.n_steps - 2);
    const CorrelationEstimate aggregated = empirical_correlation(agg, agg_lags);

    ensure_dir(config.effective_out_dir());
    write_pair_correlation_csv(config.effective_out_dir() + "/fig1_raw.csv", raw, tau, 0, 1);
    write_pair_correlation_csv(config.effective_out_dir() + "/fig1_aggregated.csv", aggregated,
                               tau / static_cast<double>(agg_window), 0, 1);
    write_report(config.effective_out_dir() + "/fig1_generator_report.txt", report);
}

void experiment_table1(const ExperimentConfig& config) {
    config.validate();
    const std::size_t reals = config.realizations;
    const std::size_t n_t = config.window_grid.size();
    std::vector<DagStructure> learned(reals * n_t, DagStructure(0));
    std::vector<std::vector<std::string>> labels(reals);
    std::vector<std::exception_ptr> errors(reals);

#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(reals); ++r) {
        try {
            auto [series, report] = run_generator(realization_generator(config, r));
            labels[r] = series.labels;
            for (std::size_t ti = 0; ti < n_t; ++ti) {
                const ExtractedDatabase db = extract(series, config.window_grid[ti]);
                auto [states, disc] = discretize(db, config.n_states);
                learned[r * n_t + ti] = learn_structure(states, config.mode);
            }
        } catch (...) {
            errors[r] = std::current_exception();
        }
    }
    for (const auto& err : errors)
        if (err) std::rethrow_exception(err);

    const std::string dir = config.effective_out_dir() + "/table1";
    ensure_dir(dir);
    std::ofstream summary(dir + "/summary.csv");
    if (!summary) throw std::runtime_error("cannot open table1 summary for writing");
    summary << "T,realization,edges\n";
    for (std::size_t ti = 0; ti < n_t; ++ti)
        for (std::size_t r = 0; r < reals; ++r) {
            const DagStructure& g = learned[r * n_t + ti];
            summary << config.window_grid[ti] << ',' << r << ',' << g.edges.size() << '\n';
            write_edge_list(dir + "/edges_T" + std::to_string(config.window_grid[ti]) + "_r" +
                                std::to_string(r) + ".txt",
                            g, labels[r]);
        }
    if (!summary) throw std::runtime_error("failed writing table1 summary");
}

PipelineResult run_pipeline(const LossMatrix& series, std::size_t window,
                            std::size_t horizon, std::size_t n_states, LearnMode mode,
                            std::size_t repetitions, std::size_t samples_per_rep,
                            std::uint64_t seed) {
    const ExtractedDatabase db = extract(series, window);
    auto [states, disc] = discretize(db, n_states);
    PipelineResult result;
    result.structure = learn_structure(states, mode);
    result.net = learn_cpts(result.structure, states);
    result.net.labels = db.labels;
    result.disc = disc;
    std::vector<BinnedPdf> marginals;
    marginals.reserve(db.n_processes);
    for (std::size_t i = 0; i < db.n_processes; ++i)
        marginals.push_back(marginal(result.net, i, disc));
    result.report =
        var_report(marginals, window, horizon, repetitions, samples_per_rep, seed);
    return result;
}

void experiment_fig2(const ExperimentConfig& config) {
    config.validate();
    const std::size_t reals = config.realizations;
    const std::size_t n_t = config.window_grid.size();
    const std::size_t horizon = config.effective_horizon();
    std::vector<double> totals(reals * n_t, 0.0);
    std::vector<std::exception_ptr> errors(reals);

#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(reals); ++r) {
        try {
            auto [series, report] = run_generator(realization_generator(config, r));
            const std::uint64_t sample_seed = realization_seed(config.master_seed, r, 1);
            for (std::size_t ti = 0; ti < n_t; ++ti) {
                const std::size_t window = config.window_grid[ti];
                const PipelineResult result = run_pipeline(
                    series, window, horizon, config.n_states, config.mode,
                    config.repetitions, config.samples_per_rep, derive_seed(sample_seed, window));
                totals[r * n_t + ti] = result.report.total_var;
            }
        } catch (...) {
            errors[r] = std::current_exception();
        }
    }
    for (const auto& err : errors)
        if (err) std::rethrow_exception(err);

    ensure_dir(config.effective_out_dir());
    std::ofstream detail(config.effective_out_dir() + "/fig2_detail.csv");
    if (!detail) throw std::runtime_error("cannot open fig2 detail for writing");
    detail << "T,realization,total_var\n";
    for (std::size_t ti = 0; ti < n_t; ++ti)
        for (std::size_t r = 0; r < reals; ++r)
            detail << config.window_grid[ti] << ',' << r << ','
                   << format_double(totals[r * n_t + ti]) << '\n';
    if (!detail) throw std::runtime_error("failed writing fig2 detail");

    std::ofstream out(config.effective_out_dir() + "/fig2.csv");
    if (!out) throw std::runtime_error("cannot open fig2.csv for writing");
    out << "T,mean_var,std_var\n";
    for (std::size_t ti = 0; ti < n_t; ++ti) {
        double mean = 0.0;
        for (std::size_t r = 0; r < reals; ++r) mean += totals[r * n_t + ti];
        mean /= static_cast<double>(reals);
        double var = 0.0;
        for (std::size_t r = 0; r < reals; ++r) {
            const double d = totals[r * n_t + ti] - mean;
            var += d * d;
        }
        const double sd = reals > 1 ? std::sqrt(var / static_cast<double>(reals - 1)) : 0.0;
        out << config.window_grid[ti] << ',' << format_double(mean) << ',' << format_double(sd)
            << '\n';
    }
    if (!out) throw std::runtime_error("failed writing fig2.csv");
}

}  // namespace varbn
