#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "varbn/aggregate.hpp"
#include "varbn/bayesnet.hpp"
#include "varbn/csv.hpp"
#include "varbn/experiment.hpp"
#include "varbn/generator.hpp"
#include "varbn/pdf.hpp"
#include "varbn/rng.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    std::string input;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::size_t window = 0;
    std::size_t horizon = 0;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_input) {
    cmd->add_option("--config", opts.config_path, "flat key=value config file");
    cmd->add_option("--out", opts.out_dir, "output directory");
    cmd->add_option("--seed", opts.seed, "master seed override")
        ->each([&opts](const std::string&) { opts.seed_set = true; });
    cmd->add_option("--window", opts.window, "aggregation window override (T)");
    cmd->add_option("--horizon", opts.horizon, "VaR horizon override (H)");
    if (with_input) cmd->add_option("--in", opts.input, "input CSV file")->required();
}

varbn::ExperimentConfig resolve_config(const CommonOpts& opts) {
    varbn::ExperimentConfig cfg = opts.config_path.empty()
                                      ? varbn::parse_config_text("")
                                      : varbn::load_config(opts.config_path);
    if (opts.seed_set) {
        cfg.master_seed = opts.seed;
        cfg.generator.seed = opts.seed;
    }
    if (opts.horizon != 0) cfg.horizon = opts.horizon;
    if (!opts.out_dir.empty()) {
        cfg.out_dir = opts.out_dir;
    } else if (cfg.out_dir.empty()) {
        if (const char* env = std::getenv("VARBN_OUT_DIR"); env && *env) cfg.out_dir = env;
    }
    return cfg;
}

void ensure_out(const std::string& dir) { std::filesystem::create_directories(dir); }

int cmd_generate(const CommonOpts& opts) {
    varbn::ExperimentConfig cfg = resolve_config(opts);
    auto [series, report] = varbn::run_generator(cfg.generator);
    const std::string dir = cfg.effective_out_dir();
    ensure_out(dir);
    varbn::write_series_csv(dir + "/series.csv", series);
    varbn::write_report(dir + "/generator_report.txt", report);
    varbn::write_trace_csv(dir + "/trace.csv", report);
    std::cout << "wrote " << dir << "/series.csv (" << series.n_processes << " x "
              << series.n_steps << "), final objective " << report.final_objective << '\n';
    return 0;
}

int cmd_aggregate(const CommonOpts& opts) {
    varbn::ExperimentConfig cfg = resolve_config(opts);
    if (opts.window == 0)
        throw std::runtime_error("aggregate needs --window");
    const varbn::LossMatrix series = varbn::read_series_csv(opts.input);
    const varbn::ExtractedDatabase db = varbn::extract(series, opts.window);
    const std::string dir = cfg.effective_out_dir();
    ensure_out(dir);
    varbn::write_extracted_csv(dir + "/extracted.csv", db);
    std::cout << "wrote " << dir << "/extracted.csv (" << db.n_records << " records)\n";
    return 0;
}

int cmd_learn(const CommonOpts& opts) {
    varbn::ExperimentConfig cfg = resolve_config(opts);
    const varbn::ExtractedDatabase db = varbn::read_extracted_csv(opts.input);
    auto [states, disc] = varbn::discretize(db, cfg.n_states);
    const varbn::DagStructure structure = varbn::learn_structure(states, cfg.mode);
    varbn::DiscreteBayesNet net = varbn::learn_cpts(structure, states);
    net.labels = db.labels;
    const std::string dir = cfg.effective_out_dir();
    ensure_out(dir);
    varbn::write_net(dir + "/net.txt", net);
    varbn::write_edge_list(dir + "/edges.txt", structure, db.labels);
    std::cout << "wrote " << dir << "/net.txt (" << structure.edges.size() << " edges, score "
              << varbn::score(structure, states) << ")\n";
    return 0;
}

int cmd_var(const CommonOpts& opts, bool dump_pdfs) {
    varbn::ExperimentConfig cfg = resolve_config(opts);
    const varbn::ExtractedDatabase db = varbn::read_extracted_csv(opts.input);
    const std::size_t horizon = cfg.horizon != 0 ? cfg.horizon : cfg.generator.length;
    auto [states, disc] = varbn::discretize(db, cfg.n_states);
    const varbn::DagStructure structure = varbn::learn_structure(states, cfg.mode);
    varbn::DiscreteBayesNet net = varbn::learn_cpts(structure, states);
    net.labels = db.labels;
    std::vector<varbn::BinnedPdf> marginals;
    for (std::size_t i = 0; i < db.n_processes; ++i)
        marginals.push_back(varbn::marginal(net, i, disc));
    const varbn::VarReport report =
        varbn::var_report(marginals, db.window, horizon, cfg.repetitions, cfg.samples_per_rep,
                          varbn::derive_seed(cfg.master_seed, 1));
    const std::string dir = cfg.effective_out_dir();
    ensure_out(dir);
    varbn::write_var_csv(dir + "/var.csv", report, db.labels);
    if (dump_pdfs)
        for (std::size_t i = 0; i < marginals.size(); ++i)
            varbn::write_pdf_csv(dir + "/pdf_" + db.labels[i] + ".csv",
                                 varbn::convolve_to_horizon(marginals[i], db.window, horizon));
    std::cout << "wrote " << dir << "/var.csv, total VaR " << report.total_var << '\n';
    return 0;
}

int cmd_experiment(const std::string& which, const CommonOpts& opts) {
    varbn::ExperimentConfig cfg = resolve_config(opts);
    if (opts.window != 0) cfg.window_grid = {opts.window};
    if (which == "fig1")
        varbn::experiment_fig1(cfg);
    else if (which == "table1")
        varbn::experiment_table1(cfg);
    else if (which == "fig2")
        varbn::experiment_fig2(cfg);
    else
        throw std::runtime_error("unknown experiment '" + which + "' (fig1, table1, fig2)");
    std::cout << "experiment " << which << " written under " << cfg.effective_out_dir() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Operational-risk VaR pipeline: correlated loss synthesis, windowed "
                 "aggregation, Bayesian-network learning and convolution-based VaR"};
    app.require_subcommand(1);

    CommonOpts gen_opts, agg_opts, learn_opts, var_opts, exp_opts;
    bool dump_pdfs = false;
    std::string experiment_name;

    add_common(app.add_subcommand("generate", "synthesize a correlated loss series"), gen_opts,
               false);
    add_common(app.add_subcommand("aggregate", "sum a series over windows of T steps"), agg_opts,
               true);
    add_common(app.add_subcommand("learn", "discretize and learn a Bayesian network"), learn_opts,
               true);
    auto* var_cmd = app.add_subcommand("var", "learn and compute the 99.9% VaR");
    add_common(var_cmd, var_opts, true);
    var_cmd->add_flag("--dump-pdfs", dump_pdfs, "also write the convolved per-process PDFs");
    auto* exp_cmd = app.add_subcommand("experiment", "batch reproductions: fig1, table1, fig2");
    exp_cmd->add_option("name", experiment_name, "fig1 | table1 | fig2")->required();
    add_common(exp_cmd, exp_opts, false);

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("generate")) return cmd_generate(gen_opts);
        if (app.got_subcommand("aggregate")) return cmd_aggregate(agg_opts);
        if (app.got_subcommand("learn")) return cmd_learn(learn_opts);
        if (app.got_subcommand("var")) return cmd_var(var_opts, dump_pdfs);
        if (app.got_subcommand("experiment")) return cmd_experiment(experiment_name, exp_opts);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
