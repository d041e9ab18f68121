#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "varbn/bayesnet.hpp"
#include "varbn/generator.hpp"
#include "varbn/pdf.hpp"

namespace varbn {

/// Everything the batch experiments need, read from a flat key=value file.
struct ExperimentConfig {
    GeneratorConfig generator;
    std::vector<std::size_t> window_grid = {1,  5,   10,  20,  40,  60,  80, 100,
                                            120, 140, 160, 180, 200, 220, 240};
    std::size_t realizations = 30;
    std::size_t horizon = 0;  // 0 means the generator length L
    std::size_t n_states = 5;
    std::size_t repetitions = 100;
    std::size_t samples_per_rep = 1000;
    LearnMode mode = LearnMode::greedy;
    std::uint64_t master_seed = 1;
    std::string out_dir;  // empty means unset; effective_out_dir() falls back to "out"

    std::size_t effective_horizon() const { return horizon == 0 ? generator.length : horizon; }
    std::string effective_out_dir() const { return out_dir.empty() ? "out" : out_dir; }
    void validate() const;
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// Seed streams per realization: stream r*8+0 drives the generator, r*8+1 the
// percentile sampling. derive_seed keeps streams stable when realizations grow.
std::uint64_t realization_seed(std::uint64_t master, std::size_t realization, unsigned stage);

/// One generator run; writes (lag, c_12, C_12) CSVs for the raw series and for
/// the T=25 aggregated series against the rescaled target.
void experiment_fig1(const ExperimentConfig& config);

/// Per realization and window: aggregate, discretize, learn a structure and
/// write its edge list; also writes an edge-count summary CSV.
void experiment_table1(const ExperimentConfig& config);

/// Full pipeline per window over independent realizations; writes
/// (T, mean total VaR, std) plus a per-realization detail CSV.
void experiment_fig2(const ExperimentConfig& config);

// Library counterparts used by the CLI one-shot subcommands.
struct PipelineResult {
    DagStructure structure;
    DiscreteBayesNet net;
    Discretization disc;
    VarReport report;
};

/// aggregate -> discretize -> learn -> marginals -> VaR for one series.
PipelineResult run_pipeline(const LossMatrix& series, std::size_t window,
                            std::size_t horizon, std::size_t n_states, LearnMode mode,
                            std::size_t repetitions, std::size_t samples_per_rep,
                            std::uint64_t seed);

}  // namespace varbn
