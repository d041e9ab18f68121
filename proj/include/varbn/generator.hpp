#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "varbn/corr.hpp"
#include "varbn/loss_matrix.hpp"

namespace varbn {

/// Per-process sampling distribution. Only the negative exponential family is
/// built in; the tag leaves room for others.
struct MarginalSpec {
    enum class Family { exponential };
    Family family = Family::exponential;
    std::vector<double> means;  // one per process, money units, > 0
};

struct GeneratorConfig {
    std::size_t n_processes = 0;
    std::size_t length = 0;  // L, the active window
    CorrelationTarget target;
    MarginalSpec marginal;
    double basin_factor = 2.0;          // kappa; rows carry kappa*L values
    std::size_t plateau_window = 10000;  // consecutive rejections before halting
    std::size_t max_iterations = 10000000;
    std::uint64_t seed = 1;
    std::size_t trace_stride = 1;  // record every k-th accepted swap

    std::size_t reservoir_length() const;  // kappa * L, at least L
    void validate() const;
};

struct GeneratorReport {
    double initial_objective = 0.0;
    double final_objective = 0.0;
    // (proposal index, objective value) at accepted swaps, non-increasing.
    std::vector<std::pair<std::uint64_t, double>> objective_trace;
    std::uint64_t accepted_swaps = 0;
    std::uint64_t proposals = 0;
    enum class Halt { plateau, max_iterations } halted_by = Halt::plateau;
};

/// N rows of kappa*L independent inverse-CDF draws; extraction order is the
/// temporal order.
LossMatrix draw_initial(const GeneratorConfig& config);

struct SwapProposal {
    std::size_t process = 0;
    std::size_t first = 0;   // positions over the full reservoir extent
    std::size_t second = 0;  // distinct from first
};

/// Uniform process row and two distinct uniform positions within it.
SwapProposal propose_swap(const LossMatrix& series, std::mt19937_64& rng);

/// Strict-descent swap search: propose, evaluate the objective on the first L
/// columns, accept only decreases, halt on a plateau or the iteration cap.
/// Returns the first L columns and the descent report.
std::pair<LossMatrix, GeneratorReport> run_generator(const GeneratorConfig& config);

void write_report(const std::string& path, const GeneratorReport& report);
void write_trace_csv(const std::string& path, const GeneratorReport& report);

}  // namespace varbn
