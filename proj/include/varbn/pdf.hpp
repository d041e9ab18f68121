#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace varbn {

/// Probability mass over consecutive loss bins. `order` counts how many base
/// distributions have been convolved together (1 for an unconvolved marginal).
/// Bin index k (1-based) represents the monetary value (k + order/2 - 1) * bin_width:
/// a base bin stands for its midpoint, and midpoints add under convolution.
struct BinnedPdf {
    std::vector<double> mass;
    double bin_width = 0.0;
    std::size_t order = 1;

    std::size_t n_bins() const { return mass.size(); }
    double value_at(std::size_t k) const {  // k is 1-based
        return (static_cast<double>(k) + static_cast<double>(order) / 2.0 - 1.0) * bin_width;
    }
    double mean() const;
    void validate() const;
};

/// R(k) = sum_m p(m) q(k - m + 1) over the overlapping index range,
/// k = 1 .. len(p) + len(q) - 1. Bin widths must match; orders add.
BinnedPdf convolve(const BinnedPdf& p, const BinnedPdf& q);

/// round(horizon / window)-fold self-convolution (half-up, floored at one
/// factor). The input must be an unconvolved (order 1) distribution.
BinnedPdf convolve_to_horizon(const BinnedPdf& p, std::size_t window, std::size_t horizon);

struct PercentileEstimate {
    double value = 0.0;
    double stddev = 0.0;
};

/// Per repetition: draw `samples_per_rep` bins, take the second largest and
/// map it to money; returns the mean and sample std across repetitions.
/// Repetitions use seeds drawn up-front from `seed`, so the result does not
/// depend on how many threads execute them.
PercentileEstimate percentile_999(const BinnedPdf& p, std::size_t repetitions,
                                  std::size_t samples_per_rep, std::uint64_t seed);

struct VarReport {
    std::vector<double> per_process_var;
    std::vector<double> per_process_std;
    double total_var = 0.0;
    std::size_t horizon = 0;
    std::size_t repetitions = 0;
};

/// Convolve every order-1 marginal to the horizon and extract its 99.9
/// percentile; the total is the plain sum over processes.
VarReport var_report(const std::vector<BinnedPdf>& marginals, std::size_t window,
                     std::size_t horizon, std::size_t repetitions,
                     std::size_t samples_per_rep, std::uint64_t seed);

void write_pdf_csv(const std::string& path, const BinnedPdf& p);
void write_var_csv(const std::string& path, const VarReport& report,
                   const std::vector<std::string>& labels);

}  // namespace varbn
