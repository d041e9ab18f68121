#pragma once

#include <cstddef>
#include <cstdint>

#include "varbn/corr.hpp"
#include "varbn/loss_matrix.hpp"
#include "varbn/pdf.hpp"

namespace varbn::reference {

// Serial counterparts of the parallel kernels, kept for testing and for the
// benchmark target. Same arithmetic per entry, no OpenMP.

CorrelationEstimate empirical_correlation_serial(const LossMatrix& series, std::size_t max_lag);

double objective_serial(const LossMatrix& series, const CorrelationTarget& target);

PercentileEstimate percentile_999_serial(const BinnedPdf& p, std::size_t repetitions,
                                         std::size_t samples_per_rep, std::uint64_t seed);

}  // namespace varbn::reference
