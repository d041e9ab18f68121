#include "varbn/reference.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "varbn/rng.hpp"

namespace varbn::reference {

CorrelationEstimate empirical_correlation_serial(const LossMatrix& series,
                                                 std::size_t max_lag) {
    if (series.n_processes < 1 || series.n_steps < 2)
        throw std::invalid_argument("series needs at least 1 process and 2 steps");
    if (max_lag < 1 || max_lag > series.n_steps - 2)
        throw std::invalid_argument("max_lag out of range");
    const std::size_t n = series.n_processes;
    const std::size_t steps = series.n_steps;

    std::vector<double> mean(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (std::size_t s = 0; s < steps; ++s) sum += series.at(i, s);
        mean[i] = sum / static_cast<double>(steps);
    }

    CorrelationEstimate est;
    est.n = n;
    est.max_lag = max_lag;
    est.c.assign(n * n * (max_lag + 1), std::numeric_limits<double>::quiet_NaN());
    est.ok.assign(n * n, 0);
    est.covariance.assign(n * n, 0.0);

    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double s0 = 0.0;
            for (std::size_t s = 0; s < steps; ++s) s0 += series.at(i, s) * series.at(j, s);
            const double cov = s0 / static_cast<double>(steps) - mean[i] * mean[j];
            est.covariance[i * n + j] = cov;
            if (cov == 0.0) continue;
            est.ok[i * n + j] = 1;
            double* out = est.c.data() + (i * n + j) * (max_lag + 1);
            for (std::size_t t = 0; t <= max_lag; ++t) {
                double sum = 0.0;
                for (std::size_t s = 0; s + t < steps; ++s)
                    sum += series.at(i, s) * series.at(j, s + t);
                out[t] = (sum / static_cast<double>(steps - t) - mean[i] * mean[j]) / cov;
            }
        }
    return est;
}

double objective_serial(const LossMatrix& series, const CorrelationTarget& target) {
    CorrelationEstimate est = empirical_correlation_serial(series, target.max_lag);
    double total = 0.0;
    for (std::size_t i = 0; i < target.n; ++i)
        for (std::size_t j = 0; j < target.n; ++j) {
            if (!est.pair_defined(i, j))
                throw std::runtime_error("objective undefined: zero same-time covariance");
            for (std::size_t t = 1; t <= target.max_lag; ++t) {
                const double d = est.at(i, j, t) - target.value(i, j, t);
                total += d * d;
            }
        }
    return total;
}

PercentileEstimate percentile_999_serial(const BinnedPdf& p, std::size_t repetitions,
                                         std::size_t samples_per_rep, std::uint64_t seed) {
    if (repetitions < 1) throw std::invalid_argument("repetitions must be at least 1");
    if (samples_per_rep < 2) throw std::invalid_argument("need at least 2 samples per repetition");
    std::vector<double> cdf(p.mass.size());
    double acc = 0.0;
    for (std::size_t k = 0; k < p.mass.size(); ++k) {
        acc += p.mass[k];
        cdf[k] = acc;
    }

    std::vector<double> values(repetitions);
    for (std::size_t rep = 0; rep < repetitions; ++rep) {
        std::mt19937_64 rng(derive_seed(seed, rep));
        std::size_t top1 = 0, top2 = 0;  // two largest 1-based bin indices
        for (std::size_t s = 0; s < samples_per_rep; ++s) {
            const double u = uniform01(rng);
            std::size_t lo = 0, hi = cdf.size() - 1;
            while (lo < hi) {
                const std::size_t mid = (lo + hi) / 2;
                if (cdf[mid] > u)
                    hi = mid;
                else
                    lo = mid + 1;
            }
            const std::size_t k = lo + 1;
            if (k >= top1) {
                top2 = top1;
                top1 = k;
            } else if (k > top2) {
                top2 = k;
            }
        }
        values[rep] = p.value_at(top2);
    }
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(repetitions);
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    const double sd = repetitions > 1 ? std::sqrt(var / static_cast<double>(repetitions - 1)) : 0.0;
    return {mean, sd};
}

}  // namespace varbn::reference
