#include "varbn/corr.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "varbn/csv.hpp"

namespace varbn {

CorrelationTarget CorrelationTarget::homogeneous(std::size_t n, double tau,
                                                 std::size_t max_lag) {
    CorrelationTarget t;
    t.n = n;
    t.tau.assign(n * n, tau);
    t.max_lag = max_lag;
    t.validate();
    return t;
}

double CorrelationTarget::value(std::size_t i, std::size_t j, std::size_t lag) const {
    return std::exp(-static_cast<double>(lag) / tau[i * n + j]);
}

void CorrelationTarget::validate() const {
    if (n < 1) throw std::invalid_argument("correlation target needs at least one process");
    if (tau.size() != n * n) throw std::invalid_argument("decay matrix size mismatch");
    if (max_lag < 1) throw std::invalid_argument("max_lag must be positive");
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (!(tau[i * n + j] > 0.0))
                throw std::invalid_argument("decay times must be positive");
            if (tau[i * n + j] != tau[j * n + i])
                throw std::invalid_argument(
                    "decay matrix must be symmetric; asymmetric targets are not supported");
        }
}

std::size_t default_max_lag(std::size_t n_steps, const CorrelationTarget& target) {
    double max_tau = *std::max_element(target.tau.begin(), target.tau.end());
    auto cap = static_cast<std::size_t>(std::ceil(5.0 * max_tau));
    return std::min(n_steps >= 2 ? n_steps - 2 : std::size_t{1}, std::max<std::size_t>(1, cap));
}

namespace {

void check_series(const LossMatrix& series, std::size_t max_lag) {
    if (series.n_processes < 1 || series.n_steps < 2)
        throw std::invalid_argument("series needs at least 1 process and 2 steps");
    if (max_lag < 1) throw std::invalid_argument("max_lag must be positive");
    if (max_lag > series.n_steps - 2)
        throw std::invalid_argument("max_lag must not exceed series length minus 2");
    for (std::size_t i = 0; i < series.n_processes; ++i) {
        const double* r = series.row(i);
        const double first = r[0];
        bool constant = true;
        for (std::size_t s = 1; s < series.n_steps; ++s)
            if (r[s] != first) {
                constant = false;
                break;
            }
        if (constant)
            throw std::invalid_argument("degenerate (constant) series for process " +
                                        (i < series.labels.size() ? series.labels[i]
                                                                  : std::to_string(i + 1)));
    }
}

// One correlation entry; accumulation runs in ascending s in every code path.
double lag_product_sum(const double* a, const double* b, std::size_t n_steps,
                       std::size_t lag) {
    double sum = 0.0;
    const std::size_t limit = n_steps - lag;
    for (std::size_t s = 0; s < limit; ++s) sum += a[s] * b[s + lag];
    return sum;
}

}  // namespace

CorrelationEstimate empirical_correlation(const LossMatrix& series, std::size_t max_lag) {
    check_series(series, max_lag);
    const std::size_t n = series.n_processes;
    const std::size_t steps = series.n_steps;

    std::vector<double> mean(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double* r = series.row(i);
        double sum = 0.0;
        for (std::size_t s = 0; s < steps; ++s) sum += r[s];
        mean[i] = sum / static_cast<double>(steps);
    }

    CorrelationEstimate est;
    est.n = n;
    est.max_lag = max_lag;
    est.c.assign(n * n * (max_lag + 1), std::numeric_limits<double>::quiet_NaN());
    est.ok.assign(n * n, 0);
    est.covariance.assign(n * n, 0.0);

    const auto n_pairs = static_cast<std::ptrdiff_t>(n * n);

    // Same-time cross-covariances first; they normalize every lag.
    for (std::ptrdiff_t pair = 0; pair < n_pairs; ++pair) {
        const std::size_t i = static_cast<std::size_t>(pair) / n;
        const std::size_t j = static_cast<std::size_t>(pair) % n;
        const double s0 = lag_product_sum(series.row(i), series.row(j), steps, 0);
        const double cov = s0 / static_cast<double>(steps) - mean[i] * mean[j];
        est.covariance[pair] = cov;
        est.ok[pair] = (cov != 0.0) ? 1 : 0;
    }

#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t pair = 0; pair < n_pairs; ++pair) {
        const std::size_t i = static_cast<std::size_t>(pair) / n;
        const std::size_t j = static_cast<std::size_t>(pair) % n;
        if (!est.ok[pair]) continue;
        const double cov = est.covariance[pair];
        const double mm = mean[i] * mean[j];
        double* out = est.c.data() + static_cast<std::size_t>(pair) * (max_lag + 1);
        for (std::size_t t = 0; t <= max_lag; ++t) {
            const double s = lag_product_sum(series.row(i), series.row(j), steps, t);
            out[t] = (s / static_cast<double>(steps - t) - mm) / cov;
        }
    }
    return est;
}

double objective(const LossMatrix& series, const CorrelationTarget& target) {
    if (target.n != series.n_processes)
        throw std::invalid_argument("target size does not match series");
    CorrelationEstimate est = empirical_correlation(series, target.max_lag);
    double total = 0.0;
    for (std::size_t i = 0; i < target.n; ++i)
        for (std::size_t j = 0; j < target.n; ++j) {
            if (!est.pair_defined(i, j))
                throw std::runtime_error("objective undefined: zero same-time covariance for pair (" +
                                         std::to_string(i + 1) + "," + std::to_string(j + 1) + ")");
            for (std::size_t t = 1; t <= target.max_lag; ++t) {
                const double d = est.at(i, j, t) - target.value(i, j, t);
                total += d * d;
            }
        }
    return total;
}

double fit_decay_time(std::span<const double> c_slice) {
    constexpr double floor = 0.05;
    std::vector<double> ts, ys;
    for (std::size_t t = 0; t < c_slice.size(); ++t) {
        if (!(c_slice[t] > floor)) break;
        ts.push_back(static_cast<double>(t));
        ys.push_back(std::log(c_slice[t]));
    }
    if (ts.size() < 3) throw std::invalid_argument("insufficient decay range");
    double mt = 0.0, my = 0.0;
    for (std::size_t k = 0; k < ts.size(); ++k) {
        mt += ts[k];
        my += ys[k];
    }
    mt /= static_cast<double>(ts.size());
    my /= static_cast<double>(ts.size());
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < ts.size(); ++k) {
        num += (ts[k] - mt) * (ys[k] - my);
        den += (ts[k] - mt) * (ts[k] - mt);
    }
    const double slope = num / den;
    if (!(slope < 0.0)) throw std::runtime_error("correlation slice does not decay");
    return -1.0 / slope;
}

void write_correlation_csv(const std::string& path, const CorrelationEstimate& est,
                           const CorrelationTarget& target) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "i,j,lag,c,C_target\n";
    for (std::size_t i = 0; i < est.n; ++i)
        for (std::size_t j = 0; j < est.n; ++j)
            for (std::size_t t = 0; t <= est.max_lag; ++t) {
                const double c = est.at(i, j, t);
                const double want =
                    (i < target.n && j < target.n) ? target.value(i, j, t) : 1.0;
                out << (i + 1) << ',' << (j + 1) << ',' << t << ','
                    << format_double(c) << ',' << format_double(want) << '\n';
            }
    if (!out) throw std::runtime_error("failed writing " + path);
}

}  // namespace varbn
