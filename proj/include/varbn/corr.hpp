#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "varbn/loss_matrix.hpp"

namespace varbn {

/// Imposed correlation functions C_ij(t) = exp(-t / tau_ij), stored as the
/// N x N matrix of decay times. Lags 1..max_lag enter the fitting objective;
/// C_ij(0) is 1 by construction and never part of it.
struct CorrelationTarget {
    std::size_t n = 0;
    std::vector<double> tau;  // [i * n + j], symmetric, entries > 0
    std::size_t max_lag = 0;

    static CorrelationTarget homogeneous(std::size_t n, double tau, std::size_t max_lag);

    double decay(std::size_t i, std::size_t j) const { return tau[i * n + j]; }
    double value(std::size_t i, std::size_t j, std::size_t lag) const;
    void validate() const;
};

/// Default estimation depth: beyond five decay times the target is
/// numerically zero, and the estimator needs at least two products per lag.
std::size_t default_max_lag(std::size_t n_steps, const CorrelationTarget& target);

/// Empirical cross/auto-correlation, lag axis 0..max_lag. A pair whose
/// same-time cross-covariance vanishes is flagged undefined instead of
/// being divided by zero.
struct CorrelationEstimate {
    std::size_t n = 0;
    std::size_t max_lag = 0;
    std::vector<double> c;           // [(i * n + j) * (max_lag + 1) + t]
    std::vector<unsigned char> ok;   // per ordered pair
    std::vector<double> covariance;  // same-time cross-covariance per pair

    double at(std::size_t i, std::size_t j, std::size_t lag) const {
        return c[(i * n + j) * (max_lag + 1) + lag];
    }
    bool pair_defined(std::size_t i, std::size_t j) const { return ok[i * n + j] != 0; }
};

/// c_ij(t) = [ (1/(S-t)) sum_{s<=S-t} l_i(s) l_j(s+t) - <l_i><l_j> ] / cov(l_i, l_j),
/// with cov the same-time cross-covariance, so c_ij(0) = 1 whenever defined.
/// Entries are computed in parallel when OpenMP is enabled; each entry's
/// accumulation order is fixed, so the result is identical to the serial path.
CorrelationEstimate empirical_correlation(const LossMatrix& series, std::size_t max_lag);

/// Sum over all ordered pairs and lags 1..max_lag of [c_ij(t) - C_ij(t)]^2.
double objective(const LossMatrix& series, const CorrelationTarget& target);

/// Least-squares fit of ln c(t) against t over the leading run of lags with
/// c(t) > 0.05; returns the decay time -1/slope. Requires at least 3 such lags.
double fit_decay_time(std::span<const double> c_slice);

void write_correlation_csv(const std::string& path, const CorrelationEstimate& est,
                           const CorrelationTarget& target);

}  // namespace varbn
