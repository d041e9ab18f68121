#include "varbn/generator.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "varbn/csv.hpp"
#include "varbn/rng.hpp"

namespace varbn {

std::size_t GeneratorConfig::reservoir_length() const {
    const auto w = static_cast<std::size_t>(std::llround(basin_factor * static_cast<double>(length)));
    return std::max(w, length);
}

void GeneratorConfig::validate() const {
    if (n_processes < 1) throw std::invalid_argument("need at least one process");
    if (length < 2) throw std::invalid_argument("series length must be at least 2");
    target.validate();
    if (target.n != n_processes)
        throw std::invalid_argument("target size does not match process count");
    if (target.max_lag > length - 2)
        throw std::invalid_argument("target max_lag must not exceed length minus 2");
    if (marginal.means.size() != n_processes)
        throw std::invalid_argument("need one marginal mean per process");
    for (double m : marginal.means)
        if (!(m > 0.0)) throw std::invalid_argument("marginal means must be positive");
    if (!(basin_factor >= 1.0)) throw std::invalid_argument("basin_factor must be at least 1");
    if (plateau_window < 1) throw std::invalid_argument("plateau_window must be positive");
    if (trace_stride < 1) throw std::invalid_argument("trace_stride must be positive");
}

LossMatrix draw_initial(const GeneratorConfig& config) {
    config.validate();
    const std::size_t w = config.reservoir_length();
    LossMatrix series(config.n_processes, w);
    std::mt19937_64 rng(derive_seed(config.seed, 0));
    for (std::size_t i = 0; i < config.n_processes; ++i) {
        double* row = series.row(i);
        const double mean = config.marginal.means[i];
        for (std::size_t s = 0; s < w; ++s) row[s] = exponential_draw(rng, mean);
    }
    return series;
}

SwapProposal propose_swap(const LossMatrix& series, std::mt19937_64& rng) {
    if (series.n_steps < 2) throw std::invalid_argument("series needs at least 2 columns");
    SwapProposal p;
    p.process = static_cast<std::size_t>(uniform_below(rng, series.n_processes));
    p.first = static_cast<std::size_t>(uniform_below(rng, series.n_steps));
    do {
        p.second = static_cast<std::size_t>(uniform_below(rng, series.n_steps));
    } while (p.second == p.first);
    return p;
}

namespace {

// Incremental state for the descent objective, evaluated on the first L
// columns only. Lag sums are S[pair][t] = sum_{s < L-t} w_i(s) w_j(s+t); a
// swap touches one row at two positions, so only the 2N-1 ordered pairs
// involving that row change.
class ObjectiveEngine {
public:
    ObjectiveEngine(const LossMatrix& series, const CorrelationTarget& target,
                    std::size_t window_length)
        : n_(series.n_processes),
          window_(window_length),
          max_lag_(target.max_lag),
          stride_(target.max_lag + 1) {
        inv_len_.resize(stride_);
        for (std::size_t t = 0; t <= max_lag_; ++t)
            inv_len_[t] = 1.0 / static_cast<double>(window_ - t);
        targets_.resize(n_ * n_ * stride_);
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < n_; ++j)
                for (std::size_t t = 0; t <= max_lag_; ++t)
                    targets_[(i * n_ + j) * stride_ + t] = target.value(i, j, t);

        mean_.assign(n_, 0.0);
        lag_sums_.assign(n_ * n_ * stride_, 0.0);
        cov_.assign(n_ * n_, 0.0);
        pair_fit_.assign(n_ * n_, 0.0);
        rebuild(series);

        const std::size_t affected = 2 * n_ - 1;
        scratch_sums_.assign(affected * stride_, 0.0);
        cand_fit_.assign(affected, 0.0);
        cand_cov_.assign(n_, 0.0);
    }

    void rebuild(const LossMatrix& series) {
        for (std::size_t i = 0; i < n_; ++i) {
            const double* row = series.row(i);
            double sum = 0.0;
            for (std::size_t s = 0; s < window_; ++s) sum += row[s];
            mean_[i] = sum / static_cast<double>(window_);
        }
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < n_; ++j) {
                const double* a = series.row(i);
                const double* b = series.row(j);
                double* out = lag_sums_.data() + (i * n_ + j) * stride_;
                for (std::size_t t = 0; t <= max_lag_; ++t) {
                    double sum = 0.0;
                    for (std::size_t s = 0; s + t < window_; ++s) sum += a[s] * b[s + t];
                    out[t] = sum;
                }
                const double cov = out[0] / static_cast<double>(window_) - mean_[i] * mean_[j];
                if (cov == 0.0)
                    throw std::runtime_error(
                        "objective undefined: zero same-time covariance for pair (" +
                        std::to_string(i + 1) + "," + std::to_string(j + 1) + ")");
                cov_[i * n_ + j] = cov;
            }
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < n_; ++j)
                pair_fit_[i * n_ + j] =
                    pair_objective(lag_sums_.data() + (i * n_ + j) * stride_,
                                   mean_[i] * mean_[j], 1.0 / cov_[i * n_ + j],
                                   targets_.data() + (i * n_ + j) * stride_);
    }

    double total() const {
        double f = 0.0;
        for (double v : pair_fit_) f += v;
        return f;
    }

    // Evaluates the objective after swapping row `r` values at positions
    // a < b (positions over the full reservoir; only those inside the window
    // enter). Returns the candidate total without committing anything.
    double evaluate_swap(const LossMatrix& series, std::size_t r, std::size_t a,
                         std::size_t b) {
        const double* row_r = series.row(r);
        const double vp = row_r[a];
        const double vq = row_r[b];
        const double dv = vq - vp;
        const auto window = static_cast<std::ptrdiff_t>(window_);
        const auto pa = static_cast<std::ptrdiff_t>(a);
        const auto pb = static_cast<std::ptrdiff_t>(b);
        const bool a_in = pa < window;
        const bool b_in = pb < window;

        const double dmu = ((a_in ? dv : 0.0) + (b_in ? -dv : 0.0)) /
                           static_cast<double>(window_);
        cand_mean_r_ = mean_[r] + dmu;

        const auto lag = static_cast<std::ptrdiff_t>(max_lag_);
        // Row r as the left factor: pairs (r, j) for every j.
        for (std::size_t j = 0; j < n_; ++j) {
            const double* src = lag_sums_.data() + (r * n_ + j) * stride_;
            double* dst = scratch_sums_.data() + j * stride_;
            if (j != r) {
                const double* row_j = series.row(j);
                const std::ptrdiff_t hi_both = std::min(lag, window - 1 - pb);
                const std::ptrdiff_t hi_a = std::min(lag, window - 1 - pa);
                std::ptrdiff_t t = 0;
                for (; t <= hi_both; ++t) dst[t] = src[t] + dv * (row_j[pa + t] - row_j[pb + t]);
                for (; t <= hi_a; ++t) dst[t] = src[t] + dv * row_j[pa + t];
                for (; t <= lag; ++t) dst[t] = src[t];
            } else {
                // Both factors change; walk the distinct affected positions.
                for (std::ptrdiff_t t = 0; t <= lag; ++t) {
                    std::ptrdiff_t cand[4] = {pa, pb, pa - t, pb - t};
                    double delta = 0.0;
                    for (int k = 0; k < 4; ++k) {
                        const std::ptrdiff_t s = cand[k];
                        if (s < 0 || s >= window - t) continue;
                        bool dup = false;
                        for (int m = 0; m < k; ++m)
                            if (cand[m] == s && !(cand[m] < 0 || cand[m] >= window - t)) dup = true;
                        if (dup) continue;
                        const double left_old = row_r[s];
                        const double right_old = row_r[s + t];
                        const double left_new = (s == pa) ? vq : (s == pb) ? vp : left_old;
                        const std::ptrdiff_t s2 = s + t;
                        const double right_new = (s2 == pa) ? vq : (s2 == pb) ? vp : right_old;
                        delta += left_new * right_new - left_old * right_old;
                    }
                    dst[t] = src[t] + delta;
                }
            }
        }
        // Row r as the right factor: pairs (j, r) for j != r.
        for (std::size_t j = 0; j < n_; ++j) {
            if (j == r) continue;
            const std::size_t slot = n_ + (j < r ? j : j - 1);
            const double* src = lag_sums_.data() + (j * n_ + r) * stride_;
            double* dst = scratch_sums_.data() + slot * stride_;
            std::memcpy(dst, src, stride_ * sizeof(double));
            const double* row_j = series.row(j);
            if (a_in) {
                const std::ptrdiff_t hi = std::min(lag, pa);
                for (std::ptrdiff_t t = 0; t <= hi; ++t) dst[t] += dv * row_j[pa - t];
            }
            if (b_in) {
                const std::ptrdiff_t hi = std::min(lag, pb);
                for (std::ptrdiff_t t = 0; t <= hi; ++t) dst[t] -= dv * row_j[pb - t];
            }
        }

        // Candidate covariances and pair objectives.
        double cand_total = 0.0;
        for (std::size_t j = 0; j < n_; ++j) {
            const double mu_j = (j == r) ? cand_mean_r_ : mean_[j];
            const double s0 = scratch_sums_[j * stride_];
            const double cov = s0 / static_cast<double>(window_) - cand_mean_r_ * mu_j;
            cand_cov_[j] = cov;
            if (cov == 0.0) return std::numeric_limits<double>::infinity();
        }
        for (std::size_t j = 0; j < n_; ++j) {
            const double mm = cand_mean_r_ * ((j == r) ? cand_mean_r_ : mean_[j]);
            cand_fit_[j] = pair_objective(scratch_sums_.data() + j * stride_, mm,
                                          1.0 / cand_cov_[j],
                                          targets_.data() + (r * n_ + j) * stride_);
        }
        for (std::size_t j = 0; j < n_; ++j) {
            if (j == r) continue;
            const std::size_t slot = n_ + (j < r ? j : j - 1);
            const double mm = mean_[j] * cand_mean_r_;
            cand_fit_[slot] = pair_objective(scratch_sums_.data() + slot * stride_, mm,
                                             1.0 / cand_cov_[j],
                                             targets_.data() + (j * n_ + r) * stride_);
        }
        // Total in fixed pair order, swapping in candidate values.
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < n_; ++j) {
                double v;
                if (i == r)
                    v = cand_fit_[j];
                else if (j == r)
                    v = cand_fit_[n_ + (i < r ? i : i - 1)];
                else
                    v = pair_fit_[i * n_ + j];
                cand_total += v;
            }
        return cand_total;
    }

    // Commits the state evaluated by the last evaluate_swap call.
    void commit_swap(LossMatrix& series, std::size_t r, std::size_t a, std::size_t b) {
        for (std::size_t j = 0; j < n_; ++j) {
            std::memcpy(lag_sums_.data() + (r * n_ + j) * stride_,
                        scratch_sums_.data() + j * stride_, stride_ * sizeof(double));
            pair_fit_[r * n_ + j] = cand_fit_[j];
            cov_[r * n_ + j] = cand_cov_[j];
            cov_[j * n_ + r] = cand_cov_[j];
            if (j != r) {
                const std::size_t slot = n_ + (j < r ? j : j - 1);
                std::memcpy(lag_sums_.data() + (j * n_ + r) * stride_,
                            scratch_sums_.data() + slot * stride_, stride_ * sizeof(double));
                pair_fit_[j * n_ + r] = cand_fit_[slot];
            }
        }
        mean_[r] = cand_mean_r_;
        double* row = series.row(r);
        std::swap(row[a], row[b]);
    }

private:
    double pair_objective(const double* sums, double mm, double inv_cov,
                          const double* target_row) const {
        double acc = 0.0;
        for (std::size_t t = 1; t <= max_lag_; ++t) {
            const double c = (sums[t] * inv_len_[t] - mm) * inv_cov;
            const double d = c - target_row[t];
            acc += d * d;
        }
        return acc;
    }

    std::size_t n_, window_, max_lag_, stride_;
    std::vector<double> inv_len_;
    std::vector<double> targets_;
    std::vector<double> mean_;
    std::vector<double> lag_sums_;
    std::vector<double> cov_;
    std::vector<double> pair_fit_;
    std::vector<double> scratch_sums_;
    std::vector<double> cand_fit_;
    std::vector<double> cand_cov_;
    double cand_mean_r_ = 0.0;
};

}  // namespace

std::pair<LossMatrix, GeneratorReport> run_generator(const GeneratorConfig& config) {
    config.validate();
    LossMatrix series = draw_initial(config);
    ObjectiveEngine engine(series, config.target, config.length);

    GeneratorReport report;
    report.initial_objective = engine.total();
    report.objective_trace.emplace_back(0, report.initial_objective);

    std::mt19937_64 rng(derive_seed(config.seed, 1));
    double current = report.initial_objective;
    std::uint64_t rejected_streak = 0;
    bool plateau = false;

    while (report.proposals < config.max_iterations) {
        ++report.proposals;
        SwapProposal prop = propose_swap(series, rng);
        std::size_t a = prop.first, b = prop.second;
        if (a > b) std::swap(a, b);

        bool accepted = false;
        const bool touches_window = a < config.length;
        if (touches_window && series.at(prop.process, a) != series.at(prop.process, b)) {
            const double cand = engine.evaluate_swap(series, prop.process, a, b);
            if (cand < current) {
                engine.commit_swap(series, prop.process, a, b);
                current = cand;
                accepted = true;
            }
        }
        if (accepted) {
            ++report.accepted_swaps;
            rejected_streak = 0;
            if (report.accepted_swaps % config.trace_stride == 0)
                report.objective_trace.emplace_back(report.proposals, current);
        } else {
            ++rejected_streak;
            if (rejected_streak >= config.plateau_window) {
                plateau = true;
                break;
            }
        }
    }
    report.final_objective = current;
    report.halted_by =
        plateau ? GeneratorReport::Halt::plateau : GeneratorReport::Halt::max_iterations;
    if (report.objective_trace.back().second != current)
        report.objective_trace.emplace_back(report.proposals, current);

    LossMatrix window(config.n_processes, config.length);
    window.labels = series.labels;
    for (std::size_t i = 0; i < config.n_processes; ++i)
        std::memcpy(window.row(i), series.row(i), config.length * sizeof(double));
    return {std::move(window), std::move(report)};
}

void write_report(const std::string& path, const GeneratorReport& report) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "initial_objective = " << format_double(report.initial_objective) << '\n'
        << "final_objective = " << format_double(report.final_objective) << '\n'
        << "accepted_swaps = " << report.accepted_swaps << '\n'
        << "proposals = " << report.proposals << '\n'
        << "halted_by = "
        << (report.halted_by == GeneratorReport::Halt::plateau ? "plateau" : "max_iterations")
        << '\n';
    if (!out) throw std::runtime_error("failed writing " + path);
}

void write_trace_csv(const std::string& path, const GeneratorReport& report) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "iteration,objective\n";
    for (const auto& [iter, value] : report.objective_trace)
        out << iter << ',' << format_double(value) << '\n';
    if (!out) throw std::runtime_error("failed writing " + path);
}

}  // namespace varbn
