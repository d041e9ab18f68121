// Timing comparison between the OpenMP kernels and their serial references,
// plus the incremental-descent generator against a full-recompute baseline.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>

#include "varbn/corr.hpp"
#include "varbn/generator.hpp"
#include "varbn/pdf.hpp"
#include "varbn/reference.hpp"
#include "varbn/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace varbn;

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

LossMatrix random_series(std::size_t n, std::size_t steps, std::uint64_t seed) {
    LossMatrix series(n, steps);
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t s = 0; s < steps; ++s) series.at(i, s) = exponential_draw(rng, 50.0);
    return series;
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("OpenMP enabled, max threads %d\n", omp_get_max_threads());
#else
    std::printf("OpenMP disabled (serial build)\n");
#endif

    {
        const LossMatrix series = random_series(4, 40000, 11);
        const std::size_t max_lag = 400;
        auto t0 = std::chrono::steady_clock::now();
        const CorrelationEstimate serial =
            reference::empirical_correlation_serial(series, max_lag);
        const double ts = seconds_since(t0);
        t0 = std::chrono::steady_clock::now();
        const CorrelationEstimate parallel = empirical_correlation(series, max_lag);
        const double tp = seconds_since(t0);
        double max_diff = 0.0;
        for (std::size_t k = 0; k < serial.c.size(); ++k)
            max_diff = std::max(max_diff, std::fabs(serial.c[k] - parallel.c[k]));
        std::printf("empirical_correlation N=4 S=40000 lag=400: serial %.3fs, parallel %.3fs "
                    "(x%.2f), max |diff| %.3g\n",
                    ts, tp, ts / tp, max_diff);
    }

    {
        BinnedPdf base;
        base.mass = {0.30, 0.25, 0.20, 0.15, 0.10};
        base.bin_width = 10.0;
        base.order = 1;
        const BinnedPdf big = convolve_to_horizon(base, 10, 2000);
        auto t0 = std::chrono::steady_clock::now();
        const PercentileEstimate serial = reference::percentile_999_serial(big, 400, 1000, 5);
        const double ts = seconds_since(t0);
        t0 = std::chrono::steady_clock::now();
        const PercentileEstimate parallel = percentile_999(big, 400, 1000, 5);
        const double tp = seconds_since(t0);
        std::printf("percentile_999 reps=400: serial %.3fs, parallel %.3fs (x%.2f), "
                    "values %.6f / %.6f\n",
                    ts, tp, ts / tp, serial.value, parallel.value);
    }

    {
        GeneratorConfig cfg;
        cfg.n_processes = 2;
        cfg.length = 512;
        cfg.target = CorrelationTarget::homogeneous(2, 8.0, 40);
        cfg.marginal.means = {100.0, 10.0};
        cfg.basin_factor = 1.0;
        cfg.plateau_window = 2000;
        cfg.max_iterations = 30000;
        cfg.seed = 3;

        auto t0 = std::chrono::steady_clock::now();
        auto [series, report] = run_generator(cfg);
        const double tinc = seconds_since(t0);

        // Full-recompute baseline: replay the same proposal stream and evaluate
        // the objective from scratch at every step.
        LossMatrix state = draw_initial(cfg);
        std::mt19937_64 rng(derive_seed(cfg.seed, 1));
        LossMatrix window(cfg.n_processes, cfg.length);
        auto refresh = [&]() {
            for (std::size_t i = 0; i < cfg.n_processes; ++i)
                for (std::size_t s = 0; s < cfg.length; ++s) window.at(i, s) = state.at(i, s);
        };
        refresh();
        t0 = std::chrono::steady_clock::now();
        double current = reference::objective_serial(window, cfg.target);
        std::uint64_t proposals = 0, accepted = 0, streak = 0;
        while (proposals < cfg.max_iterations && streak < cfg.plateau_window) {
            ++proposals;
            const SwapProposal prop = propose_swap(state, rng);
            double* row = state.row(prop.process);
            std::swap(row[prop.first], row[prop.second]);
            refresh();
            const double cand = reference::objective_serial(window, cfg.target);
            if (cand < current) {
                current = cand;
                ++accepted;
                streak = 0;
            } else {
                std::swap(row[prop.first], row[prop.second]);
                ++streak;
            }
        }
        const double tfull = seconds_since(t0);
        std::printf("generator L=512 (%llu proposals, %llu accepted): incremental %.3fs, "
                    "full recompute %.3fs (x%.1f), objectives %.6f / %.6f\n",
                    static_cast<unsigned long long>(report.proposals),
                    static_cast<unsigned long long>(accepted), tinc, tfull, tfull / tinc,
                    report.final_objective, current);
    }
    return 0;
}
