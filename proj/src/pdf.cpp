#include "varbn/pdf.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

#include "varbn/csv.hpp"
#include "varbn/rng.hpp"

namespace varbn {

double BinnedPdf::mean() const {
    double m = 0.0;
    for (std::size_t k = 1; k <= mass.size(); ++k) m += mass[k - 1] * value_at(k);
    return m;
}

void BinnedPdf::validate() const {
    if (mass.empty()) throw std::invalid_argument("pdf has no bins");
    if (!(bin_width > 0.0)) throw std::invalid_argument("bin width must be positive");
    if (order < 1) throw std::invalid_argument("order must be at least 1");
    double sum = 0.0;
    for (double m : mass) {
        if (!(m >= 0.0)) throw std::invalid_argument("pdf mass must be non-negative");
        sum += m;
    }
    if (std::fabs(sum - 1.0) > 1e-9) throw std::invalid_argument("pdf mass must sum to 1");
}

BinnedPdf convolve(const BinnedPdf& p, const BinnedPdf& q) {
    if (p.bin_width != q.bin_width)
        throw std::invalid_argument("convolve requires matching bin widths");
    if (p.mass.empty() || q.mass.empty()) throw std::invalid_argument("empty pdf");
    const std::size_t lp = p.mass.size();
    const std::size_t lq = q.mass.size();
    BinnedPdf r;
    r.bin_width = p.bin_width;
    r.order = p.order + q.order;
    r.mass.assign(lp + lq - 1, 0.0);
    // R(k) = sum_m p(m) q(k-m+1) over the overlap, 1-based indices.
    for (std::size_t k = 1; k <= lp + lq - 1; ++k) {
        const std::size_t m_lo = k + 1 > lq ? k + 1 - lq : 1;
        const std::size_t m_hi = std::min(k, lp);
        double acc = 0.0;
        for (std::size_t m = m_lo; m <= m_hi; ++m) acc += p.mass[m - 1] * q.mass[k - m];
        r.mass[k - 1] = acc;
    }
    return r;
}

BinnedPdf convolve_to_horizon(const BinnedPdf& p, std::size_t window, std::size_t horizon) {
    if (p.order != 1)
        throw std::invalid_argument("convolve_to_horizon expects an unconvolved distribution");
    if (window < 1) throw std::invalid_argument("window must be positive");
    if (horizon < window) throw std::invalid_argument("horizon below aggregation window");
    auto folds = static_cast<std::size_t>(
        std::floor(static_cast<double>(horizon) / static_cast<double>(window) + 0.5));
    if (folds < 1) folds = 1;
    BinnedPdf out = p;
    for (std::size_t m = 1; m < folds; ++m) out = convolve(out, p);
    return out;
}

PercentileEstimate percentile_999(const BinnedPdf& p, std::size_t repetitions,
                                  std::size_t samples_per_rep, std::uint64_t seed) {
    if (repetitions < 1) throw std::invalid_argument("repetitions must be at least 1");
    if (samples_per_rep < 2) throw std::invalid_argument("need at least 2 samples per repetition");
    if (p.mass.empty()) throw std::invalid_argument("empty pdf");
    std::vector<double> cdf(p.mass.size());
    double acc = 0.0;
    for (std::size_t k = 0; k < p.mass.size(); ++k) {
        acc += p.mass[k];
        cdf[k] = acc;
    }

    std::vector<double> values(repetitions);
    const auto reps = static_cast<std::ptrdiff_t>(repetitions);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t rep = 0; rep < reps; ++rep) {
        std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(rep)));
        std::size_t top1 = 0, top2 = 0;
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

VarReport var_report(const std::vector<BinnedPdf>& marginals, std::size_t window,
                     std::size_t horizon, std::size_t repetitions,
                     std::size_t samples_per_rep, std::uint64_t seed) {
    if (marginals.empty()) throw std::invalid_argument("no marginals");
    VarReport report;
    report.horizon = horizon;
    report.repetitions = repetitions;
    report.per_process_var.resize(marginals.size());
    report.per_process_std.resize(marginals.size());
    for (std::size_t i = 0; i < marginals.size(); ++i) {
        if (marginals[i].order != 1)
            throw std::invalid_argument("var_report expects order-1 marginals");
        const BinnedPdf horizon_pdf = convolve_to_horizon(marginals[i], window, horizon);
        const PercentileEstimate est =
            percentile_999(horizon_pdf, repetitions, samples_per_rep, derive_seed(seed, i));
        report.per_process_var[i] = est.value;
        report.per_process_std[i] = est.stddev;
    }
    report.total_var = 0.0;
    for (double v : report.per_process_var) report.total_var += v;
    return report;
}

void write_pdf_csv(const std::string& path, const BinnedPdf& p) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "index,value,mass\n";
    for (std::size_t k = 1; k <= p.mass.size(); ++k)
        out << k << ',' << format_double(p.value_at(k)) << ',' << format_double(p.mass[k - 1])
            << '\n';
    if (!out) throw std::runtime_error("failed writing " + path);
}

void write_var_csv(const std::string& path, const VarReport& report,
                   const std::vector<std::string>& labels) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "process,var,std\n";
    for (std::size_t i = 0; i < report.per_process_var.size(); ++i) {
        const std::string label = i < labels.size() ? labels[i] : "P" + std::to_string(i + 1);
        out << label << ',' << format_double(report.per_process_var[i]) << ','
            << format_double(report.per_process_std[i]) << '\n';
    }
    // Per-process draws are independent, so the stds combine in quadrature.
    double var_sum = 0.0;
    for (double s : report.per_process_std) var_sum += s * s;
    out << "total," << format_double(report.total_var) << ',' << format_double(std::sqrt(var_sum))
        << '\n';
    if (!out) throw std::runtime_error("failed writing " + path);
}

}  // namespace varbn
