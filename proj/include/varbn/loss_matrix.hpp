#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace varbn {

/// N processes x S time steps of non-negative losses, row-major.
/// Column index is the temporal order.
struct LossMatrix {
    std::size_t n_processes = 0;
    std::size_t n_steps = 0;
    std::vector<std::string> labels;
    std::vector<double> values;  // [i * n_steps + s]

    LossMatrix() = default;
    LossMatrix(std::size_t n, std::size_t s)
        : n_processes(n), n_steps(s), values(n * s, 0.0) {
        labels.reserve(n);
        for (std::size_t i = 0; i < n; ++i) labels.push_back("P" + std::to_string(i + 1));
    }

    double at(std::size_t i, std::size_t s) const { return values[i * n_steps + s]; }
    double& at(std::size_t i, std::size_t s) { return values[i * n_steps + s]; }
    const double* row(std::size_t i) const { return values.data() + i * n_steps; }
    double* row(std::size_t i) { return values.data() + i * n_steps; }

    void validate() const {
        if (n_processes < 1 || n_steps < 2)
            throw std::invalid_argument("loss matrix needs at least 1 process and 2 steps");
        if (values.size() != n_processes * n_steps)
            throw std::invalid_argument("loss matrix storage size mismatch");
        if (labels.size() != n_processes)
            throw std::invalid_argument("loss matrix label count mismatch");
        for (double v : values)
            if (!(v >= 0.0)) throw std::invalid_argument("loss values must be non-negative");
    }
};

}  // namespace varbn
