#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "varbn/loss_matrix.hpp"

namespace varbn {

/// floor(S / window) records of per-process losses summed over consecutive
/// windows of `window` steps; trailing steps beyond the last full window are
/// dropped.
struct ExtractedDatabase {
    std::size_t window = 0;
    std::size_t n_records = 0;
    std::size_t n_processes = 0;
    std::vector<std::string> labels;
    std::vector<double> records;  // [k * n_processes + i]

    double at(std::size_t record, std::size_t process) const {
        return records[record * n_processes + process];
    }
    /// One process's aggregates in temporal order.
    std::vector<double> column(std::size_t process) const;
};

ExtractedDatabase extract(const LossMatrix& series, std::size_t window);

/// View the records as a loss series again (one step per record), so the
/// correlation estimators can run on aggregated data.
LossMatrix as_series(const ExtractedDatabase& db);

void write_extracted_csv(const std::string& path, const ExtractedDatabase& db);
ExtractedDatabase read_extracted_csv(const std::string& path);

}  // namespace varbn
