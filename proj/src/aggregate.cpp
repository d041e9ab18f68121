#include "varbn/aggregate.hpp"

#include <fstream>
#include <stdexcept>

#include "varbn/csv.hpp"

namespace varbn {

std::vector<double> ExtractedDatabase::column(std::size_t process) const {
    std::vector<double> out(n_records);
    for (std::size_t k = 0; k < n_records; ++k) out[k] = at(k, process);
    return out;
}

ExtractedDatabase extract(const LossMatrix& series, std::size_t window) {
    if (window < 1) throw std::invalid_argument("window must be positive");
    if (window > series.n_steps) throw std::invalid_argument("window exceeds series length");
    ExtractedDatabase db;
    db.window = window;
    db.n_processes = series.n_processes;
    db.n_records = series.n_steps / window;
    db.labels = series.labels;
    db.records.assign(db.n_records * db.n_processes, 0.0);
    for (std::size_t k = 0; k < db.n_records; ++k)
        for (std::size_t i = 0; i < db.n_processes; ++i) {
            double sum = 0.0;
            const double* row = series.row(i) + k * window;
            for (std::size_t s = 0; s < window; ++s) sum += row[s];
            db.records[k * db.n_processes + i] = sum;
        }
    return db;
}

LossMatrix as_series(const ExtractedDatabase& db) {
    LossMatrix series(db.n_processes, db.n_records);
    series.labels = db.labels;
    for (std::size_t i = 0; i < db.n_processes; ++i)
        for (std::size_t k = 0; k < db.n_records; ++k) series.at(i, k) = db.at(k, i);
    return series;
}

void write_extracted_csv(const std::string& path, const ExtractedDatabase& db) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "window," << db.window << '\n';
    for (std::size_t i = 0; i < db.n_processes; ++i) {
        if (i) out << ',';
        out << db.labels[i];
    }
    out << '\n';
    for (std::size_t k = 0; k < db.n_records; ++k) {
        for (std::size_t i = 0; i < db.n_processes; ++i) {
            if (i) out << ',';
            out << format_double(db.at(k, i));
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("failed writing " + path);
}

ExtractedDatabase read_extracted_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty extracted file " + path);
    auto head = split(line, ',');
    if (head.size() != 2 || head[0] != "window")
        throw std::runtime_error("expected 'window,<T>' header in " + path);
    const long w = std::stol(head[1]);
    if (w < 1) throw std::runtime_error("invalid window in " + path);
    if (!std::getline(in, line)) throw std::runtime_error("missing label row in " + path);
    ExtractedDatabase db;
    db.window = static_cast<std::size_t>(w);
    db.labels = split(line, ',');
    db.n_processes = db.labels.size();
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto tokens = split(line, ',');
        if (tokens.size() != db.n_processes)
            throw std::runtime_error("record width mismatch in " + path);
        for (const auto& tok : tokens) db.records.push_back(parse_double(tok, path));
        ++db.n_records;
    }
    if (db.n_records == 0) throw std::runtime_error("no records in " + path);
    for (double v : db.records)
        if (!(v >= 0.0)) throw std::runtime_error("negative aggregate in " + path);
    return db;
}

}  // namespace varbn
