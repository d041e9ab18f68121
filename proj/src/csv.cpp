#include "varbn/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace varbn {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& token, const std::string& context) {
    try {
        std::size_t pos = 0;
        double v = std::stod(token, &pos);
        if (pos != token.size()) throw std::invalid_argument(token);
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("cannot parse number '" + token + "' in " + context);
    }
}

void write_series_csv(const std::string& path, const LossMatrix& series) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    for (std::size_t i = 0; i < series.n_processes; ++i) {
        if (i) out << ',';
        out << series.labels[i];
    }
    out << '\n';
    for (std::size_t s = 0; s < series.n_steps; ++s) {
        for (std::size_t i = 0; i < series.n_processes; ++i) {
            if (i) out << ',';
            out << format_double(series.at(i, s));
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("failed writing " + path);
}

LossMatrix read_series_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty series file " + path);
    auto labels = split(line, ',');
    const std::size_t n = labels.size();
    std::vector<double> columns;
    std::size_t steps = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto tokens = split(line, ',');
        if (tokens.size() != n)
            throw std::runtime_error("row width mismatch in " + path);
        for (const auto& tok : tokens) columns.push_back(parse_double(tok, path));
        ++steps;
    }
    LossMatrix series(n, steps);
    series.labels = labels;
    for (std::size_t s = 0; s < steps; ++s)
        for (std::size_t i = 0; i < n; ++i) series.at(i, s) = columns[s * n + i];
    series.validate();
    return series;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace varbn
