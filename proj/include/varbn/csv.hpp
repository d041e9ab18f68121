#pragma once

#include <string>
#include <vector>

#include "varbn/loss_matrix.hpp"

namespace varbn {

// Doubles are printed with max_digits10 precision so CSV round-trips are exact.
std::string format_double(double v);

std::vector<std::string> split(const std::string& line, char sep);
double parse_double(const std::string& token, const std::string& context);

void write_series_csv(const std::string& path, const LossMatrix& series);
LossMatrix read_series_csv(const std::string& path);

std::string read_file(const std::string& path);

}  // namespace varbn
