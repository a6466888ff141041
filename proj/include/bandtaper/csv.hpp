#pragma once

#include "bandtaper/types.hpp"

#include <string>
#include <vector>

namespace bandtaper::csv {

/// Raw cells of a CSV file (comma separated, no quoting, whitespace trimmed).
std::vector<std::vector<std::string>> read_rows(const std::string& path);

/// Numeric CSV with one header row -> matrix. Ragged rows or non-numeric
/// cells raise InputError naming the offending position.
Eigen::MatrixXd read_matrix(const std::string& path,
                            std::vector<std::string>* header = nullptr);

/// Writes a matrix with a header row; precision in significant digits.
void write_matrix(const std::string& path, const Eigen::MatrixXd& m,
                  const std::vector<std::string>& header, int precision = 17);

std::string format_double(double v, int precision);

}  // namespace bandtaper::csv
