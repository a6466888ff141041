#include "bandtaper/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace bandtaper::csv {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  std::stringstream ss(line);
  while (std::getline(ss, cur, ',')) cells.push_back(trim(cur));
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

}  // namespace

std::vector<std::vector<std::string>> read_rows(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open file: " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    rows.push_back(split_line(line));
  }
  return rows;
}

Eigen::MatrixXd read_matrix(const std::string& path,
                            std::vector<std::string>* header) {
  const auto rows = read_rows(path);
  if (rows.size() < 2) {
    throw InputError("CSV " + path + ": need a header row and at least one data row");
  }
  if (header) *header = rows[0];
  const std::size_t cols = rows[0].size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size() - 1),
                    static_cast<Eigen::Index>(cols));
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != cols) {
      throw InputError("CSV " + path + ": row " + std::to_string(r + 1) +
                       " has " + std::to_string(rows[r].size()) +
                       " cells, header has " + std::to_string(cols));
    }
    for (std::size_t c = 0; c < cols; ++c) {
      const std::string& cell = rows[r][c];
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (cell.empty() || end != cell.c_str() + cell.size() ||
          !std::isfinite(v)) {
        throw InputError("CSV " + path + ": cell (" + std::to_string(r + 1) +
                         "," + std::to_string(c + 1) + ") is not numeric: '" +
                         cell + "'");
      }
      m(static_cast<Eigen::Index>(r - 1), static_cast<Eigen::Index>(c)) = v;
    }
  }
  return m;
}

std::string format_double(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
  return buf;
}

void write_matrix(const std::string& path, const Eigen::MatrixXd& m,
                  const std::vector<std::string>& header, int precision) {
  if (header.size() != static_cast<std::size_t>(m.cols())) {
    throw InputError("write_matrix: header size != column count");
  }
  std::ofstream out(path);
  if (!out) throw InputError("cannot write file: " + path);
  for (std::size_t c = 0; c < header.size(); ++c) {
    out << (c ? "," : "") << header[c];
  }
  out << "\n";
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      out << (c ? "," : "") << format_double(m(r, c), precision);
    }
    out << "\n";
  }
  if (!out) throw InputError("write failed: " + path);
}

}  // namespace bandtaper::csv
