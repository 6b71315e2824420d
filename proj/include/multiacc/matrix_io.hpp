#ifndef MULTIACC_MATRIX_IO_HPP
#define MULTIACC_MATRIX_IO_HPP

#include <string>
#include <string_view>

#include <eigen3/Eigen/Dense>

namespace multiacc {

// Parses a square matrix from either JSON (array of row arrays, or an object
// {"entries": [[...]]}) or a plain whitespace grid with one row per line.
// The format is sniffed from the first non-space character.
Eigen::MatrixXd parse_matrix(std::string_view text);

Eigen::MatrixXd load_matrix(const std::string& path);

std::string read_file(const std::string& path);

}  // namespace multiacc

#endif
