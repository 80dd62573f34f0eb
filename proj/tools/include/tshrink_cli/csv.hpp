#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "tshrink/model.hpp"

namespace tshrink::cli {

/// Response in the first column (header must name it `y`), predictors after.
struct CsvData {
  std::vector<std::string> predictors;
  MatrixXd X;
  VectorXd Y;
};

/// Throws InputError with the line number on malformed rows, ragged rows,
/// non-numeric cells or a missing/foreign header.
CsvData read_regression_csv(std::istream& in);
CsvData read_regression_csv(const std::string& path);

/// Shortest decimal form that reads back to the same double.
std::string format_double(double value);

void write_regression_csv(std::ostream& out, const MatrixXd& X, const VectorXd& Y);

}  // namespace tshrink::cli
