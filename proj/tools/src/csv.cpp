#include "tshrink_cli/csv.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>

#include "tshrink/error.hpp"

namespace tshrink::cli {
namespace {

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    cells.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::string unquote(std::string_view s) {
  s = trim(s);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return std::string(s);
}

double parse_cell(std::string_view cell, std::size_t line_no, std::size_t column) {
  cell = trim(cell);
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty()) {
    throw InputError("csv line " + std::to_string(line_no) + ", column " + std::to_string(column + 1) +
                     ": not a number: '" + std::string(cell) + "'");
  }
  return value;
}

}  // namespace

CsvData read_regression_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) break;
  }
  if (trim(line).empty()) throw InputError("csv: empty input");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

  const auto header = split(line);
  if (header.size() < 2) throw InputError("csv: need a response column and at least one predictor");
  if (unquote(header[0]) != "y") throw InputError("csv: first header cell must be 'y'");
  CsvData out;
  for (std::size_t c = 1; c < header.size(); ++c) out.predictors.push_back(unquote(header[c]));

  const std::size_t width = header.size();
  std::vector<double> values;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    if (cells.size() != width) {
      throw InputError("csv line " + std::to_string(line_no) + ": expected " + std::to_string(width) +
                       " cells, found " + std::to_string(cells.size()));
    }
    for (std::size_t c = 0; c < width; ++c) values.push_back(parse_cell(cells[c], line_no, c));
    ++rows;
  }
  if (rows == 0) throw InputError("csv: no data rows");

  const auto n = static_cast<Index>(rows);
  const auto p = static_cast<Index>(width - 1);
  out.X.resize(n, p);
  out.Y.resize(n);
  for (Index i = 0; i < n; ++i) {
    const std::size_t row = static_cast<std::size_t>(i) * width;
    out.Y[i] = values[row];
    for (Index j = 0; j < p; ++j) out.X(i, j) = values[row + 1 + static_cast<std::size_t>(j)];
  }
  return out;
}

CsvData read_regression_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open input file '" + path + "'");
  return read_regression_csv(in);
}

std::string format_double(double value) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (ec != std::errc()) throw InputError("format_double: conversion failed");
  return std::string(buffer, ptr);
}

void write_regression_csv(std::ostream& out, const MatrixXd& X, const VectorXd& Y) {
  out << 'y';
  for (Index j = 0; j < X.cols(); ++j) out << ",x" << (j + 1);
  out << '\n';
  for (Index i = 0; i < X.rows(); ++i) {
    out << format_double(Y[i]);
    for (Index j = 0; j < X.cols(); ++j) out << ',' << format_double(X(i, j));
    out << '\n';
  }
}

}  // namespace tshrink::cli
