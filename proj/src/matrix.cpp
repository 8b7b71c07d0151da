#include "multimodn/matrix.hpp"

#include <cmath>
#include <string>

#include "multimodn/errors.hpp"

namespace mmn {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows_ * cols_) {
    throw ShapeError("matrix init: " + std::to_string(values_.size()) +
                     " values for shape " + std::to_string(rows_) + "x" +
                     std::to_string(cols_));
  }
}

std::vector<double> Matrix::matvec(std::span<const double> x) const {
  if (x.size() != cols_) {
    throw ShapeError("matvec: input length " + std::to_string(x.size()) +
                     " vs matrix " + std::to_string(rows_) + "x" +
                     std::to_string(cols_));
  }
  std::vector<double> y(rows_, 0.0);
  for (std::size_t r = 0; r < rows_; ++r) {
    const double* row = values_.data() + r * cols_;
    double acc = 0.0;
    for (std::size_t c = 0; c < cols_; ++c) acc += row[c] * x[c];
    y[r] = acc;
  }
  return y;
}

std::vector<double> Matrix::matvec_transposed(std::span<const double> x) const {
  if (x.size() != rows_) {
    throw ShapeError("matvec_transposed: input length " +
                     std::to_string(x.size()) + " vs matrix " +
                     std::to_string(rows_) + "x" + std::to_string(cols_));
  }
  std::vector<double> y(cols_, 0.0);
  for (std::size_t r = 0; r < rows_; ++r) {
    const double* row = values_.data() + r * cols_;
    const double xr = x[r];
    for (std::size_t c = 0; c < cols_; ++c) y[c] += row[c] * xr;
  }
  return y;
}

void Matrix::add_outer(std::span<const double> a, std::span<const double> b,
                       double scale) {
  if (a.size() != rows_ || b.size() != cols_) {
    throw ShapeError("add_outer: vectors " + std::to_string(a.size()) + "," +
                     std::to_string(b.size()) + " vs matrix " +
                     std::to_string(rows_) + "x" + std::to_string(cols_));
  }
  for (std::size_t r = 0; r < rows_; ++r) {
    double* row = values_.data() + r * cols_;
    const double ar = scale * a[r];
    for (std::size_t c = 0; c < cols_; ++c) row[c] += ar * b[c];
  }
}

bool Matrix::all_finite() const { return mmn::all_finite(values_); }

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ShapeError("dot: lengths " + std::to_string(a.size()) + " vs " +
                     std::to_string(b.size()));
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double l2_norm_squared(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return acc;
}

bool all_finite(std::span<const double> v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace mmn
