#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mmn {

/// Dense row-major matrix of doubles. Weight storage for the dense layers.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), values_(rows * cols, 0.0) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return values_.size(); }

  double& operator()(std::size_t r, std::size_t c) {
    return values_[r * cols_ + c];
  }
  double operator()(std::size_t r, std::size_t c) const {
    return values_[r * cols_ + c];
  }

  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  /// y = A x. Requires x.size() == cols.
  std::vector<double> matvec(std::span<const double> x) const;

  /// y = A^T x. Requires x.size() == rows.
  std::vector<double> matvec_transposed(std::span<const double> x) const;

  /// this += scale * (a b^T). Requires a.size() == rows, b.size() == cols.
  void add_outer(std::span<const double> a, std::span<const double> b,
                 double scale = 1.0);

  bool all_finite() const;

  bool operator==(const Matrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

double dot(std::span<const double> a, std::span<const double> b);
double l2_norm_squared(std::span<const double> v);
bool all_finite(std::span<const double> v);

}  // namespace mmn
