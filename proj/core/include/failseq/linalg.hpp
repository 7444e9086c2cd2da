// SPDX-License-Identifier: Apache-2.0
/**
 * @file   linalg.hpp
 * @brief  Dense row-major matrices, activations and dropout masks.
 *
 * Everything is double precision. Shape violations throw ShapeError with
 * both shapes in the message.
 */
#ifndef FAILSEQ_LINALG_HPP
#define FAILSEQ_LINALG_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "failseq/rng.hpp"

namespace failseq {

using Vector = std::vector<double>;

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  std::string shape_string() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Returns W x + b.
Vector affine(const Matrix& w, std::span<const double> x, std::span<const double> b);

/// out += W x, without allocation. Shapes are the caller's responsibility.
inline void gemv_accumulate(const Matrix& w, std::span<const double> x, std::span<double> out) {
  const std::size_t cols = w.cols();
  const double* p = w.data().data();
  for (std::size_t r = 0; r < w.rows(); ++r, p += cols) {
    double acc = 0.0;
    for (std::size_t c = 0; c < cols; ++c) acc += p[c] * x[c];
    out[r] += acc;
  }
}

inline double sigmoid(double x) {
  // Branch keeps exp() from overflowing for large |x|.
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Vector sigmoid(std::span<const double> v);
Vector tanh(std::span<const double> v);

/// Inverted-dropout mask: each entry is 0 with probability `rate`, otherwise
/// 1 / (1 - rate). Requires 0 <= rate < 1.
Vector dropout_mask(std::size_t len, double rate, Rng& rng);

double dot(std::span<const double> a, std::span<const double> b);

bool all_finite(std::span<const double> v);

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
/// Throws std::domain_error if a non-positive pivot is met.
Matrix cholesky(const Matrix& a);

/// Solves L y = b (forward substitution).
Vector solve_lower(const Matrix& l, std::span<const double> b);

/// Solves L^T x = y (back substitution with the transpose of L).
Vector solve_lower_transpose(const Matrix& l, std::span<const double> y);

}  // namespace failseq

#endif  // FAILSEQ_LINALG_HPP
