#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"

namespace eg {

// Dense row-major matrix of doubles. Feature maps are matrices with one row
// per point.
struct Matrix {
  std::size_t rows = 0, cols = 0;
  std::vector<double> v;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), v(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return v[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return v[r * cols + c]; }

  std::span<double> row(std::size_t r) { return {v.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const { return {v.data() + r * cols, cols}; }

  std::size_t size() const { return v.size(); }
  bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }

  bool operator==(const Matrix&) const = default;
};

inline bool is_finite(const Matrix& m) {
  for (double x : m.v)
    if (!std::isfinite(x)) return false;
  return true;
}

// a [n,k] * b [k,m] -> [n,m]. ikj loop order keeps the inner loop contiguous.
inline Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols != b.rows)
    throw invalid_argument("matmul: inner dimensions mismatch (" + std::to_string(a.cols) +
                           " vs " + std::to_string(b.rows) + ")");
  Matrix out(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    double* out_row = out.v.data() + i * out.cols;
    const double* a_row = a.v.data() + i * a.cols;
    for (std::size_t k = 0; k < a.cols; ++k) {
      const double aik = a_row[k];
      const double* b_row = b.v.data() + k * b.cols;
      for (std::size_t j = 0; j < b.cols; ++j) out_row[j] += aik * b_row[j];
    }
  }
  return out;
}

inline Matrix transpose(const Matrix& a) {
  Matrix out(a.cols, a.rows);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < a.cols; ++j) out(j, i) = a(i, j);
  return out;
}

}  // namespace eg
