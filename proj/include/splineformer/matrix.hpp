// Copyright 2026 The Splineformer Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "splineformer/errors.hpp"
#include "splineformer/rational.hpp"

namespace splineformer {

/// Dense row-major matrix over one scalar backend. A vector in R^n is an
/// n x 1 matrix.
template <class T>
class Matrix {
 public:
  using value_type = T;

  /// Empty placeholder; every constructed matrix has positive extents.
  Matrix() = default;

  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {
    if (rows == 0 || cols == 0) {
      throw ShapeError("matrix extents must be positive, got " + shape_string(rows, cols));
    }
  }

  Matrix(std::size_t rows, std::size_t cols, std::vector<T> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (rows == 0 || cols == 0) {
      throw ShapeError("matrix extents must be positive, got " + shape_string(rows, cols));
    }
    if (data_.size() != rows * cols) {
      throw ShapeError("matrix of shape " + shape_string(rows, cols) + " given " +
                       std::to_string(data_.size()) + " entries");
    }
  }

  Matrix(std::initializer_list<std::initializer_list<T>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    if (rows_ == 0 || cols_ == 0) throw ShapeError("matrix literal must be nonempty");
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      if (r.size() != cols_) throw ShapeError("ragged matrix literal");
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  static Matrix zeros(std::size_t rows, std::size_t cols) { return Matrix(rows, cols); }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
    return m;
  }

  /// Standard basis matrix E_{ij} (zero-based indices).
  static Matrix basis(std::size_t rows, std::size_t cols, std::size_t i, std::size_t j) {
    Matrix m(rows, cols);
    if (i >= rows || j >= cols) {
      throw ShapeError("basis index (" + std::to_string(i) + "," + std::to_string(j) +
                       ") outside " + shape_string(rows, cols));
    }
    m(i, j) = T(1);
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<const T> data() const { return data_; }
  std::span<T> data() { return data_; }

  std::span<const T> row_span(std::size_t i) const {
    return std::span<const T>(data_).subspan(i * cols_, cols_);
  }

  Matrix column(std::size_t j) const {
    Matrix c(rows_, 1);
    for (std::size_t i = 0; i < rows_; ++i) c(i, 0) = (*this)(i, j);
    return c;
  }

  Matrix transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  std::string shape() const { return shape_string(rows_, cols_); }

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

  static std::string shape_string(std::size_t r, std::size_t c) {
    return std::to_string(r) + "x" + std::to_string(c);
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

template <class T>
Matrix<T> matmul(const Matrix<T>& a, const Matrix<T>& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul shape mismatch: " + a.shape() + " * " + b.shape());
  }
  Matrix<T> c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const T& aik = a(i, k);
      if (is_zero(aik)) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) {
        if (is_zero(b(k, j))) continue;
        c(i, j) += aik * b(k, j);
      }
    }
  }
  return c;
}

template <class T>
Matrix<T> add(const Matrix<T>& a, const Matrix<T>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError("add shape mismatch: " + a.shape() + " + " + b.shape());
  }
  Matrix<T> c = a;
  auto out = c.data();
  auto rhs = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += rhs[i];
  return c;
}

template <class T>
Matrix<T> subtract(const Matrix<T>& a, const Matrix<T>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError("subtract shape mismatch: " + a.shape() + " - " + b.shape());
  }
  Matrix<T> c = a;
  auto out = c.data();
  auto rhs = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= rhs[i];
  return c;
}

template <class T>
Matrix<T> scale(const Matrix<T>& a, const T& s) {
  Matrix<T> c = a;
  for (auto& v : c.data()) v *= s;
  return c;
}

/// Adds the column vector `bias` (rows x 1) to every column of `a`.
template <class T>
Matrix<T> add_column_broadcast(const Matrix<T>& a, const Matrix<T>& bias) {
  if (bias.cols() != 1 || bias.rows() != a.rows()) {
    throw ShapeError("bias " + bias.shape() + " does not broadcast over " + a.shape());
  }
  Matrix<T> c = a;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    if (is_zero(bias(i, 0))) continue;
    for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) += bias(i, 0);
  }
  return c;
}

/// Vertical stacking (X_1, ..., X_k): block order preserved.
template <class T>
Matrix<T> stack_rows(std::span<const Matrix<T>> parts) {
  if (parts.empty()) throw ShapeError("stack_rows of an empty list");
  const std::size_t cols = parts.front().cols();
  std::size_t rows = 0;
  for (const auto& m : parts) {
    if (m.cols() != cols) {
      throw ShapeError("stack_rows column mismatch: " + parts.front().shape() + " vs " + m.shape());
    }
    rows += m.rows();
  }
  std::vector<T> data;
  data.reserve(rows * cols);
  for (const auto& m : parts) data.insert(data.end(), m.data().begin(), m.data().end());
  return Matrix<T>(rows, cols, std::move(data));
}

template <class T>
Matrix<T> stack_rows(const std::vector<Matrix<T>>& parts) {
  return stack_rows(std::span<const Matrix<T>>(parts));
}

/// Rows [begin, begin + count) of `a`.
template <class T>
Matrix<T> row_block(const Matrix<T>& a, std::size_t begin, std::size_t count) {
  if (begin + count > a.rows() || count == 0) {
    throw ShapeError("row block [" + std::to_string(begin) + "," + std::to_string(begin + count) +
                     ") outside " + a.shape());
  }
  std::vector<T> data(a.data().begin() + begin * a.cols(),
                      a.data().begin() + (begin + count) * a.cols());
  return Matrix<T>(count, a.cols(), std::move(data));
}

template <class U, class T>
Matrix<U> matrix_cast(const Matrix<T>& a) {
  if constexpr (std::is_same_v<U, T>) {
    return a;
  } else {
    std::vector<U> data;
    data.reserve(a.data().size());
    for (const auto& v : a.data()) {
      if constexpr (std::is_same_v<T, Rational>) {
        data.push_back(scalar_traits<U>::from_rational(v));
      } else if constexpr (std::is_same_v<U, Rational>) {
        data.push_back(rational_from_double(static_cast<double>(v)));
      } else {
        data.push_back(static_cast<U>(v));
      }
    }
    return Matrix<U>(a.rows(), a.cols(), std::move(data));
  }
}

}  // namespace splineformer
