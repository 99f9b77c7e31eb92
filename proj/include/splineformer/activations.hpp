// Copyright 2026 The Splineformer Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "splineformer/errors.hpp"
#include "splineformer/matrix.hpp"
#include "splineformer/rational.hpp"

namespace splineformer {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Scores whose strictly-lower triangle is logically -inf. The rational
/// backend cannot hold -inf, so the mask travels as structure and the
/// activation consumes it.
template <class T>
struct MaskedScores {
  Matrix<T> scores;
};

template <class T>
Matrix<T> relu(const Matrix<T>& m) {
  Matrix<T> out = m;
  for (auto& v : out.data()) {
    if (v < 0) v = T(0);
  }
  return out;
}

/// ReLU of the masked scores: masked entries become exactly zero.
template <class T>
Matrix<T> relu(const MaskedScores<T>& masked) {
  Matrix<T> out = relu(masked.scores);
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = 0; j < i && j < out.cols(); ++j) out(i, j) = T(0);
  return out;
}

/// Float backends: strictly-lower-triangular entries become -inf.
template <class T>
  requires is_float_backend_v<T>
Matrix<T> apply_mask(const Matrix<T>& m) {
  if (m.rows() != m.cols()) throw ShapeError("mask needs a square matrix, got " + m.shape());
  Matrix<T> out = m;
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = 0; j < i; ++j) out(i, j) = -std::numeric_limits<T>::infinity();
  return out;
}

/// Rational backend: the mask is carried structurally.
inline MaskedScores<Rational> apply_mask(const Matrix<Rational>& m) {
  if (m.rows() != m.cols()) throw ShapeError("mask needs a square matrix, got " + m.shape());
  return MaskedScores<Rational>{m};
}

/// Columnwise SoftMax with max subtraction; -inf entries map to exactly 0 and
/// do not enter the normalizing sum.
template <class T>
Matrix<T> softmax_columns(const Matrix<T>& m) {
  if constexpr (!is_float_backend_v<T>) {
    throw BackendError(std::string("softmax is unavailable on the ") + scalar_traits<T>::name +
                       " backend");
  } else {
    Matrix<T> out(m.rows(), m.cols());
    for (std::size_t j = 0; j < m.cols(); ++j) {
      using std::exp;
      using std::isinf;
      T top = -std::numeric_limits<T>::infinity();
      for (std::size_t i = 0; i < m.rows(); ++i) top = std::max(top, m(i, j));
      if (isinf(top) && top < 0) {
        throw DegenerateColumnError("softmax column " + std::to_string(j) + " is entirely -inf");
      }
      T sum = 0;
      for (std::size_t i = 0; i < m.rows(); ++i) {
        const T v = m(i, j);
        const T e = (isinf(v) && v < 0) ? T(0) : T(exp(v - top));
        out(i, j) = e;
        sum += e;
      }
      for (std::size_t i = 0; i < m.rows(); ++i) out(i, j) /= sum;
    }
    return out;
  }
}

/// log(1 + exp(beta x)) / beta, evaluated without overflow.
template <class T>
  requires is_float_backend_v<T>
T softplus_beta(const T& x, double beta) {
  using std::exp;
  using std::isinf;
  using std::log;
  if (!(beta > 0)) throw ContractError("softplus beta must be positive");
  if (isinf(x)) return x < 0 ? T(0) : x;
  const T z = x * beta;
  const T tail = exp(z > 0 ? T(-z) : z);
  T soft;
  if constexpr (std::is_same_v<T, double>) {
    soft = std::log1p(tail);
  } else {
    soft = log(T(1) + tail);
  }
  soft /= beta;
  return z > 0 ? T(x + soft) : soft;
}

template <class T>
Matrix<T> softplus_beta(const Matrix<T>& m, double beta) {
  if constexpr (!is_float_backend_v<T>) {
    throw BackendError(std::string("softplus is unavailable on the ") + scalar_traits<T>::name +
                       " backend");
  } else {
    if (!(beta > 0)) throw ContractError("softplus beta must be positive");
    Matrix<T> out = m;
    for (auto& v : out.data()) v = softplus_beta<T>(v, beta);
    return out;
  }
}

}  // namespace splineformer
