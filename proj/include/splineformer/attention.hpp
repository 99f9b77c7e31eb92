// Copyright 2026 The Splineformer Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "splineformer/activations.hpp"
#include "splineformer/errors.hpp"
#include "splineformer/matrix.hpp"

namespace splineformer {

enum class ActivationKind { relu, softmax, softplus };

struct Activation {
  ActivationKind kind = ActivationKind::relu;
  double beta = 1.0;  // softplus sharpness; ignored otherwise

  static Activation relu() { return {ActivationKind::relu, 1.0}; }
  static Activation softmax() { return {ActivationKind::softmax, 1.0}; }
  static Activation softplus(double beta) { return {ActivationKind::softplus, beta}; }

  friend bool operator==(const Activation& a, const Activation& b) {
    if (a.kind != b.kind) return false;
    return a.kind != ActivationKind::softplus || a.beta == b.beta;
  }
};

inline std::string to_string(const Activation& a) {
  switch (a.kind) {
    case ActivationKind::relu:
      return "relu";
    case ActivationKind::softmax:
      return "softmax";
    case ActivationKind::softplus:
      return "softplus";
  }
  return "relu";
}

/// One attention head with affine query/key/value layers:
///   Q(Y) = Wq Y + Bq,  K(X) = Wk X + Bk,  V(X) = Wv X + Bv,
///   out  = V(X) act(K(X)^T Q(Y)).
/// Self-attention uses Y = X.
template <class T>
struct AttentionHead {
  Matrix<T> query_weight;  // d x n_q
  Matrix<T> query_bias;    // d x p
  Matrix<T> key_weight;    // d x n
  Matrix<T> key_bias;      // d x p
  Matrix<T> value_weight;  // m x n
  Matrix<T> value_bias;    // m x p
  Activation activation{};
  bool masked = false;
  /// Divide scores by sqrt(d). Off unless asked for.
  bool scaled = false;

  std::size_t key_dim() const { return key_weight.rows(); }
  std::size_t input_rows() const { return key_weight.cols(); }
  std::size_t query_rows() const { return query_weight.cols(); }
  std::size_t output_rows() const { return value_weight.rows(); }
  std::size_t columns() const { return value_bias.cols(); }
};

template <class T>
void check_head(const AttentionHead<T>& h) {
  auto fail = [&](const std::string& what) {
    throw ShapeError("attention head: " + what + " (Wq " + h.query_weight.shape() + ", Bq " +
                     h.query_bias.shape() + ", Wk " + h.key_weight.shape() + ", Bk " +
                     h.key_bias.shape() + ", Wv " + h.value_weight.shape() + ", Bv " +
                     h.value_bias.shape() + ")");
  };
  if (h.query_weight.empty() || h.key_weight.empty() || h.value_weight.empty()) {
    fail("missing parameter matrix");
  }
  if (h.query_weight.rows() != h.key_weight.rows() || h.query_bias.rows() != h.key_dim() ||
      h.key_bias.rows() != h.key_dim()) {
    fail("query and key disagree on d");
  }
  if (h.value_weight.rows() != h.value_bias.rows()) fail("value weight and bias disagree on m");
  if (h.query_bias.cols() != h.key_bias.cols() || h.key_bias.cols() != h.value_bias.cols()) {
    fail("biases disagree on p");
  }
  if (h.key_weight.cols() != h.value_weight.cols()) fail("key and value disagree on n");
}

/// act(scores), honouring the head's mask.
template <class T>
Matrix<T> activate_scores(const Matrix<T>& scores, const Activation& act, bool masked) {
  switch (act.kind) {
    case ActivationKind::relu:
      return masked ? relu(apply_mask(scores)) : relu(scores);
    case ActivationKind::softmax:
      if constexpr (is_float_backend_v<T>) {
        return masked ? softmax_columns(apply_mask(scores)) : softmax_columns(scores);
      } else {
        throw BackendError("softmax attention needs the float backend");
      }
    case ActivationKind::softplus:
      if constexpr (is_float_backend_v<T>) {
        return masked ? softplus_beta(apply_mask(scores), act.beta)
                      : softplus_beta(scores, act.beta);
      } else {
        throw BackendError("softplus attention needs the float backend");
      }
  }
  throw BackendError("unknown activation");
}

/// K(X)^T Q(Y), the p x p score matrix before activation.
template <class T>
Matrix<T> attention_scores(const AttentionHead<T>& h, const Matrix<T>& x, const Matrix<T>& y) {
  check_head(h);
  if (x.rows() != h.input_rows() || x.cols() != h.columns()) {
    throw ShapeError("attention keys/values expect " + Matrix<T>::shape_string(h.input_rows(), h.columns()) +
                     " input, got " + x.shape());
  }
  if (y.rows() != h.query_rows() || y.cols() != h.columns()) {
    throw ShapeError("attention queries expect " + Matrix<T>::shape_string(h.query_rows(), h.columns()) +
                     " input, got " + y.shape());
  }
  const Matrix<T> q = add(matmul(h.query_weight, y), h.query_bias);
  const Matrix<T> k = add(matmul(h.key_weight, x), h.key_bias);
  Matrix<T> s = matmul(k.transpose(), q);
  if (h.scaled) {
    if constexpr (is_float_backend_v<T>) {
      using std::sqrt;
      s = scale(s, T(T(1) / sqrt(T(h.key_dim()))));
    } else {
      const auto d = static_cast<unsigned long>(h.key_dim());
      const auto root = static_cast<unsigned long>(std::llround(std::sqrt(double(d))));
      if (root * root != d) throw BackendError("1/sqrt(d) scaling is irrational for d = " + std::to_string(d));
      s = scale(s, T(1, root));
    }
  }
  return s;
}

/// act(K(X)^T Q(Y)); for SoftMax heads every column is a probability vector.
template <class T>
Matrix<T> attention_weights(const AttentionHead<T>& h, const Matrix<T>& x, const Matrix<T>& y) {
  return activate_scores(attention_scores(h, x, y), h.activation, h.masked);
}

/// Encoder-decoder attention: keys and values from `x`, queries from `y`.
template <class T>
Matrix<T> eval_encdec_attention(const AttentionHead<T>& h, const Matrix<T>& x, const Matrix<T>& y) {
  const Matrix<T> w = attention_weights(h, x, y);
  const Matrix<T> v = add(matmul(h.value_weight, x), h.value_bias);
  return matmul(v, w);
}

template <class T>
Matrix<T> eval_attention(const AttentionHead<T>& h, const Matrix<T>& x) {
  return eval_encdec_attention(h, x, x);
}

/// h heads stacked vertically; all heads share n, p and m.
template <class T>
struct MultiheadAttention {
  std::vector<AttentionHead<T>> heads;

  std::size_t output_rows() const {
    std::size_t rows = 0;
    for (const auto& h : heads) rows += h.output_rows();
    return rows;
  }
  std::size_t input_rows() const { return heads.empty() ? 0 : heads.front().input_rows(); }
  std::size_t query_rows() const { return heads.empty() ? 0 : heads.front().query_rows(); }
  std::size_t columns() const { return heads.empty() ? 0 : heads.front().columns(); }
};

template <class T>
void check_multihead(const MultiheadAttention<T>& mh) {
  if (mh.heads.empty()) throw ShapeError("multihead attention needs at least one head");
  const auto& first = mh.heads.front();
  for (std::size_t i = 0; i < mh.heads.size(); ++i) {
    const auto& h = mh.heads[i];
    check_head(h);
    if (h.input_rows() != first.input_rows() || h.query_rows() != first.query_rows() ||
        h.columns() != first.columns() || h.output_rows() != first.output_rows()) {
      throw ShapeError("head " + std::to_string(i) + " disagrees with head 0 on n, p or m");
    }
  }
}

template <class T>
Matrix<T> eval_encdec_multihead(const MultiheadAttention<T>& mh, const Matrix<T>& x,
                                const Matrix<T>& y) {
  check_multihead(mh);
  std::vector<Matrix<T>> parts;
  parts.reserve(mh.heads.size());
  for (const auto& h : mh.heads) parts.push_back(eval_encdec_attention(h, x, y));
  return stack_rows(parts);
}

template <class T>
Matrix<T> eval_multihead(const MultiheadAttention<T>& mh, const Matrix<T>& x) {
  return eval_encdec_multihead(mh, x, x);
}

template <class U, class T>
AttentionHead<U> head_cast(const AttentionHead<T>& h) {
  return AttentionHead<U>{matrix_cast<U>(h.query_weight), matrix_cast<U>(h.query_bias),
                          matrix_cast<U>(h.key_weight),   matrix_cast<U>(h.key_bias),
                          matrix_cast<U>(h.value_weight), matrix_cast<U>(h.value_bias),
                          h.activation,                   h.masked,
                          h.scaled};
}

template <class U, class T>
MultiheadAttention<U> multihead_cast(const MultiheadAttention<T>& mh) {
  MultiheadAttention<U> out;
  out.heads.reserve(mh.heads.size());
  for (const auto& h : mh.heads) out.heads.push_back(head_cast<U>(h));
  return out;
}

}  // namespace splineformer
