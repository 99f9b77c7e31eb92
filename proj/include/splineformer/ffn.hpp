// Copyright 2026 The Splineformer Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "splineformer/activations.hpp"
#include "splineformer/matrix.hpp"

namespace splineformer {

template <class T>
struct DenseLayer {
  Matrix<T> weight;  // out x in
  Matrix<T> bias;    // out x 1
};

/// ReLU network  x -> W_{l+1} relu(... relu(W_1 x + b_1) ...) + b_{l+1}.
/// The last layer is affine; every other layer is followed by ReLU. Applied
/// to a matrix it acts on each column independently.
template <class T>
struct FeedForwardNet {
  std::vector<DenseLayer<T>> layers;

  std::size_t input_dim() const { return layers.front().weight.cols(); }
  std::size_t output_dim() const { return layers.back().weight.rows(); }
  std::size_t hidden_layers() const { return layers.empty() ? 0 : layers.size() - 1; }
};

template <class T>
void check_ffn(const FeedForwardNet<T>& net) {
  if (net.layers.empty()) throw ShapeError("feed-forward net needs at least one layer");
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const auto& layer = net.layers[i];
    if (layer.bias.cols() != 1 || layer.bias.rows() != layer.weight.rows()) {
      throw ShapeError("layer " + std::to_string(i) + ": bias " + layer.bias.shape() +
                       " does not match weight " + layer.weight.shape());
    }
    if (i > 0 && layer.weight.cols() != net.layers[i - 1].weight.rows()) {
      throw ShapeError("layer " + std::to_string(i) + " expects " +
                       std::to_string(layer.weight.cols()) + " inputs, previous layer emits " +
                       std::to_string(net.layers[i - 1].weight.rows()));
    }
  }
}

template <class T>
Matrix<T> eval_ffn(const FeedForwardNet<T>& net, const Matrix<T>& x) {
  check_ffn(net);
  if (x.rows() != net.input_dim()) {
    throw ShapeError("feed-forward net expects " + std::to_string(net.input_dim()) +
                     " input rows, got " + x.shape());
  }
  Matrix<T> h = x;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    h = add_column_broadcast(matmul(net.layers[i].weight, h), net.layers[i].bias);
    if (i + 1 < net.layers.size()) h = relu(h);
  }
  return h;
}

/// x = relu(x) - relu(-x) as a one-hidden-layer net on R^n.
template <class T>
FeedForwardNet<T> identity_ffn(std::size_t n) {
  Matrix<T> up(2 * n, n);
  Matrix<T> down(n, 2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    up(i, i) = T(1);
    up(n + i, i) = T(-1);
    down(i, i) = T(1);
    down(i, n + i) = T(-1);
  }
  return FeedForwardNet<T>{{{up, Matrix<T>(2 * n, 1)}, {down, Matrix<T>(n, 1)}}};
}

template <class U, class T>
FeedForwardNet<U> ffn_cast(const FeedForwardNet<T>& net) {
  FeedForwardNet<U> out;
  out.layers.reserve(net.layers.size());
  for (const auto& l : net.layers) {
    out.layers.push_back({matrix_cast<U>(l.weight), matrix_cast<U>(l.bias)});
  }
  return out;
}

}  // namespace splineformer
