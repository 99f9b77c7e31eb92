// Copyright 2026 The Splineformer Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "splineformer/compiler/heads.hpp"
#include "splineformer/encoder.hpp"
#include "splineformer/errors.hpp"
#include "splineformer/ffn.hpp"

namespace splineformer {

/// Encoder block (alpha, phi o psi) computing the one-hidden-layer net `phi`
/// columnwise on n x p inputs. alpha stacks the np copy heads that move x_{ij}
/// into its own row (row j*n + i) of column j; psi sums those rows back, so the
/// first layer of phi o psi is [A_1 A_1 ... A_1].
inline EncoderBlock<Rational> ffn_block_form(const FeedForwardNet<Rational>& phi, std::size_t n, std::size_t p,
                                             bool masked = false) {
  check_ffn(phi);
  if (phi.hidden_layers() != 1) {
    throw ContractError("ffn_block_form needs exactly one hidden layer, got " +
                        std::to_string(phi.hidden_layers()) + "; split the network first");
  }
  if (phi.input_dim() != n) {
    throw ShapeError("network expects " + std::to_string(phi.input_dim()) + " inputs, block has n = " +
                     std::to_string(n));
  }
  EncoderBlock<Rational> block;
  for (std::size_t j = 0; j < p; ++j)
    for (std::size_t i = 0; i < n; ++i) block.attention.heads.push_back(build_copy_head(i, j, j, n, p, masked));

  const auto& first = phi.layers.front();
  Matrix<Rational> wide(first.weight.rows(), n * p);
  for (std::size_t r = 0; r < first.weight.rows(); ++r)
    for (std::size_t j = 0; j < p; ++j)
      for (std::size_t i = 0; i < n; ++i) wide(r, j * n + i) = first.weight(r, i);
  block.ffn.layers = {{wide, first.bias}, phi.layers.back()};
  return block;
}

/// Splits W_{k+1} relu(W_k ... relu(W_1 x)) into k one-hidden-layer nets
/// relu-chained: the first k-1 pieces end in the identity on their hidden
/// layer, the last carries W_{k+1}.
inline std::vector<FeedForwardNet<Rational>> split_hidden_layers(const FeedForwardNet<Rational>& net) {
  check_ffn(net);
  if (net.hidden_layers() == 0) throw ContractError("affine network has no hidden layer to split");
  std::vector<FeedForwardNet<Rational>> pieces;
  for (std::size_t k = 0; k + 1 < net.layers.size(); ++k) {
    FeedForwardNet<Rational> piece;
    piece.layers.push_back(net.layers[k]);
    if (k + 2 == net.layers.size()) {
      piece.layers.push_back(net.layers.back());
    } else {
      const std::size_t width = net.layers[k].weight.rows();
      piece.layers.push_back({Matrix<Rational>::identity(width), Matrix<Rational>(width, 1)});
    }
    pieces.push_back(std::move(piece));
  }
  return pieces;
}

}  // namespace splineformer
