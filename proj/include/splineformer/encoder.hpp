// Copyright 2026 The Splineformer Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <vector>

#include "splineformer/attention.hpp"
#include "splineformer/ffn.hpp"

namespace splineformer {

/// phi o alpha, optionally with a residual connection X -> block(X) + X.
template <class T>
struct EncoderBlock {
  MultiheadAttention<T> attention;
  FeedForwardNet<T> ffn;
  bool residual = false;
};

template <class T>
bool is_masked_block(const EncoderBlock<T>& b) {
  for (const auto& h : b.attention.heads) {
    if (!h.masked) return false;
  }
  return !b.attention.heads.empty();
}

/// A block whose heads are all masked; converts to EncoderBlock after the
/// check.
template <class T>
EncoderBlock<T> make_decoder_block(MultiheadAttention<T> attention, FeedForwardNet<T> ffn,
                                   bool residual = false) {
  EncoderBlock<T> b{std::move(attention), std::move(ffn), residual};
  if (!is_masked_block(b)) throw ContractError("decoder block requires every head to be masked");
  return b;
}

template <class T>
using Encoder = std::vector<EncoderBlock<T>>;

template <class T>
Matrix<T> eval_block(const EncoderBlock<T>& block, const Matrix<T>& x) {
  const Matrix<T> a = eval_multihead(block.attention, x);
  if (a.rows() != block.ffn.input_dim()) {
    throw ShapeError("attention emits " + std::to_string(a.rows()) + " rows but the net expects " +
                     std::to_string(block.ffn.input_dim()));
  }
  Matrix<T> out = eval_ffn(block.ffn, a);
  if (block.residual) {
    if (out.rows() != x.rows()) {
      throw ShapeError("residual block maps " + x.shape() + " to " + out.shape());
    }
    out = add(out, x);
  }
  return out;
}

/// Blocks applied in order; an empty list is the identity.
template <class T>
Matrix<T> eval_encoder(std::span<const EncoderBlock<T>> blocks, const Matrix<T>& x) {
  Matrix<T> h = x;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    try {
      h = eval_block(blocks[i], h);
    } catch (const ShapeError& e) {
      throw ShapeError("encoder block " + std::to_string(i) + ": " + e.what());
    }
  }
  return h;
}

template <class T>
Matrix<T> eval_encoder(const Encoder<T>& blocks, const Matrix<T>& x) {
  return eval_encoder(std::span<const EncoderBlock<T>>(blocks), x);
}

/// One encoder-decoder stage: phi(gamma(E, beta(T))).
template <class T>
struct EncDecStage {
  MultiheadAttention<T> self_attention;   // masked
  MultiheadAttention<T> cross_attention;  // keys/values from the encoder
  FeedForwardNet<T> ffn;
  bool residual = false;
};

template <class T>
struct EncDecStack {
  Encoder<T> encoder;
  std::vector<EncDecStage<T>> stages;
};

/// tau_0 = Y, tau_i = phi_i(gamma_i(enc(X), beta_i(tau_{i-1}))). The encoder
/// output is computed once.
template <class T>
Matrix<T> eval_encdec(const EncDecStack<T>& stack, const Matrix<T>& x, const Matrix<T>& y) {
  if (x.cols() != y.cols()) {
    throw ShapeError("encoder input " + x.shape() + " and decoder input " + y.shape() +
                     " disagree on p");
  }
  Matrix<T> tau = y;
  if (stack.stages.empty()) return tau;
  const Matrix<T> memory = eval_encoder(stack.encoder, x);
  for (std::size_t i = 0; i < stack.stages.size(); ++i) {
    const auto& stage = stack.stages[i];
    try {
      const Matrix<T> b = eval_multihead(stage.self_attention, tau);
      const Matrix<T> g = eval_encdec_multihead(stage.cross_attention, memory, b);
      Matrix<T> out = eval_ffn(stage.ffn, g);
      if (stage.residual) {
        if (out.rows() != tau.rows()) {
          throw ShapeError("residual stage maps " + tau.shape() + " to " + out.shape());
        }
        out = add(out, tau);
      }
      tau = std::move(out);
    } catch (const ShapeError& e) {
      throw ShapeError("encoder-decoder stage " + std::to_string(i) + ": " + e.what());
    }
  }
  return tau;
}

template <class U, class T>
EncoderBlock<U> block_cast(const EncoderBlock<T>& b) {
  return EncoderBlock<U>{multihead_cast<U>(b.attention), ffn_cast<U>(b.ffn), b.residual};
}

template <class U, class T>
Encoder<U> encoder_cast(const Encoder<T>& blocks) {
  Encoder<U> out;
  out.reserve(blocks.size());
  for (const auto& b : blocks) out.push_back(block_cast<U>(b));
  return out;
}

template <class U, class T>
EncDecStack<U> encdec_cast(const EncDecStack<T>& s) {
  EncDecStack<U> out{encoder_cast<U>(s.encoder), {}};
  for (const auto& st : s.stages) {
    out.stages.push_back({multihead_cast<U>(st.self_attention), multihead_cast<U>(st.cross_attention),
                          ffn_cast<U>(st.ffn), st.residual});
  }
  return out;
}

}  // namespace splineformer
