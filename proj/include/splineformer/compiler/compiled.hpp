// Copyright 2026 The Splineformer Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "splineformer/compiler/layout.hpp"
#include "splineformer/encoder.hpp"
#include "splineformer/errors.hpp"
#include "splineformer/rational.hpp"

namespace splineformer {

enum class CompileMode { automatic, faithful, pruned };

inline std::string to_string(CompileMode m) {
  switch (m) {
    case CompileMode::automatic:
      return "auto";
    case CompileMode::faithful:
      return "faithful";
    case CompileMode::pruned:
      return "pruned";
  }
  return "auto";
}

inline CompileMode parse_compile_mode(const std::string& s) {
  if (s == "auto") return CompileMode::automatic;
  if (s == "faithful") return CompileMode::faithful;
  if (s == "pruned") return CompileMode::pruned;
  throw ParseError("unknown compile mode '" + s + "' (expected auto, faithful or pruned)");
}

struct CompileOptions {
  /// `automatic` picks pruned when s >= 3 or p >= 2, faithful otherwise.
  CompileMode mode = CompileMode::automatic;
  bool masked = false;
  bool residual = false;
  /// Faithful mode refuses stages whose head or row count would exceed this.
  std::size_t row_cap = 20000;
  /// Split multi-hidden-layer networks into chains of one-hidden-layer blocks.
  bool single_hidden_layer = true;
};

inline CompileMode resolve_mode(CompileMode mode, unsigned s, std::size_t p) {
  if (mode != CompileMode::automatic) return mode;
  return (s >= 3 || p >= 2) ? CompileMode::pruned : CompileMode::faithful;
}

struct CompileStats {
  std::size_t blocks = 0;
  std::size_t heads = 0;
  /// Largest row count of any intermediate matrix (attention or network output).
  std::size_t max_rows = 0;
  /// Attention layers plus hidden network layers along the whole stack.
  std::size_t depth = 0;
};

struct CompiledEncoder {
  std::size_t n = 0;
  std::size_t p = 0;
  Encoder<Rational> blocks;
  /// Rows of the monomial representation the final stage reads from.
  MonomialLayout layout;
  /// One tag per block naming the construction step that emitted it.
  std::vector<std::string> provenance;
  CompileMode mode = CompileMode::pruned;
  std::size_t stages = 0;
  bool masked = false;

  std::size_t output_rows() const { return blocks.empty() ? n : blocks.back().ffn.output_dim(); }

  CompileStats stats() const {
    CompileStats s;
    s.blocks = blocks.size();
    for (const auto& b : blocks) {
      s.heads += b.attention.heads.size();
      s.max_rows = std::max(s.max_rows, b.attention.output_rows());
      for (const auto& layer : b.ffn.layers) s.max_rows = std::max(s.max_rows, layer.weight.rows());
      s.depth += 1 + b.ffn.hidden_layers();
    }
    return s;
  }
};

template <class T>
Matrix<T> eval_compiled(const CompiledEncoder& c, const Matrix<T>& x) {
  if constexpr (std::is_same_v<T, Rational>) {
    return eval_encoder(c.blocks, x);
  } else {
    return eval_encoder(encoder_cast<T>(c.blocks), x);
  }
}

}  // namespace splineformer
