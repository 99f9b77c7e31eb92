// Copyright 2026 The Splineformer Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "splineformer/attention.hpp"
#include "splineformer/errors.hpp"
#include "splineformer/matrix.hpp"
#include "splineformer/rational.hpp"

// Single-row (m = d = 1) heads used by every construction in the compiler.
// Indices are zero-based; `n` is the input row count, `p` the column count.

namespace splineformer {

using RatHead = AttentionHead<Rational>;

namespace detail {

inline void check_index(std::size_t i, std::size_t bound, const char* what) {
  if (i >= bound) {
    throw ContractError(std::string(what) + " index " + std::to_string(i) + " out of range [0," +
                        std::to_string(bound) + ")");
  }
}

inline RatHead zero_head(std::size_t n, std::size_t p, bool masked) {
  if (n == 0 || p == 0) throw ContractError("head dimensions must be positive");
  RatHead h;
  h.query_weight = Matrix<Rational>(1, n);
  h.query_bias = Matrix<Rational>(1, p);
  h.key_weight = Matrix<Rational>(1, n);
  h.key_bias = Matrix<Rational>(1, p);
  h.value_weight = Matrix<Rational>(1, n);
  h.value_bias = Matrix<Rational>(1, p);
  h.masked = masked;
  return h;
}

}  // namespace detail

/// Output row carries x_{src_row,src_col} in column dst_col and zero elsewhere.
/// Under a mask this needs src_col <= dst_col.
inline RatHead build_copy_head(std::size_t src_row, std::size_t src_col, std::size_t dst_col,
                               std::size_t n, std::size_t p, bool masked = false) {
  detail::check_index(src_row, n, "copy head row");
  detail::check_index(src_col, p, "copy head column");
  detail::check_index(dst_col, p, "copy head target column");
  RatHead h = detail::zero_head(n, p, masked);
  h.value_weight(0, src_row) = 1;
  h.key_bias(0, src_col) = 1;
  h.query_bias(0, dst_col) = 1;
  return h;
}

/// Output row is 1 in column j and zero elsewhere, for every input.
inline RatHead build_const_head(std::size_t j, std::size_t n, std::size_t p, bool masked = false) {
  detail::check_index(j, p, "constant head column");
  RatHead h = detail::zero_head(n, p, masked);
  h.value_bias(0, 0) = 1;
  h.key_bias(0, 0) = 1;
  h.query_bias(0, j) = 1;
  return h;
}

/// Output row c is z_{value_row,j} * (sign * z_{query_row,c})^+. When both rows
/// vanish outside column j this is a single entry in column j.
inline RatHead build_product_head(std::size_t value_row, std::size_t query_row, std::size_t j,
                                  bool negate, std::size_t n, std::size_t p, bool masked = false) {
  detail::check_index(value_row, n, "product head value row");
  detail::check_index(query_row, n, "product head query row");
  detail::check_index(j, p, "product head column");
  RatHead h = detail::zero_head(n, p, masked);
  h.value_weight(0, value_row) = 1;
  h.key_bias(0, j) = 1;
  h.query_weight(0, query_row) = negate ? -1 : 1;
  return h;
}

/// Output row equals `values` (one nonnegative constant per column).
inline RatHead build_bias_head(const std::vector<Rational>& values, std::size_t n, bool masked = false) {
  const std::size_t p = values.size();
  RatHead h = detail::zero_head(n, p, masked);
  for (std::size_t j = 0; j < p; ++j) {
    if (values[j] < 0) throw ContractError("bias head constants must be nonnegative");
    h.query_bias(0, j) = values[j];
  }
  h.value_bias(0, 0) = 1;
  h.key_bias(0, 0) = 1;
  return h;
}

}  // namespace splineformer
