// Copyright 2026 The Splineformer Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "splineformer/errors.hpp"
#include "splineformer/polynomial.hpp"

namespace splineformer {

/// Which monomial each entry of an intermediate matrix holds; an empty cell
/// is identically zero.
using LabelGrid = std::vector<std::vector<std::optional<Monomial>>>;

struct LayoutEntry {
  Monomial monomial;
  std::size_t column = 0;  // zero-based
  std::size_t row = 0;     // zero-based

  friend bool operator==(const LayoutEntry&, const LayoutEntry&) = default;
};

/// (monomial, column) -> row of the intermediate matrix holding that value.
class MonomialLayout {
 public:
  MonomialLayout() = default;
  explicit MonomialLayout(std::size_t total_rows) : total_rows_(total_rows) {}

  void add(const Monomial& m, std::size_t column, std::size_t row) {
    if (row >= total_rows_) throw ContractError("layout row " + std::to_string(row) + " out of range");
    if (!rows_.emplace(std::make_pair(m, column), row).second) {
      throw ContractError("layout already maps " + to_string(m) + " in column " + std::to_string(column));
    }
  }

  bool contains(const Monomial& m, std::size_t column) const { return rows_.count({m, column}) != 0; }

  std::size_t row(const Monomial& m, std::size_t column) const {
    auto it = rows_.find({m, column});
    if (it == rows_.end()) {
      throw ContractError("layout has no row for " + to_string(m) + " in column " + std::to_string(column + 1));
    }
    return it->second;
  }

  std::size_t total_rows() const { return total_rows_; }
  std::size_t size() const { return rows_.size(); }

  /// Entries ordered by row, then column.
  std::vector<LayoutEntry> entries() const {
    std::vector<LayoutEntry> out;
    out.reserve(rows_.size());
    for (const auto& [key, r] : rows_) out.push_back({key.first, key.second, r});
    std::sort(out.begin(), out.end(), [](const LayoutEntry& a, const LayoutEntry& b) {
      return a.row != b.row ? a.row < b.row : a.column < b.column;
    });
    return out;
  }

  /// Monomials available in one column, in graded-lex order.
  std::vector<Monomial> monomials_in_column(std::size_t column) const {
    std::vector<Monomial> out;
    for (const auto& [key, r] : rows_) {
      if (key.second == column) out.push_back(key.first);
    }
    return out;
  }

  /// First row holding each (monomial, column) pair.
  static MonomialLayout from_labels(const LabelGrid& labels) {
    MonomialLayout layout(labels.size());
    for (std::size_t r = 0; r < labels.size(); ++r)
      for (std::size_t c = 0; c < labels[r].size(); ++c) {
        if (labels[r][c] && !layout.contains(*labels[r][c], c)) layout.add(*labels[r][c], c, r);
      }
    return layout;
  }

 private:
  std::map<std::pair<Monomial, std::size_t>, std::size_t> rows_;
  std::size_t total_rows_ = 0;
};

}  // namespace splineformer
