// Copyright 2026 The Splineformer Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "splineformer/errors.hpp"
#include "splineformer/matrix.hpp"
#include "splineformer/polynomial.hpp"

namespace splineformer {

/// Number of monomials of degree <= k in nvars variables, C(nvars + k, k).
inline std::size_t veronese_dim(std::size_t nvars, std::size_t k) {
  if (nvars == 0 || k == 0) throw ContractError("veronese_dim needs nvars >= 1 and k >= 1");
  // C(nvars + i, i) built incrementally; each intermediate value is integral.
  std::size_t c = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    const std::size_t num = nvars + i;
    if (c > std::numeric_limits<std::size_t>::max() / num) {
      throw ResourceError("veronese dimension overflows for nvars=" + std::to_string(nvars) +
                          ", k=" + std::to_string(k));
    }
    c = c * num / i;
  }
  return c;
}

/// Row-major variables of an n x p input: (1,1), (1,2), ..., (n,p).
inline std::vector<Variable> row_major_variables(std::size_t n, std::size_t p) {
  std::vector<Variable> vars;
  vars.reserve(n * p);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < p; ++j) {
      vars.push_back(Variable{static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)});
    }
  return vars;
}

/// All monomials of degree <= k in graded-lexicographic order, constant first,
/// then the variables in the given order.
class VeroneseIndex {
 public:
  VeroneseIndex(std::vector<Variable> vars, std::size_t k) : vars_(std::move(vars)), degree_(k) {
    if (vars_.empty() || k == 0) throw ContractError("Veronese index needs variables and k >= 1");
    const std::size_t dim = veronese_dim(vars_.size(), k);
    monomials_.reserve(dim);
    monomials_.emplace_back();
    for (std::size_t d = 1; d <= k; ++d) {
      // Nondecreasing index sequences of length d, in lexicographic order.
      std::vector<std::size_t> seq(d, 0);
      while (true) {
        std::vector<Monomial::Factor> f;
        for (std::size_t s : seq) f.emplace_back(vars_[s], 1u);
        monomials_.emplace_back(std::move(f));
        std::size_t pos = d;
        while (pos > 0 && seq[pos - 1] == vars_.size() - 1) --pos;
        if (pos == 0) break;
        const std::size_t next = seq[pos - 1] + 1;
        for (std::size_t q = pos - 1; q < d; ++q) seq[q] = next;
      }
    }
    for (std::size_t i = 0; i < monomials_.size(); ++i) position_.emplace(monomials_[i], i);
  }

  /// Variables of an n x p input in row-major order.
  VeroneseIndex(std::size_t n, std::size_t p, std::size_t k) : VeroneseIndex(row_major_variables(n, p), k) {}

  std::size_t nvars() const { return vars_.size(); }
  std::size_t degree() const { return degree_; }
  std::size_t size() const { return monomials_.size(); }
  const std::vector<Variable>& variables() const { return vars_; }
  const std::vector<Monomial>& monomials() const { return monomials_; }
  const Monomial& monomial(std::size_t i) const { return monomials_.at(i); }

  bool contains(const Monomial& m) const { return position_.count(m) != 0; }

  std::size_t position(const Monomial& m) const {
    auto it = position_.find(m);
    if (it == position_.end()) throw ContractError("monomial " + to_string(m) + " is not in the index");
    return it->second;
  }

 private:
  std::vector<Variable> vars_;
  std::size_t degree_;
  std::vector<Monomial> monomials_;
  std::map<Monomial, std::size_t> position_;
};

/// Column of monomial values in index order.
template <class T>
Matrix<T> veronese_eval(const VeroneseIndex& idx, const Matrix<T>& x) {
  for (const auto& v : idx.variables()) {
    if (v.row >= x.rows() || v.col >= x.cols()) {
      throw ShapeError("Veronese index over " + std::to_string(idx.nvars()) +
                       " variables does not fit input " + x.shape());
    }
  }
  if (x.rows() * x.cols() != idx.nvars()) {
    throw ShapeError("Veronese index over " + std::to_string(idx.nvars()) + " variables given " +
                     x.shape() + " input");
  }
  Matrix<T> out(idx.size(), 1);
  for (std::size_t i = 0; i < idx.size(); ++i) out(i, 0) = eval_monomial(idx.monomial(i), x);
  return out;
}

/// Splits `m` into at most k factors of degree <= k2 each, filling every
/// factor up to degree k2 in variable order. The constant splits into nothing.
inline std::vector<Monomial> cover_monomial(const Monomial& m, std::size_t k, std::size_t k2) {
  if (k == 0 || k2 == 0) throw ContractError("cover degrees must be positive");
  if (m.degree() > k * k2) {
    throw ContractError("monomial " + to_string(m) + " has degree above " + std::to_string(k * k2));
  }
  std::vector<Monomial> out;
  std::vector<Monomial::Factor> current;
  std::size_t filled = 0;
  for (const auto& [v, e] : m.factors()) {
    for (unsigned c = 0; c < e; ++c) {
      current.emplace_back(v, 1u);
      if (++filled == k2) {
        out.emplace_back(std::move(current));
        current.clear();
        filled = 0;
      }
    }
  }
  if (filled) out.emplace_back(std::move(current));
  return out;
}

/// For every monomial of degree <= k * k2 over `vars`, its factors as positions
/// in the degree-k2 index over the same variables.
inline std::map<Monomial, std::vector<std::size_t>> compose_cover(std::size_t k, std::size_t k2,
                                                                 const std::vector<Variable>& vars) {
  const VeroneseIndex inner(vars, k2);
  const VeroneseIndex outer(vars, k * k2);
  std::map<Monomial, std::vector<std::size_t>> cover;
  for (const auto& m : outer.monomials()) {
    std::vector<std::size_t> pos;
    for (const auto& f : cover_monomial(m, k, k2)) pos.push_back(inner.position(f));
    cover.emplace(m, std::move(pos));
  }
  return cover;
}

/// Variables x_1..x_nvars, represented as the entries of a 1 x nvars input.
inline std::map<Monomial, std::vector<std::size_t>> compose_cover(std::size_t k, std::size_t k2,
                                                                 std::size_t nvars) {
  return compose_cover(k, k2, row_major_variables(1, nvars));
}

}  // namespace splineformer
