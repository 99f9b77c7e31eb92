// Copyright 2026 The Splineformer Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "splineformer/errors.hpp"
#include "splineformer/matrix.hpp"
#include "splineformer/rational.hpp"

namespace splineformer {

/// Entry x_{row,col} of the input matrix (zero-based). Ordered row-major.
struct Variable {
  std::uint32_t row = 0;
  std::uint32_t col = 0;

  friend auto operator<=>(const Variable&, const Variable&) = default;
};

/// "x_i_j" with one-based indices.
inline std::string variable_name(Variable v) {
  return "x_" + std::to_string(v.row + 1) + "_" + std::to_string(v.col + 1);
}

inline Variable parse_variable_name(const std::string& name) {
  unsigned i = 0, j = 0;
  char tail = 0;
  if (std::sscanf(name.c_str(), "x_%u_%u%c", &i, &j, &tail) != 2 || i == 0 || j == 0) {
    throw ParseError("bad variable name '" + name + "', expected x_<row>_<col> (one-based)");
  }
  return Variable{i - 1, j - 1};
}

/// Product of variables with positive exponents; the empty product is 1.
class Monomial {
 public:
  using Factor = std::pair<Variable, unsigned>;

  Monomial() = default;

  explicit Monomial(std::vector<Factor> factors) {
    std::map<Variable, unsigned> merged;
    for (const auto& [v, e] : factors) merged[v] += e;
    for (const auto& [v, e] : merged) {
      if (e > 0) factors_.emplace_back(v, e);
    }
  }

  static Monomial of(Variable v, unsigned exponent = 1) { return Monomial({{v, exponent}}); }

  const std::vector<Factor>& factors() const { return factors_; }
  bool is_constant() const { return factors_.empty(); }

  unsigned degree() const {
    unsigned d = 0;
    for (const auto& f : factors_) d += f.second;
    return d;
  }

  unsigned exponent(Variable v) const {
    for (const auto& [w, e] : factors_) {
      if (w == v) return e;
    }
    return 0;
  }

  /// Largest column index among the variables, or -1 for the constant.
  long max_column() const {
    long c = -1;
    for (const auto& f : factors_) c = std::max<long>(c, f.first.col);
    return c;
  }

  friend Monomial operator*(const Monomial& a, const Monomial& b) {
    std::vector<Factor> all = a.factors_;
    all.insert(all.end(), b.factors_.begin(), b.factors_.end());
    return Monomial(std::move(all));
  }

  friend bool operator==(const Monomial&, const Monomial&) = default;

  /// Graded lexicographic: lower degree first; within a degree, the larger
  /// exponent on the earliest variable first (x^2 < xy < y^2).
  friend bool operator<(const Monomial& a, const Monomial& b) {
    const unsigned da = a.degree(), db = b.degree();
    if (da != db) return da < db;
    std::size_t i = 0, j = 0;
    while (i < a.factors_.size() || j < b.factors_.size()) {
      Variable v;
      if (j == b.factors_.size() || (i < a.factors_.size() && a.factors_[i].first < b.factors_[j].first)) {
        v = a.factors_[i].first;
      } else {
        v = b.factors_[j].first;
      }
      const unsigned ea = (i < a.factors_.size() && a.factors_[i].first == v) ? a.factors_[i].second : 0;
      const unsigned eb = (j < b.factors_.size() && b.factors_[j].first == v) ? b.factors_[j].second : 0;
      if (ea != eb) return ea > eb;
      if (ea) ++i;
      if (eb) ++j;
    }
    return false;
  }

 private:
  std::vector<Factor> factors_;  // sorted by variable, exponents > 0
};

inline std::string to_string(const Monomial& m) {
  if (m.is_constant()) return "1";
  std::string s;
  for (const auto& [v, e] : m.factors()) {
    if (!s.empty()) s += "*";
    s += variable_name(v);
    if (e > 1) s += "^" + std::to_string(e);
  }
  return s;
}

template <class T>
T eval_monomial(const Monomial& m, const Matrix<T>& x) {
  T value(1);
  for (const auto& [v, e] : m.factors()) {
    if (v.row >= x.rows() || v.col >= x.cols()) {
      throw ShapeError("variable " + variable_name(v) + " outside " + x.shape() + " input");
    }
    for (unsigned k = 0; k < e; ++k) value *= x(v.row, v.col);
  }
  return value;
}

/// Sparse polynomial with exact rational coefficients; zero coefficients are
/// never stored.
class Polynomial {
 public:
  using Terms = std::map<Monomial, Rational>;

  Polynomial() = default;
  explicit Polynomial(const Rational& c) { add_term(Monomial{}, c); }
  Polynomial(const Monomial& m, const Rational& c) { add_term(m, c); }

  static Polynomial variable(Variable v) { return Polynomial(Monomial::of(v), Rational(1)); }

  void add_term(const Monomial& m, const Rational& c) {
    if (is_zero(c)) return;
    auto [it, inserted] = terms_.emplace(m, c);
    if (!inserted) {
      it->second += c;
      if (is_zero(it->second)) terms_.erase(it);
    }
  }

  const Terms& terms() const { return terms_; }
  bool is_zero_poly() const { return terms_.empty(); }

  unsigned degree() const { return terms_.empty() ? 0 : terms_.rbegin()->first.degree(); }

  Rational constant_term() const {
    auto it = terms_.find(Monomial{});
    return it == terms_.end() ? Rational(0) : it->second;
  }

  long max_column() const {
    long c = -1;
    for (const auto& t : terms_) c = std::max(c, t.first.max_column());
    return c;
  }

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
    Polynomial r = a;
    for (const auto& [m, c] : b.terms_) r.add_term(m, c);
    return r;
  }
  friend Polynomial operator-(const Polynomial& a) {
    Polynomial r;
    for (const auto& [m, c] : a.terms_) r.terms_.emplace(m, -c);
    return r;
  }
  friend Polynomial operator-(const Polynomial& a, const Polynomial& b) { return a + (-b); }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    Polynomial r;
    for (const auto& [ma, ca] : a.terms_)
      for (const auto& [mb, cb] : b.terms_) r.add_term(ma * mb, ca * cb);
    return r;
  }
  friend Polynomial operator*(const Rational& s, const Polynomial& a) {
    Polynomial r;
    if (is_zero(s)) return r;
    for (const auto& [m, c] : a.terms_) r.terms_.emplace(m, s * c);
    return r;
  }
  friend bool operator==(const Polynomial&, const Polynomial&) = default;
  friend bool operator<(const Polynomial& a, const Polynomial& b) { return a.terms_ < b.terms_; }

 private:
  Terms terms_;
};

inline std::string to_string(const Polynomial& p) {
  if (p.is_zero_poly()) return "0";
  std::string s;
  for (const auto& [m, c] : p.terms()) {
    if (!s.empty()) s += " + ";
    s += "(" + to_string(c) + ")";
    if (!m.is_constant()) s += "*" + to_string(m);
  }
  return s;
}

template <class T>
T eval_poly(const Polynomial& p, const Matrix<T>& x) {
  T value(0);
  for (const auto& [m, c] : p.terms()) {
    value += scalar_traits<T>::from_rational(c) * eval_monomial(m, x);
  }
  return value;
}

}  // namespace splineformer
