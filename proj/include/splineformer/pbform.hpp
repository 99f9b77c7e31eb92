// Copyright 2026 The Splineformer Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "splineformer/errors.hpp"
#include "splineformer/matrix.hpp"
#include "splineformer/polynomial.hpp"
#include "splineformer/rational.hpp"

namespace splineformer {

/// Max over rows of the min within each row.
class PBForm {
 public:
  using Row = std::vector<Polynomial>;

  PBForm() : rows_{{Polynomial{}}} {}
  explicit PBForm(const Polynomial& p) : rows_{{p}} {}
  explicit PBForm(std::vector<Row> rows) : rows_(std::move(rows)) {
    if (rows_.empty()) throw ContractError("PB form needs at least one row");
    for (const auto& r : rows_) {
      if (r.empty()) throw ContractError("PB form row must be nonempty");
    }
  }

  /// max(p_1, ..., p_k): one single-entry row per polynomial.
  static PBForm max_of(const std::vector<Polynomial>& ps) {
    std::vector<Row> rows;
    for (const auto& p : ps) rows.push_back({p});
    return PBForm(std::move(rows));
  }

  /// min(p_1, ..., p_k): a single row.
  static PBForm min_of(const std::vector<Polynomial>& ps) { return PBForm({ps}); }

  const std::vector<Row>& rows() const { return rows_; }

  std::size_t piece_count() const {
    std::size_t n = 0;
    for (const auto& r : rows_) n += r.size();
    return n;
  }

  bool is_polynomial() const { return rows_.size() == 1 && rows_.front().size() == 1; }

  long max_column() const {
    long c = -1;
    for (const auto& r : rows_)
      for (const auto& p : r) c = std::max(c, p.max_column());
    return c;
  }

  friend bool operator==(const PBForm&, const PBForm&) = default;

 private:
  std::vector<Row> rows_;
};

inline unsigned degree(const PBForm& f) {
  unsigned d = 0;
  for (const auto& r : f.rows())
    for (const auto& p : r) d = std::max(d, p.degree());
  return d;
}

inline std::string to_string(const PBForm& f) {
  std::string s = "max(";
  for (std::size_t i = 0; i < f.rows().size(); ++i) {
    if (i) s += ", ";
    s += "min(";
    const auto& r = f.rows()[i];
    for (std::size_t j = 0; j < r.size(); ++j) {
      if (j) s += ", ";
      s += to_string(r[j]);
    }
    s += ")";
  }
  return s + ")";
}

template <class T>
T eval_pbform(const PBForm& f, const Matrix<T>& x) {
  bool first_row = true;
  T best(0);
  for (const auto& r : f.rows()) {
    T low = eval_poly(r.front(), x);
    for (std::size_t j = 1; j < r.size(); ++j) low = std::min(low, eval_poly(r[j], x));
    if (first_row || low > best) best = low;
    first_row = false;
  }
  return best;
}

/// Min over rows of the max within each row, with every polynomial negated.
/// Evaluates to -f.
template <class T>
T eval_negated_dual(const PBForm& f, const Matrix<T>& x) {
  bool first_row = true;
  T best(0);
  for (const auto& r : f.rows()) {
    T high = -eval_poly(r.front(), x);
    for (std::size_t j = 1; j < r.size(); ++j) high = std::max(high, T(-eval_poly(r[j], x)));
    if (first_row || high < best) best = high;
    first_row = false;
  }
  return best;
}

/// Row-count cap for forms produced by the lattice operations below.
inline constexpr std::size_t kDefaultPBRowCap = 4096;

namespace detail {

inline PBForm::Row canonical_row(PBForm::Row row) {
  std::sort(row.begin(), row.end());
  row.erase(std::unique(row.begin(), row.end()), row.end());
  return row;
}

inline PBForm canonical_form(std::vector<PBForm::Row> rows, std::size_t cap) {
  for (auto& r : rows) r = canonical_row(std::move(r));
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  if (rows.size() > cap) {
    throw ResourceError("PB form grew to " + std::to_string(rows.size()) + " rows (cap " +
                        std::to_string(cap) + ")");
  }
  return PBForm(std::move(rows));
}

inline void guard_product(std::size_t a, std::size_t b, std::size_t cap) {
  if (a != 0 && b > cap / a) {
    throw ResourceError("PB form would grow past " + std::to_string(cap) + " rows");
  }
}

}  // namespace detail

inline PBForm pb_max(const PBForm& a, const PBForm& b, std::size_t cap = kDefaultPBRowCap) {
  std::vector<PBForm::Row> rows = a.rows();
  rows.insert(rows.end(), b.rows().begin(), b.rows().end());
  return detail::canonical_form(std::move(rows), cap);
}

inline PBForm pb_min(const PBForm& a, const PBForm& b, std::size_t cap = kDefaultPBRowCap) {
  detail::guard_product(a.rows().size(), b.rows().size(), cap);
  std::vector<PBForm::Row> rows;
  for (const auto& ra : a.rows()) {
    for (const auto& rb : b.rows()) {
      PBForm::Row r = ra;
      r.insert(r.end(), rb.begin(), rb.end());
      rows.push_back(std::move(r));
    }
  }
  return detail::canonical_form(std::move(rows), cap);
}

inline PBForm pb_add(const PBForm& a, const PBForm& b, std::size_t cap = kDefaultPBRowCap) {
  detail::guard_product(a.rows().size(), b.rows().size(), cap);
  std::vector<PBForm::Row> rows;
  for (const auto& ra : a.rows()) {
    for (const auto& rb : b.rows()) {
      PBForm::Row r;
      for (const auto& p : ra)
        for (const auto& q : rb) r.push_back(p + q);
      rows.push_back(std::move(r));
    }
  }
  return detail::canonical_form(std::move(rows), cap);
}

/// -max_i min_j a_ij = max over choice functions c of min_i (-a_{i,c(i)}).
inline PBForm pb_negate(const PBForm& f, std::size_t cap = kDefaultPBRowCap) {
  std::size_t count = 1;
  for (const auto& r : f.rows()) {
    detail::guard_product(count, r.size(), cap);
    count *= r.size();
  }
  std::vector<PBForm::Row> rows;
  rows.reserve(count);
  std::vector<std::size_t> pick(f.rows().size(), 0);
  for (std::size_t k = 0; k < count; ++k) {
    PBForm::Row r;
    for (std::size_t i = 0; i < pick.size(); ++i) r.push_back(-f.rows()[i][pick[i]]);
    rows.push_back(std::move(r));
    for (std::size_t i = 0; i < pick.size(); ++i) {
      if (++pick[i] < f.rows()[i].size()) break;
      pick[i] = 0;
    }
  }
  return detail::canonical_form(std::move(rows), cap);
}

/// Multiplies every piece by a positive polynomial-valued factor. The caller
/// guarantees positivity; max and min commute with such a factor.
inline PBForm pb_scale_positive(const PBForm& f, const Polynomial& factor) {
  std::vector<PBForm::Row> rows;
  for (const auto& r : f.rows()) {
    PBForm::Row out;
    for (const auto& p : r) out.push_back(factor * p);
    rows.push_back(std::move(out));
  }
  return detail::canonical_form(std::move(rows), kDefaultPBRowCap);
}

inline PBForm pb_scale(const PBForm& f, const Rational& s, std::size_t cap = kDefaultPBRowCap) {
  if (is_zero(s)) return PBForm(Polynomial{});
  if (s > 0) return pb_scale_positive(f, Polynomial(s));
  return pb_scale_positive(pb_negate(f, cap), Polynomial(Rational(-s)));
}

/// Matrix-valued spline: an r x p grid of PB forms over the entries of an
/// n x p input.
struct SplineGrid {
  std::size_t n = 0;
  std::size_t p = 0;
  std::vector<std::vector<PBForm>> outputs;  // r rows of p forms

  std::size_t output_rows() const { return outputs.size(); }

  unsigned max_degree() const {
    unsigned d = 0;
    for (const auto& row : outputs)
      for (const auto& f : row) d = std::max(d, degree(f));
    return d;
  }
};

inline void check_spline_grid(const SplineGrid& g) {
  if (g.n == 0 || g.p == 0) throw ShapeError("spline input shape must be positive");
  if (g.outputs.empty()) throw ShapeError("spline needs at least one output row");
  for (std::size_t i = 0; i < g.outputs.size(); ++i) {
    if (g.outputs[i].size() != g.p) {
      throw ShapeError("spline output row " + std::to_string(i + 1) + " has " +
                       std::to_string(g.outputs[i].size()) + " entries, expected p = " +
                       std::to_string(g.p));
    }
    for (const auto& f : g.outputs[i]) {
      for (const auto& r : f.rows()) {
        for (const auto& poly : r) {
          for (const auto& [m, c] : poly.terms()) {
            for (const auto& [v, e] : m.factors()) {
              if (v.row >= g.n || v.col >= g.p) {
                throw ShapeError("variable " + variable_name(v) + " outside the " +
                                 Matrix<Rational>::shape_string(g.n, g.p) + " input");
              }
            }
          }
        }
      }
    }
  }
}

template <class T>
Matrix<T> eval_spline(const SplineGrid& g, const Matrix<T>& x) {
  if (x.rows() != g.n || x.cols() != g.p) {
    throw ShapeError("spline expects " + Matrix<T>::shape_string(g.n, g.p) + " input, got " + x.shape());
  }
  Matrix<T> out(g.outputs.size(), g.p);
  for (std::size_t i = 0; i < g.outputs.size(); ++i)
    for (std::size_t j = 0; j < g.p; ++j) out(i, j) = eval_pbform(g.outputs[i][j], x);
  return out;
}

}  // namespace splineformer
