// Copyright 2026 The Splineformer Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "splineformer/errors.hpp"
#include "splineformer/ffn.hpp"
#include "splineformer/pbform.hpp"
#include "splineformer/rational.hpp"

namespace splineformer {

/// Affine form over the coordinates of some basis: constant + sum coef[i] * u_i.
/// `nonnegative` records that the value is known to be >= 0 on every input.
struct LinearForm {
  std::map<std::size_t, Rational> coef;
  Rational constant;
  bool nonnegative = false;

  static LinearForm coordinate(std::size_t i, bool nonnegative = false) {
    LinearForm f;
    f.coef[i] = 1;
    f.nonnegative = nonnegative;
    return f;
  }

  static LinearForm constant_form(const Rational& c) {
    LinearForm f;
    f.constant = c;
    f.nonnegative = c >= 0;
    return f;
  }

  void add(std::size_t i, const Rational& c) {
    if (is_zero(c)) return;
    auto [it, inserted] = coef.emplace(i, c);
    if (!inserted) {
      it->second += c;
      if (is_zero(it->second)) coef.erase(it);
    }
  }

  friend LinearForm operator+(const LinearForm& a, const LinearForm& b) {
    LinearForm r = a;
    for (const auto& [i, c] : b.coef) r.add(i, c);
    r.constant += b.constant;
    r.nonnegative = a.nonnegative && b.nonnegative;
    return r;
  }

  friend LinearForm operator*(const Rational& s, const LinearForm& a) {
    LinearForm r;
    if (is_zero(s)) return LinearForm::constant_form(0);
    for (const auto& [i, c] : a.coef) r.coef.emplace(i, s * c);
    r.constant = s * a.constant;
    r.nonnegative = a.nonnegative && s > 0;
    return r;
  }

  friend LinearForm operator-(const LinearForm& a, const LinearForm& b) {
    return a + (Rational(-1) * b);
  }
};

/// A max of mins of linear forms.
using LinearLattice = std::vector<std::vector<LinearForm>>;

/// Grows a ReLU network one hidden layer at a time. Forms handed to the
/// builder are expressed over the current basis: the network input before the
/// first hidden layer, the last hidden layer afterwards.
class NetBuilder {
 public:
  explicit NetBuilder(std::size_t input_dim) : input_dim_(input_dim), current_dim_(input_dim) {
    if (input_dim == 0) throw ContractError("network input dimension must be positive");
  }

  std::size_t current_dim() const { return current_dim_; }
  std::size_t hidden_layers() const { return layers_.size(); }

  /// Appends relu(units) as a hidden layer; the new basis is those units.
  void add_hidden_layer(const std::vector<LinearForm>& units) {
    if (units.empty()) throw ContractError("hidden layer must have at least one unit");
    layers_.push_back(affine(units));
    current_dim_ = units.size();
  }

  /// Final affine layer; returns the finished network.
  FeedForwardNet<Rational> finish(const std::vector<LinearForm>& outputs) const {
    if (outputs.empty()) throw ContractError("network must have at least one output");
    FeedForwardNet<Rational> net{layers_};
    net.layers.push_back(affine(outputs));
    return net;
  }

 private:
  DenseLayer<Rational> affine(const std::vector<LinearForm>& forms) const {
    Matrix<Rational> w(forms.size(), current_dim_);
    Matrix<Rational> b(forms.size(), 1);
    for (std::size_t r = 0; r < forms.size(); ++r) {
      for (const auto& [i, c] : forms[r].coef) {
        if (i >= current_dim_) {
          throw ContractError("linear form refers to coordinate " + std::to_string(i) + " of a " +
                              std::to_string(current_dim_) + "-dimensional basis");
        }
        w(r, i) = c;
      }
      b(r, 0) = forms[r].constant;
    }
    return {w, b};
  }

  std::size_t input_dim_;
  std::size_t current_dim_;
  std::vector<DenseLayer<Rational>> layers_;
};

namespace detail {

/// Collects the hidden units of one level and hands out forms over them.
class LevelUnits {
 public:
  LinearForm relu_of(const LinearForm& f) {
    units_.push_back(f);
    return LinearForm::coordinate(units_.size() - 1, true);
  }

  /// a = relu(a) - relu(-a); a single unit when a is known nonnegative.
  LinearForm pass(const LinearForm& a) {
    if (a.nonnegative) return relu_of(a);
    LinearForm out = relu_of(a) - relu_of(Rational(-1) * a);
    out.nonnegative = false;
    return out;
  }

  /// min(a, b) = a - relu(a - b)
  LinearForm min_of(const LinearForm& a, const LinearForm& b) {
    LinearForm out = pass(a) - relu_of(a - b);
    out.nonnegative = a.nonnegative && b.nonnegative;
    return out;
  }

  /// max(a, b) = a + relu(b - a)
  LinearForm max_of(const LinearForm& a, const LinearForm& b) {
    LinearForm out = pass(a) + relu_of(b - a);
    out.nonnegative = a.nonnegative || b.nonnegative;
    return out;
  }

  const std::vector<LinearForm>& units() const { return units_; }

 private:
  std::vector<LinearForm> units_;
};

inline bool is_reduced(const LinearLattice& l) { return l.size() == 1 && l.front().size() == 1; }

}  // namespace detail

/// Reduces every lattice to a single value, one hidden layer per level: a
/// level halves the longest min-row of a lattice, or once all rows are single
/// forms, halves the number of rows. Returns one form per lattice over the
/// final basis. At least `min_levels` hidden layers are emitted.
inline std::vector<LinearForm> reduce_lanes(NetBuilder& builder, std::vector<LinearLattice> lanes,
                                            std::size_t min_levels = 1) {
  for (const auto& l : lanes) {
    if (l.empty()) throw ContractError("lattice must have at least one row");
    for (const auto& row : l) {
      if (row.empty()) throw ContractError("lattice row must be nonempty");
    }
  }
  std::size_t levels = 0;
  auto done = [&] {
    for (const auto& l : lanes) {
      if (!detail::is_reduced(l)) return false;
    }
    return true;
  };
  while (!done() || levels < min_levels) {
    detail::LevelUnits level;
    for (auto& l : lanes) {
      bool min_phase = false;
      for (const auto& row : l) min_phase = min_phase || row.size() > 1;
      LinearLattice next;
      if (min_phase) {
        for (const auto& row : l) {
          std::vector<LinearForm> out;
          for (std::size_t k = 0; k < row.size(); k += 2) {
            out.push_back(k + 1 < row.size() ? level.min_of(row[k], row[k + 1]) : level.pass(row[k]));
          }
          next.push_back(std::move(out));
        }
      } else {
        for (std::size_t k = 0; k < l.size(); k += 2) {
          next.push_back({k + 1 < l.size() ? level.max_of(l[k][0], l[k + 1][0]) : level.pass(l[k][0])});
        }
      }
      l = std::move(next);
    }
    builder.add_hidden_layer(level.units());
    ++levels;
  }
  std::vector<LinearForm> out;
  out.reserve(lanes.size());
  for (const auto& l : lanes) out.push_back(l.front().front());
  return out;
}

/// Affine form of a degree <= 1 polynomial; the variable x_{i,1} is input
/// coordinate i.
inline LinearForm affine_form(const Polynomial& poly, std::size_t in_dim) {
  LinearForm f;
  for (const auto& [m, c] : poly.terms()) {
    if (m.degree() == 0) {
      f.constant += c;
      continue;
    }
    if (m.degree() > 1) throw ContractError("linear spline piece has degree " + std::to_string(m.degree()));
    const Variable v = m.factors().front().first;
    if (v.col != 0 || v.row >= in_dim) {
      throw ShapeError("variable " + variable_name(v) + " is not a coordinate of R^" + std::to_string(in_dim));
    }
    f.add(v.row, c);
  }
  return f;
}

/// One output per form: each a max of mins of affine pieces, as a ReLU network
/// built from the min/max gadgets in a balanced tree.
inline FeedForwardNet<Rational> linear_spline_to_ffn(const std::vector<PBForm>& outputs, std::size_t in_dim) {
  if (outputs.empty()) throw ContractError("linear spline needs at least one output");
  std::vector<LinearLattice> lanes;
  for (const auto& f : outputs) {
    if (degree(f) > 1) throw ContractError("linear spline has degree " + std::to_string(degree(f)));
    LinearLattice lane;
    for (const auto& row : f.rows()) {
      std::vector<LinearForm> forms;
      for (const auto& poly : row) forms.push_back(affine_form(poly, in_dim));
      lane.push_back(std::move(forms));
    }
    lanes.push_back(std::move(lane));
  }
  NetBuilder builder(in_dim);
  const auto reduced = reduce_lanes(builder, std::move(lanes));
  return builder.finish(reduced);
}

inline FeedForwardNet<Rational> linear_spline_to_ffn(const PBForm& f, std::size_t in_dim) {
  return linear_spline_to_ffn(std::vector<PBForm>{f}, in_dim);
}

}  // namespace splineformer
