// Copyright 2026 The Splineformer Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "splineformer/errors.hpp"
#include "splineformer/matrix.hpp"
#include "splineformer/pbform.hpp"
#include "splineformer/polynomial.hpp"
#include "splineformer/rational.hpp"

namespace splineformer {

/// Expression tree over constants and input entries closed under +, *,
/// scalar multiples, max and min.
struct MaxDefExpr {
  enum class Kind { constant, variable, polynomial, sum, product, scale, max, min };

  Kind kind = Kind::constant;
  Rational value;        // constant, or the factor of scale
  Variable var;          // variable
  Polynomial poly;       // polynomial leaf
  std::vector<MaxDefExpr> args;

  static MaxDefExpr constant(const Rational& c) {
    MaxDefExpr e;
    e.kind = Kind::constant;
    e.value = c;
    return e;
  }
  static MaxDefExpr variable(Variable v) {
    MaxDefExpr e;
    e.kind = Kind::variable;
    e.var = v;
    return e;
  }
  static MaxDefExpr polynomial(Polynomial p) {
    MaxDefExpr e;
    e.kind = Kind::polynomial;
    e.poly = std::move(p);
    return e;
  }
  static MaxDefExpr sum(std::vector<MaxDefExpr> args) { return nary(Kind::sum, std::move(args)); }
  static MaxDefExpr product(std::vector<MaxDefExpr> args) {
    return nary(Kind::product, std::move(args));
  }
  static MaxDefExpr max(std::vector<MaxDefExpr> args) { return nary(Kind::max, std::move(args)); }
  static MaxDefExpr min(std::vector<MaxDefExpr> args) { return nary(Kind::min, std::move(args)); }
  static MaxDefExpr scale(const Rational& s, MaxDefExpr arg) {
    MaxDefExpr e;
    e.kind = Kind::scale;
    e.value = s;
    e.args.push_back(std::move(arg));
    return e;
  }

 private:
  static MaxDefExpr nary(Kind k, std::vector<MaxDefExpr> args) {
    MaxDefExpr e;
    e.kind = k;
    e.args = std::move(args);
    return e;
  }
};

inline const char* kind_name(MaxDefExpr::Kind k) {
  switch (k) {
    case MaxDefExpr::Kind::constant:
      return "const";
    case MaxDefExpr::Kind::variable:
      return "var";
    case MaxDefExpr::Kind::polynomial:
      return "poly";
    case MaxDefExpr::Kind::sum:
      return "sum";
    case MaxDefExpr::Kind::product:
      return "product";
    case MaxDefExpr::Kind::scale:
      return "scale";
    case MaxDefExpr::Kind::max:
      return "max";
    case MaxDefExpr::Kind::min:
      return "min";
  }
  return "?";
}

namespace detail {

inline void check_arity(const MaxDefExpr& e, const std::string& path) {
  using K = MaxDefExpr::Kind;
  switch (e.kind) {
    case K::constant:
    case K::variable:
    case K::polynomial:
      if (!e.args.empty()) throw ContractError(path + ": leaf '" + kind_name(e.kind) + "' has arguments");
      return;
    case K::scale:
      if (e.args.size() != 1) throw ContractError(path + ": scale takes exactly one argument");
      return;
    default:
      if (e.args.empty()) throw ContractError(path + ": '" + kind_name(e.kind) + "' needs arguments");
  }
}

inline std::string child_path(const std::string& path, std::size_t i) {
  return path + ".args[" + std::to_string(i) + "]";
}

template <class T>
T eval_maxdef_at(const MaxDefExpr& e, const Matrix<T>& x, const std::string& path) {
  using K = MaxDefExpr::Kind;
  check_arity(e, path);
  switch (e.kind) {
    case K::constant:
      return scalar_traits<T>::from_rational(e.value);
    case K::variable:
      return eval_monomial(Monomial::of(e.var), x);
    case K::polynomial:
      return eval_poly(e.poly, x);
    case K::scale:
      return scalar_traits<T>::from_rational(e.value) * eval_maxdef_at(e.args[0], x, child_path(path, 0));
    default:
      break;
  }
  T acc = eval_maxdef_at(e.args[0], x, child_path(path, 0));
  for (std::size_t i = 1; i < e.args.size(); ++i) {
    const T v = eval_maxdef_at(e.args[i], x, child_path(path, i));
    switch (e.kind) {
      case K::sum:
        acc += v;
        break;
      case K::product:
        acc *= v;
        break;
      case K::max:
        acc = std::max(acc, v);
        break;
      case K::min:
        acc = -std::max(T(-acc), T(-v));
        break;
      default:
        break;
    }
  }
  return acc;
}

}  // namespace detail

template <class T>
T eval_maxdef(const MaxDefExpr& e, const Matrix<T>& x) {
  return detail::eval_maxdef_at(e, x, "$");
}

/// True when the subtree contains no max or min.
inline bool is_pure(const MaxDefExpr& e) {
  if (e.kind == MaxDefExpr::Kind::max || e.kind == MaxDefExpr::Kind::min) return false;
  return std::all_of(e.args.begin(), e.args.end(), [](const MaxDefExpr& a) { return is_pure(a); });
}

/// Polynomial of a max/min-free subtree.
inline Polynomial to_polynomial(const MaxDefExpr& e, const std::string& path = "$") {
  using K = MaxDefExpr::Kind;
  detail::check_arity(e, path);
  switch (e.kind) {
    case K::constant:
      return Polynomial(e.value);
    case K::variable:
      return Polynomial::variable(e.var);
    case K::polynomial:
      return e.poly;
    case K::scale:
      return e.value * to_polynomial(e.args[0], detail::child_path(path, 0));
    case K::sum: {
      Polynomial acc;
      for (std::size_t i = 0; i < e.args.size(); ++i) acc = acc + to_polynomial(e.args[i], detail::child_path(path, i));
      return acc;
    }
    case K::product: {
      Polynomial acc(Rational(1));
      for (std::size_t i = 0; i < e.args.size(); ++i) acc = acc * to_polynomial(e.args[i], detail::child_path(path, i));
      return acc;
    }
    default:
      throw ContractError(path + ": '" + kind_name(e.kind) + "' is not polynomial");
  }
}

namespace detail {

inline PBForm normalize_at(const MaxDefExpr& e, const std::string& path);

/// Splits product arguments into one polynomial factor and the lattice
/// arguments; more than one lattice argument is outside the supported fragment.
inline std::pair<Polynomial, const MaxDefExpr*> split_product(const MaxDefExpr& e, Polynomial factor,
                                                              const std::string& path) {
  const MaxDefExpr* lattice = nullptr;
  for (std::size_t i = 0; i < e.args.size(); ++i) {
    const auto& a = e.args[i];
    if (is_pure(a)) {
      factor = factor * to_polynomial(a, child_path(path, i));
    } else if (lattice) {
      throw ContractError("unsupported product at " + path +
                          ": more than one factor contains max/min");
    } else {
      lattice = &a;
    }
  }
  return {std::move(factor), lattice};
}

inline PBForm multiply_at(const Polynomial& factor, const MaxDefExpr& e, const std::string& path);

/// factor * y^+ via x y^+ = max(min(xy, (x^2+1) y), min(0, -(x^2+1) y)), where
/// `xy` is factor * y already in PB form.
inline PBForm times_positive_part(const Polynomial& factor, const PBForm& xy, const PBForm& y) {
  const Polynomial lift = factor * factor + Polynomial(Rational(1));
  const PBForm lifted = pb_scale_positive(y, lift);
  return pb_max(pb_min(xy, lifted), pb_min(PBForm(Polynomial{}), pb_negate(lifted)));
}

inline PBForm multiply_at(const Polynomial& factor, const MaxDefExpr& e, const std::string& path) {
  using K = MaxDefExpr::Kind;
  check_arity(e, path);
  if (factor.is_zero_poly()) return PBForm(Polynomial{});
  if (is_pure(e)) return PBForm(factor * to_polynomial(e, path));
  if (factor.degree() == 0) return pb_scale(normalize_at(e, path), factor.constant_term());
  switch (e.kind) {
    case K::sum: {
      PBForm acc = multiply_at(factor, e.args[0], child_path(path, 0));
      for (std::size_t i = 1; i < e.args.size(); ++i) {
        acc = pb_add(acc, multiply_at(factor, e.args[i], child_path(path, i)));
      }
      return acc;
    }
    case K::scale:
      return multiply_at(e.value * factor, e.args[0], child_path(path, 0));
    case K::product: {
      auto [merged, lattice] = split_product(e, factor, path);
      return multiply_at(merged, *lattice, path);
    }
    case K::max:
    case K::min: {
      // Fold left: combine(A, B) with A the accumulated prefix.
      PBForm acc_form = normalize_at(e.args[0], child_path(path, 0));
      PBForm acc_times = multiply_at(factor, e.args[0], child_path(path, 0));
      for (std::size_t i = 1; i < e.args.size(); ++i) {
        const std::string cp = child_path(path, i);
        const PBForm b_form = normalize_at(e.args[i], cp);
        const PBForm b_times = multiply_at(factor, e.args[i], cp);
        if (e.kind == K::max) {
          // P max(A,B) = P A + P (B - A)^+
          const PBForm y = pb_add(b_form, pb_negate(acc_form));
          const PBForm xy = pb_add(b_times, pb_negate(acc_times));
          acc_times = pb_add(acc_times, times_positive_part(factor, xy, y));
          acc_form = pb_max(acc_form, b_form);
        } else {
          // P min(A,B) = P A - P (A - B)^+
          const PBForm y = pb_add(acc_form, pb_negate(b_form));
          const PBForm xy = pb_add(acc_times, pb_negate(b_times));
          acc_times = pb_add(acc_times, pb_negate(times_positive_part(factor, xy, y)));
          acc_form = pb_min(acc_form, b_form);
        }
      }
      return acc_times;
    }
    default:
      throw ContractError(path + ": unexpected node");
  }
}

inline PBForm normalize_at(const MaxDefExpr& e, const std::string& path) {
  using K = MaxDefExpr::Kind;
  check_arity(e, path);
  if (is_pure(e)) return PBForm(to_polynomial(e, path));
  switch (e.kind) {
    case K::sum: {
      PBForm acc = normalize_at(e.args[0], child_path(path, 0));
      for (std::size_t i = 1; i < e.args.size(); ++i) acc = pb_add(acc, normalize_at(e.args[i], child_path(path, i)));
      return acc;
    }
    case K::max: {
      PBForm acc = normalize_at(e.args[0], child_path(path, 0));
      for (std::size_t i = 1; i < e.args.size(); ++i) acc = pb_max(acc, normalize_at(e.args[i], child_path(path, i)));
      return acc;
    }
    case K::min: {
      PBForm acc = normalize_at(e.args[0], child_path(path, 0));
      for (std::size_t i = 1; i < e.args.size(); ++i) acc = pb_min(acc, normalize_at(e.args[i], child_path(path, i)));
      return acc;
    }
    case K::scale:
      return pb_scale(normalize_at(e.args[0], child_path(path, 0)), e.value);
    case K::product: {
      auto [factor, lattice] = split_product(e, Polynomial(Rational(1)), path);
      return multiply_at(factor, *lattice, path);
    }
    default:
      throw ContractError(path + ": unexpected node");
  }
}

}  // namespace detail

/// Rewrites `e` as a max of mins of polynomials. Products must have at most
/// one factor containing max/min; otherwise ContractError names the node.
inline PBForm normalize_to_pbform(const MaxDefExpr& e) { return detail::normalize_at(e, "$"); }

}  // namespace splineformer
