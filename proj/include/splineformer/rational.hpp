// Copyright 2026 The Splineformer Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <gmpxx.h>

#include <cmath>
#include <string>
#include <string_view>
#include <type_traits>

#include "splineformer/errors.hpp"

namespace splineformer {

/// Exact rational scalar. GMP keeps the fraction canonical (den > 0, reduced).
using Rational = mpq_class;

/// Parses "p/q" or "p" into a canonical rational.
inline Rational parse_rational(std::string_view text) {
  if (text.empty()) throw ParseError("empty rational literal");
  const auto slash = text.find('/');
  auto digits_ok = [](std::string_view s, bool allow_sign) {
    if (s.empty()) return false;
    std::size_t i = 0;
    if (allow_sign && (s[0] == '-' || s[0] == '+')) i = 1;
    if (i == s.size()) return false;
    for (; i < s.size(); ++i) {
      if (s[i] < '0' || s[i] > '9') return false;
    }
    return true;
  };
  const std::string_view num = text.substr(0, slash);
  const std::string_view den =
      slash == std::string_view::npos ? std::string_view{"1"} : text.substr(slash + 1);
  if (!digits_ok(num, true) || !digits_ok(den, false)) {
    throw ParseError("invalid rational literal '" + std::string(text) + "'");
  }
  mpz_class n(std::string(num[0] == '+' ? num.substr(1) : num), 10);
  mpz_class d(std::string(den), 10);
  if (d == 0) throw ParseError("zero denominator in '" + std::string(text) + "'");
  Rational q(n, d);
  q.canonicalize();
  return q;
}

/// num/den reduced to lowest terms.
inline Rational make_rational(long num, long den = 1) {
  if (den == 0) throw ParseError("zero denominator");
  Rational q(num, den);
  q.canonicalize();
  return q;
}

/// "p/q", or "p" when the denominator is one.
inline std::string to_string(const Rational& q) { return q.get_str(10); }

inline bool is_zero(const Rational& q) { return sgn(q) == 0; }
inline bool is_zero(double x) { return x == 0.0; }

template <class T>
bool is_zero(const T& x) {
  return x == T(0);
}

inline Rational abs_value(const Rational& q) { return abs(q); }
inline double abs_value(double x) { return std::fabs(x); }

/// Exact conversion of a finite double.
inline Rational rational_from_double(double x) {
  if (!std::isfinite(x)) throw ParseError("non-finite value cannot become a rational");
  return Rational(x);
}

template <class T>
struct scalar_traits;

template <>
struct scalar_traits<Rational> {
  static constexpr bool exact = true;
  static constexpr bool is_float = false;
  static constexpr const char* name = "rational";
  static Rational from_rational(const Rational& q) { return q; }
};

template <>
struct scalar_traits<double> {
  static constexpr bool exact = false;
  static constexpr bool is_float = true;
  static constexpr const char* name = "float";
  static double from_rational(const Rational& q) { return q.get_d(); }
};

template <class T>
inline constexpr bool is_float_backend_v = [] {
  if constexpr (requires { scalar_traits<T>::is_float; }) {
    return scalar_traits<T>::is_float;
  } else {
    return false;
  }
}();

}  // namespace splineformer
