// Copyright 2026 The Splineformer Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "splineformer/rational.hpp"

namespace splineformer {

/// Binary floating point with 500 significant decimal digits. Used where a
/// quantity of size around exp(-1000) must stay distinguishable from rounding
/// noise (softplus smoothing at large beta).
using WideFloat = boost::multiprecision::number<boost::multiprecision::cpp_bin_float<500>,
                                                boost::multiprecision::et_off>;

inline WideFloat abs_value(const WideFloat& x) { return abs(x); }

template <>
struct scalar_traits<WideFloat> {
  static constexpr bool exact = false;
  static constexpr bool is_float = true;
  static constexpr const char* name = "wide-float";
  static WideFloat from_rational(const Rational& q) {
    return WideFloat(q.get_num().get_str()) / WideFloat(q.get_den().get_str());
  }
};

}  // namespace splineformer
