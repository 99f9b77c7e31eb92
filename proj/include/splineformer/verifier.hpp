// Copyright 2026 The Splineformer Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "splineformer/compiler/compiled.hpp"
#include "splineformer/encoder.hpp"
#include "splineformer/errors.hpp"
#include "splineformer/pbform.hpp"
#include "splineformer/rational.hpp"

namespace splineformer {

/// Seeded rationals num/den with num uniform in [-10, 10] and den uniform in
/// [1, 7]. Each (seed, stream) pair is an independent reproducible sequence.
class RationalSampler {
 public:
  explicit RationalSampler(std::uint64_t seed, std::uint64_t stream = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    gen_.seed(seq);
  }

  Rational next() {
    const long num = static_cast<long>(gen_() % 21) - 10;
    const long den = static_cast<long>(gen_() % 7) + 1;
    return make_rational(num, den);
  }

  Matrix<Rational> matrix(std::size_t rows, std::size_t cols) {
    Matrix<Rational> m(rows, cols);
    for (auto& v : m.data()) v = next();
    return m;
  }

  /// Uniform integer in [0, bound).
  std::size_t index(std::size_t bound) { return static_cast<std::size_t>(gen_() % bound); }

 private:
  std::mt19937_64 gen_;
};

/// Anything that maps an input matrix to an output matrix exactly.
using RationalModel = std::function<Matrix<Rational>(const Matrix<Rational>&)>;

inline RationalModel model_of(const Encoder<Rational>& blocks) {
  return [blocks](const Matrix<Rational>& x) { return eval_encoder(blocks, x); };
}

inline RationalModel model_of(const CompiledEncoder& c) { return model_of(c.blocks); }

/// Encoder-decoder stack as a single-input model on the stacked matrix (X; Y)
/// with X taking the first `x_rows` rows.
inline RationalModel model_of(const EncDecStack<Rational>& stack, std::size_t x_rows) {
  return [stack, x_rows](const Matrix<Rational>& xy) {
    if (xy.rows() <= x_rows) throw ShapeError("stacked input " + xy.shape() + " has no decoder rows");
    return eval_encdec(stack, row_block(xy, 0, x_rows), row_block(xy, x_rows, xy.rows() - x_rows));
  };
}

struct EquivFailure {
  Matrix<Rational> input;
  Matrix<Rational> expected;
  Matrix<Rational> got;
};

struct EquivReport {
  std::size_t samples = 0;
  Rational max_abs_error;
  bool exact = true;
  std::optional<EquivFailure> first_failure;
};

/// Compares the model against the spline on seeded random inputs; sample k
/// draws from stream k.
inline EquivReport oracle_equiv(const RationalModel& model, const SplineGrid& oracle, std::size_t n_samples,
                                std::uint64_t seed) {
  check_spline_grid(oracle);
  EquivReport report;
  report.samples = n_samples;
  for (std::size_t k = 0; k < n_samples; ++k) {
    RationalSampler sampler(seed, k);
    const Matrix<Rational> x = sampler.matrix(oracle.n, oracle.p);
    const Matrix<Rational> expected = eval_spline(oracle, x);
    const Matrix<Rational> got = model(x);
    if (got.rows() != expected.rows() || got.cols() != expected.cols()) {
      throw ShapeError("model output " + got.shape() + " does not match spline output " + expected.shape());
    }
    bool same = true;
    for (std::size_t i = 0; i < got.rows(); ++i)
      for (std::size_t j = 0; j < got.cols(); ++j) {
        const Rational err = abs_value(Rational(got(i, j) - expected(i, j)));
        if (!is_zero(err)) same = false;
        if (err > report.max_abs_error) report.max_abs_error = err;
      }
    if (!same) {
      report.exact = false;
      if (!report.first_failure) report.first_failure = EquivFailure{x, expected, got};
    }
  }
  return report;
}

struct AutoregressiveWitness {
  Matrix<Rational> input;
  Matrix<Rational> altered;
  std::size_t prefix = 0;  // columns 0..prefix agree between the inputs
  std::size_t column = 0;  // output column that differs
};

struct AutoregressiveReport {
  std::size_t trials = 0;
  bool passed = true;
  std::optional<AutoregressiveWitness> witness;
};

/// Resamples the columns after a random prefix and checks that the output
/// prefix does not move.
inline AutoregressiveReport autoregressive_check(const RationalModel& model, std::size_t n, std::size_t p,
                                                 std::size_t trials, std::uint64_t seed) {
  if (p < 2) throw ContractError("autoregressive check needs at least two columns");
  AutoregressiveReport report;
  report.trials = trials;
  for (std::size_t t = 0; t < trials && report.passed; ++t) {
    RationalSampler sampler(seed, t);
    const Matrix<Rational> x = sampler.matrix(n, p);
    const std::size_t j = sampler.index(p - 1);
    Matrix<Rational> x2 = x;
    bool changed = false;
    while (!changed) {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = j + 1; c < p; ++c) {
          x2(i, c) = sampler.next();
          changed = changed || x2(i, c) != x(i, c);
        }
    }
    const Matrix<Rational> y = model(x);
    const Matrix<Rational> y2 = model(x2);
    for (std::size_t c = 0; c <= j && c < y.cols() && report.passed; ++c)
      for (std::size_t i = 0; i < y.rows(); ++i) {
        if (y(i, c) != y2(i, c)) {
          report.passed = false;
          report.witness = AutoregressiveWitness{x, x2, j, c};
          break;
        }
      }
  }
  return report;
}

struct DegreeReport {
  std::size_t trials = 0;
  std::vector<unsigned> degrees;
  /// Trials whose differences never vanished up to max_deg (degree > max_deg).
  std::vector<bool> saturated;
  unsigned modal = 0;
  unsigned max_degree = 0;
  unsigned max_deg = 0;
  unsigned long long bound = 0;
  bool bound_satisfied = false;
};

/// Samples along random lines X0 + t h D with h = 1/1000 and reads the degree
/// off the highest nonvanishing forward difference; reports the mode over
/// trials (ties go to the larger degree).
inline DegreeReport estimate_degree(const RationalModel& model, std::size_t n, std::size_t p, unsigned max_deg,
                                    std::size_t trials, std::uint64_t seed, unsigned long long bound) {
  if (trials == 0) throw ContractError("degree estimation needs at least one trial");
  DegreeReport report;
  report.trials = trials;
  report.max_deg = max_deg;
  report.bound = bound;
  const Rational step = make_rational(1, 1000);
  const std::size_t points = max_deg + 2;
  for (std::size_t t = 0; t < trials; ++t) {
    RationalSampler sampler(seed, t);
    const Matrix<Rational> base = sampler.matrix(n, p);
    Matrix<Rational> dir = sampler.matrix(n, p);
    while (std::all_of(dir.data().begin(), dir.data().end(), [](const Rational& v) { return is_zero(v); })) {
      dir = sampler.matrix(n, p);
    }
    std::vector<Matrix<Rational>> values;
    values.reserve(points);
    for (std::size_t k = 0; k < points; ++k) {
      values.push_back(model(add(base, scale(dir, Rational(step * static_cast<long>(k))))));
    }
    unsigned deg = 0;
    for (std::size_t order = 1; order < points; ++order) {
      for (std::size_t k = 0; k + order < points; ++k) values[k] = subtract(values[k + 1], values[k]);
      const bool nonzero = std::any_of(values[0].data().begin(), values[0].data().end(),
                                       [](const Rational& v) { return !is_zero(v); });
      if (nonzero) deg = static_cast<unsigned>(order);
    }
    report.degrees.push_back(deg);
    report.saturated.push_back(deg > max_deg);
  }
  std::map<unsigned, std::size_t> counts;
  for (unsigned d : report.degrees) ++counts[d];
  std::size_t best = 0;
  for (const auto& [d, c] : counts) {
    if (c >= best) {
      best = c;
      report.modal = d;
    }
  }
  report.max_degree = *std::max_element(report.degrees.begin(), report.degrees.end());
  report.bound_satisfied = report.modal <= bound;
  return report;
}

/// Degree bound of a t-block encoder: 3^t.
inline unsigned long long encoder_degree_bound(std::size_t t) {
  unsigned long long b = 1;
  for (std::size_t i = 0; i < t; ++i) b *= 3;
  return b;
}

/// Degree bound of an encoder-decoder with s encoder blocks and t stages:
/// 3^(t+s) + 3^t - 3^s.
inline unsigned long long encdec_degree_bound(std::size_t s, std::size_t t) {
  return encoder_degree_bound(t + s) + encoder_degree_bound(t) - encoder_degree_bound(s);
}

/// ReLU encoder with its attention activation replaced; networks stay ReLU.
/// F is the float backend the smoothed copy runs on.
template <class F>
class BasicSmoothedModel {
 public:
  BasicSmoothedModel(Encoder<Rational> original, Activation activation)
      : original_(std::move(original)), activation_(activation) {
    if (activation.kind == ActivationKind::relu) throw ContractError("smoothing needs softmax or softplus");
    if (activation.kind == ActivationKind::softplus && !(activation.beta > 0)) {
      throw ContractError("softplus beta must be positive");
    }
    smoothed_ = encoder_cast<F>(original_);
    for (auto& block : smoothed_) {
      for (auto& h : block.attention.heads) {
        if (h.activation.kind != ActivationKind::relu) throw ContractError("smoothing expects a ReLU-attention model");
        h.activation = activation;
      }
    }
  }

  const Activation& activation() const { return activation_; }
  const Encoder<F>& smoothed() const { return smoothed_; }

  Matrix<F> operator()(const Matrix<F>& x) const { return eval_encoder(smoothed_, x); }

  /// The ReLU model the swap started from, unchanged.
  const Encoder<Rational>& swap_back() const { return original_; }

 private:
  Encoder<Rational> original_;
  Encoder<F> smoothed_;
  Activation activation_;
};

using SmoothedModel = BasicSmoothedModel<double>;

inline SmoothedModel smooth_swap(const Encoder<Rational>& model, Activation activation) {
  return SmoothedModel(model, activation);
}

inline SmoothedModel smooth_swap(const CompiledEncoder& model, Activation activation) {
  return SmoothedModel(model.blocks, activation);
}

struct ConvergenceRow {
  double beta = 0;        // +inf is the ReLU model itself
  double max_error = 0;   // may underflow to 0 when computed on WideFloat
  double log10_error = -std::numeric_limits<double>::infinity();
};

/// Max abs error of the softplus-swapped model (run on float backend F)
/// against the exact ReLU model, one row per beta in ascending order.
template <class F = double>
std::vector<ConvergenceRow> smooth_convergence_table(const Encoder<Rational>& model,
                                                     const std::vector<Matrix<Rational>>& samples,
                                                     std::vector<double> betas) {
  using std::fabs;
  using std::log10;
  std::sort(betas.begin(), betas.end());
  std::vector<Matrix<F>> reference, inputs;
  if (!betas.empty()) {
    for (const auto& x : samples) {
      reference.push_back(matrix_cast<F>(eval_encoder(model, x)));
      inputs.push_back(matrix_cast<F>(x));
    }
  }
  std::vector<ConvergenceRow> table;
  for (double beta : betas) {
    ConvergenceRow row{beta, 0.0, -std::numeric_limits<double>::infinity()};
    if (!std::isinf(beta)) {
      const BasicSmoothedModel<F> smooth(model, Activation::softplus(beta));
      F worst = 0;
      for (std::size_t k = 0; k < inputs.size(); ++k) {
        const Matrix<F> got = smooth(inputs[k]);
        for (std::size_t i = 0; i < got.data().size(); ++i) {
          worst = std::max(worst, F(fabs(F(got.data()[i] - reference[k].data()[i]))));
        }
      }
      row.max_error = static_cast<double>(worst);
      if (worst > 0) row.log10_error = static_cast<double>(log10(worst));
    }
    table.push_back(row);
  }
  return table;
}

/// Compared on log10_error, so errors below the double range still order.
inline bool strictly_decreasing(const std::vector<ConvergenceRow>& table) {
  for (std::size_t i = 1; i < table.size(); ++i) {
    if (!(table[i].log10_error < table[i - 1].log10_error)) return false;
  }
  return true;
}

/// Upper bound on max |smoothed(x) - relu_model(x)| for the softplus(beta)
/// swap at one input. Each attention weight picks up a gap of at most ln2/beta
/// (softplus and ReLU are both 1-Lipschitz); entrywise perturbation bounds are
/// carried through Q, K, V, the scores, the value product and the ReLU network
/// of every block, starting from an exact input. Float rounding of the model
/// itself is not included.
inline double softplus_error_bound(const Encoder<Rational>& model, const Matrix<Rational>& x, double beta) {
  if (!(beta > 0)) throw ContractError("softplus beta must be positive");
  const double gap = std::log(2.0) / beta;
  auto abs_of = [](Matrix<double> m) {
    for (auto& v : m.data()) v = std::fabs(v);
    return m;
  };
  Matrix<Rational> h = x;
  Matrix<double> err(x.rows(), x.cols());
  for (const auto& block : model) {
    const Matrix<double> hd = matrix_cast<double>(h);
    std::vector<Matrix<double>> parts;
    for (const auto& head : block.attention.heads) {
      const AttentionHead<double> hh = head_cast<double>(head);
      const Matrix<double> q = add(matmul(hh.query_weight, hd), hh.query_bias);
      const Matrix<double> k = add(matmul(hh.key_weight, hd), hh.key_bias);
      const Matrix<double> v = add(matmul(hh.value_weight, hd), hh.value_bias);
      const Matrix<double> dq = matmul(abs_of(hh.query_weight), err);
      const Matrix<double> dk = matmul(abs_of(hh.key_weight), err);
      const Matrix<double> dv = matmul(abs_of(hh.value_weight), err);
      const double factor = hh.scaled ? 1.0 / std::sqrt(static_cast<double>(hh.key_dim())) : 1.0;
      const std::size_t p = hd.cols();
      Matrix<double> weight_hi(p, p), weight_err(p, p);
      for (std::size_t a = 0; a < p; ++a)
        for (std::size_t b = 0; b < p; ++b) {
          if (hh.masked && a > b) continue;
          double score = 0, ds = 0;
          for (std::size_t r = 0; r < k.rows(); ++r) {
            score += k(r, a) * q(r, b);
            ds += std::fabs(k(r, a)) * dq(r, b) + dk(r, a) * std::fabs(q(r, b)) + dk(r, a) * dq(r, b);
          }
          weight_err(a, b) = factor * ds + gap;
          weight_hi(a, b) = std::max(0.0, factor * score) + weight_err(a, b);
        }
      parts.push_back(add(matmul(dv, weight_hi), matmul(abs_of(v), weight_err)));
    }
    Matrix<double> d = stack_rows(parts);
    for (const auto& layer : block.ffn.layers) d = matmul(abs_of(matrix_cast<double>(layer.weight)), d);
    if (block.residual) d = add(d, err);
    err = std::move(d);
    h = eval_block(block, h);
  }
  double worst = 0;
  for (double v : err.data()) worst = std::max(worst, v);
  return worst;
}

struct SoftmaxCheck {
  std::size_t columns = 0;
  double max_sum_deviation = 0;
  bool entries_in_unit_interval = true;
  bool masked_entries_zero = true;
  bool outputs_finite = true;
};

/// Well-formedness of a softmax swap: every attention weight column of every
/// head is a probability vector (masked entries exactly zero) and outputs are
/// finite.
inline SoftmaxCheck softmax_column_check(const SmoothedModel& model, const std::vector<Matrix<Rational>>& samples) {
  SoftmaxCheck check;
  for (const auto& sample : samples) {
    Matrix<double> x = matrix_cast<double>(sample);
    for (const auto& block : model.smoothed()) {
      for (const auto& h : block.attention.heads) {
        const Matrix<double> w = attention_weights(h, x, x);
        for (std::size_t c = 0; c < w.cols(); ++c) {
          double sum = 0;
          for (std::size_t r = 0; r < w.rows(); ++r) {
            const double v = w(r, c);
            sum += v;
            if (!(v >= 0 && v <= 1)) check.entries_in_unit_interval = false;
            if (h.masked && r > c && v != 0.0) check.masked_entries_zero = false;
          }
          check.max_sum_deviation = std::max(check.max_sum_deviation, std::fabs(sum - 1.0));
          ++check.columns;
        }
      }
      x = eval_block(block, x);
    }
    for (double v : x.data()) {
      if (!std::isfinite(v)) check.outputs_finite = false;
    }
  }
  return check;
}

}  // namespace splineformer
