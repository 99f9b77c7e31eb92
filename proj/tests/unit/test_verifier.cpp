// Copyright 2026 The Splineformer Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "test_support.hpp"

namespace {

using namespace sft;

const SplineGrid kCube{1, 1, {{PBForm(px(1, 1) * px(1, 1) * px(1, 1))}}};

Encoder<Rational> cube_model() { return {single_head_block(cubic_head())}; }

RationalModel power_model(unsigned k) {
  return [k](const Matrix<Rational>& x) {
    Matrix<Rational> out(1, 1);
    out(0, 0) = power(x(0, 0), k);
    return out;
  };
}

/// Every weight and bias entry of an encoder, as pointers into it.
std::vector<Rational*> all_weights(Encoder<Rational>& enc) {
  std::vector<Rational*> out;
  auto add = [&](Matrix<Rational>& m) {
    for (auto& v : m.data()) out.push_back(&v);
  };
  for (auto& b : enc) {
    for (auto& h : b.attention.heads) {
      add(h.query_weight);
      add(h.query_bias);
      add(h.key_weight);
      add(h.key_bias);
      add(h.value_weight);
      add(h.value_bias);
    }
    for (auto& l : b.ffn.layers) {
      add(l.weight);
      add(l.bias);
    }
  }
  return out;
}

TEST(Sampler, IsDeterministicAndInRange) {
  RationalSampler a(9, 2), b(9, 2), c(9, 3);
  bool differs = false;
  for (int i = 0; i < 500; ++i) {
    const Rational v = a.next();
    EXPECT_EQ(v, b.next());
    differs = differs || v != c.next();
    EXPECT_LE(abs_value(v), Rational(10));
    EXPECT_LE(v.get_den(), 7);
  }
  EXPECT_TRUE(differs);
}

TEST(OracleEquiv, CubicHeadIsExact) {
  const auto rep = oracle_equiv(model_of(cube_model()), kCube, 1000, 42);
  EXPECT_TRUE(rep.exact);
  EXPECT_EQ(rep.samples, 1000u);
  EXPECT_EQ(rep.max_abs_error, Rational(0));
  EXPECT_FALSE(rep.first_failure.has_value());
}

TEST(OracleEquiv, CorruptedValueWeightGivesWitness) {
  auto enc = cube_model();
  enc[0].attention.heads[0].value_weight(0, 0) = Rational(2);
  const auto rep = oracle_equiv(model_of(enc), kCube, 100, 42);
  ASSERT_FALSE(rep.exact);
  ASSERT_TRUE(rep.first_failure.has_value());
  const auto& w = *rep.first_failure;
  EXPECT_EQ(w.expected, eval_spline(kCube, w.input));
  EXPECT_EQ(w.got, eval_encoder(enc, w.input));
  EXPECT_NE(w.expected, w.got);
  EXPECT_GT(rep.max_abs_error, Rational(0));
}

TEST(OracleEquiv, ZeroFunction) {
  const SplineGrid zero{1, 1, {{PBForm(Polynomial{})}}};
  const RationalModel m = [](const Matrix<Rational>&) { return Matrix<Rational>(1, 1); };
  EXPECT_TRUE(oracle_equiv(m, zero, 10, 1).exact);
}

TEST(OracleEquiv, SeedFixesTheWitness) {
  auto enc = cube_model();
  enc[0].attention.heads[0].key_bias(0, 0) = Rational(1);
  const auto a = oracle_equiv(model_of(enc), kCube, 50, 5);
  const auto b = oracle_equiv(model_of(enc), kCube, 50, 5);
  ASSERT_TRUE(a.first_failure && b.first_failure);
  EXPECT_EQ(a.first_failure->input, b.first_failure->input);
  EXPECT_EQ(a.max_abs_error, b.max_abs_error);
}

TEST(OracleEquiv, CatchesEveryFunctionChangingWeightCorruption) {
  // A corruption changes the function iff it moves the output somewhere on a
  // grid of inputs; oracle_equiv must flag exactly those.
  const SplineGrid sq{1, 1, {{PBForm(px(1, 1) * px(1, 1))}}};
  const auto enc = compile_spline(sq);
  std::vector<Matrix<Rational>> grid;
  for (long num = -12; num <= 12; ++num) grid.push_back(scalar(q(num, 4)));
  const std::size_t count = [&] {
    auto copy = enc.blocks;
    return all_weights(copy).size();
  }();
  std::size_t changing = 0;
  for (std::size_t k = 0; k < count; ++k) {
    auto copy = enc.blocks;
    *all_weights(copy)[k] += 1;
    bool differs = false;
    for (const auto& x : grid) differs = differs || eval_encoder(copy, x) != eval_spline(sq, x);
    changing += differs;
    EXPECT_EQ(!oracle_equiv(model_of(copy), sq, 200, 11).exact, differs) << "weight " << k;
  }
  EXPECT_GT(changing, 0u);
}

TEST(Autoregressive, MaskedHeadPasses) {
  Gen g(80);
  const Encoder<Rational> enc{single_head_block(random_head(g, 2, 3, 2, 2, true))};
  const auto rep = autoregressive_check(model_of(enc), 2, 3, 100, 3);
  EXPECT_TRUE(rep.passed);
  EXPECT_EQ(rep.trials, 100u);
  EXPECT_FALSE(rep.witness.has_value());
}

TEST(Autoregressive, UnmaskedHeadLeaksWithWitness) {
  Gen g(81);
  const Encoder<Rational> enc{single_head_block(random_head(g, 2, 3, 2, 2, false))};
  const auto rep = autoregressive_check(model_of(enc), 2, 3, 100, 3);
  ASSERT_FALSE(rep.passed);
  ASSERT_TRUE(rep.witness.has_value());
  const auto& w = *rep.witness;
  for (std::size_t j = 0; j <= w.prefix; ++j)
    for (std::size_t i = 0; i < 2; ++i) EXPECT_EQ(w.input(i, j), w.altered(i, j));
  EXPECT_LE(w.column, w.prefix);
  EXPECT_NE(eval_encoder(enc, w.input)(0, w.column) == eval_encoder(enc, w.altered)(0, w.column) &&
                eval_encoder(enc, w.input)(1, w.column) == eval_encoder(enc, w.altered)(1, w.column),
            true);
}

TEST(Autoregressive, NeedsTwoColumns) {
  EXPECT_THROW(autoregressive_check(model_of(cube_model()), 1, 1, 10, 1), ContractError);
}

TEST(EstimateDegree, KnownPolynomialsAreExactInEveryTrial) {
  for (unsigned k = 0; k <= 6; ++k) {
    const auto rep = estimate_degree(power_model(k), 1, 1, 8, 20, 4, 8);
    EXPECT_EQ(rep.modal, k);
    for (unsigned d : rep.degrees) EXPECT_EQ(d, k);
    EXPECT_TRUE(rep.bound_satisfied);
  }
}

TEST(EstimateDegree, SaturatesAboveMaxDeg) {
  const auto rep = estimate_degree(power_model(5), 1, 1, 3, 5, 4, 3);
  EXPECT_EQ(rep.modal, 4u);
  for (bool s : rep.saturated) EXPECT_TRUE(s);
  EXPECT_FALSE(rep.bound_satisfied);
}

TEST(EstimateDegree, CubicHeadHasDegreeThree) {
  const auto rep = estimate_degree(model_of(cube_model()), 1, 1, 10, 50, 42, encoder_degree_bound(1));
  EXPECT_EQ(rep.modal, 3u);
  EXPECT_TRUE(rep.bound_satisfied);
}

TEST(EstimateDegree, RandomEncodersRespectThreeToTheT) {
  Gen g(82);
  for (std::size_t t = 1; t <= 2; ++t) {
    Encoder<Rational> enc;
    for (std::size_t b = 0; b < t; ++b) enc.push_back(single_head_block(random_head(g, 2, 2, 2, 2)));
    const auto rep = estimate_degree(model_of(enc), 2, 2, 12, 20, 7, encoder_degree_bound(t));
    EXPECT_TRUE(rep.bound_satisfied) << "t=" << t << " modal=" << rep.modal;
  }
}

TEST(EstimateDegree, EncoderDecoderBound) {
  auto self = cubic_head();
  self.masked = true;
  const EncDecStack<Rational> stack{
      {single_head_block(cubic_head())},
      {EncDecStage<Rational>{{{self}}, {{cubic_head()}}, single_head_block(cubic_head()).ffn, false}}};
  const auto model = model_of(stack, 1);
  const auto rep = estimate_degree(model, 2, 1, 12, 20, 3, encdec_degree_bound(1, 1));
  EXPECT_TRUE(rep.bound_satisfied) << rep.modal;
}

TEST(EstimateDegree, ZeroTrialsIsAnError) {
  EXPECT_THROW(estimate_degree(power_model(1), 1, 1, 3, 0, 1, 1), ContractError);
}

TEST(DegreeBounds, ClosedForms) {
  EXPECT_EQ(encoder_degree_bound(0), 1u);
  EXPECT_EQ(encoder_degree_bound(1), 3u);
  EXPECT_EQ(encoder_degree_bound(3), 27u);
  EXPECT_EQ(encdec_degree_bound(1, 1), 9u);
  EXPECT_EQ(encdec_degree_bound(2, 1), 27u + 3u - 9u);
}

TEST(Smoothing, SwapKeepsOriginalAndRejectsRelu) {
  const auto enc = cube_model();
  const auto s = smooth_swap(enc, Activation::softplus(10));
  EXPECT_EQ(s.swap_back().size(), enc.size());
  EXPECT_EQ(s.swap_back()[0].attention.heads[0].value_weight, enc[0].attention.heads[0].value_weight);
  EXPECT_EQ(s.swap_back()[0].attention.heads[0].activation.kind, ActivationKind::relu);
  EXPECT_EQ(s.smoothed()[0].attention.heads[0].activation.kind, ActivationKind::softplus);
  EXPECT_THROW(smooth_swap(enc, Activation::relu()), ContractError);
  EXPECT_THROW(smooth_swap(enc, Activation::softplus(0)), ContractError);
}

TEST(Smoothing, SoftplusGapAtZeroInput) {
  // At x = 0 the cube head's only weight is softplus(0) = ln2 / beta and the value is 0.
  const auto s = smooth_swap(cube_model(), Activation::softplus(10));
  EXPECT_EQ(s(Matrix<double>{{0.0}})(0, 0), 0.0);
  const auto w = attention_weights(s.smoothed()[0].attention.heads[0], Matrix<double>{{0.0}}, Matrix<double>{{0.0}});
  EXPECT_NEAR(w(0, 0), std::log(2.0) / 10, 1e-15);
}

TEST(Smoothing, ConvergenceTableShape) {
  const auto enc = cube_model();
  std::vector<Matrix<Rational>> xs;
  RationalSampler s(1);
  for (int i = 0; i < 20; ++i) xs.push_back(s.matrix(1, 1));
  const double inf = std::numeric_limits<double>::infinity();
  const auto table = smooth_convergence_table(enc, xs, {8, 1, inf, 2, 4});
  ASSERT_EQ(table.size(), 5u);
  for (std::size_t i = 1; i < table.size(); ++i) EXPECT_LT(table[i - 1].beta, table[i].beta);
  for (std::size_t i = 1; i + 1 < table.size(); ++i) EXPECT_LE(table[i].max_error, table[i - 1].max_error);
  EXPECT_EQ(table.back().max_error, 0.0);
  EXPECT_TRUE(smooth_convergence_table(enc, xs, {}).empty());
}

TEST(Smoothing, WideFloatErrorsDecreaseAcrossDecades) {
  const auto enc = compile_spline(kCube).blocks;
  std::vector<Matrix<Rational>> xs;
  RationalSampler s(42);
  for (int i = 0; i < 20; ++i) xs.push_back(s.matrix(1, 1));
  const auto table = smooth_convergence_table<WideFloat>(enc, xs, {10, 100, 1000});
  ASSERT_EQ(table.size(), 3u);
  EXPECT_TRUE(strictly_decreasing(table));
  EXPECT_LT(table[2].log10_error, -100.0);
}

TEST(Smoothing, StrictlyDecreasingUsesLogScale) {
  const double ninf = -std::numeric_limits<double>::infinity();
  EXPECT_TRUE(strictly_decreasing({{1, 1e-3, -3}, {2, 0, -400}}));
  EXPECT_FALSE(strictly_decreasing({{1, 0, -400}, {2, 0, -400}}));
  EXPECT_FALSE(strictly_decreasing({{1, 0, ninf}, {2, 0, ninf}}));
  EXPECT_TRUE(strictly_decreasing({}));
}

TEST(Smoothing, ErrorBoundHoldsOnRandomInputs) {
  const auto enc = compile_spline(kCube).blocks;
  RationalSampler s(7);
  for (double beta : {10.0, 100.0, 1000.0}) {
    for (int i = 0; i < 10; ++i) {
      const auto x = s.matrix(1, 1);
      const auto row = smooth_convergence_table<WideFloat>(enc, {x}, {beta}).front();
      const double bound = softplus_error_bound(enc, x, beta);
      EXPECT_GT(bound, 0.0);
      EXPECT_LE(row.log10_error, std::log10(bound)) << "beta " << beta;
    }
  }
  EXPECT_THROW(softplus_error_bound(enc, Matrix<Rational>(1, 1), 0.0), ContractError);
}

TEST(Smoothing, ErrorBoundIsLooseButFiniteOnRandomHeads) {
  Gen g(83);
  for (int t = 0; t < 10; ++t) {
    const Encoder<Rational> enc{single_head_block(random_head(g, 2, 2, 2, 2, g.coin()))};
    const auto x = g.matrix(2, 2);
    const double beta = 50.0;
    const auto row = smooth_convergence_table<WideFloat>(enc, {x}, {beta}).front();
    EXPECT_LE(row.max_error, softplus_error_bound(enc, x, beta));
  }
}

TEST(Smoothing, SoftmaxColumnsOfMaskedModel) {
  Gen g(84);
  const Encoder<Rational> enc{single_head_block(random_head(g, 2, 3, 2, 2, true)),
                              single_head_block(random_head(g, 2, 3, 1, 2, true))};
  const auto s = smooth_swap(enc, Activation::softmax());
  std::vector<Matrix<Rational>> xs;
  for (int i = 0; i < 50; ++i) xs.push_back(g.matrix(2, 3));
  const auto check = softmax_column_check(s, xs);
  EXPECT_EQ(check.columns, 50u * 2u * 3u);
  EXPECT_TRUE(check.masked_entries_zero);
  EXPECT_TRUE(check.entries_in_unit_interval);
  EXPECT_TRUE(check.outputs_finite);
  EXPECT_LE(check.max_sum_deviation, 1e-12);
}

}  // namespace
