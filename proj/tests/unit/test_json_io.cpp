// Copyright 2026 The Splineformer Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "splineformer/json_io.hpp"
#include "test_support.hpp"

namespace {

using namespace sft;
using splineformer::json;

TEST(JsonScalars, RationalsAreStrings) {
  EXPECT_EQ(scalar_to_json(q(3, 6)), json("1/2"));
  EXPECT_EQ(scalar_from_json<Rational>(json("-4/6")), q(-2, 3));
  EXPECT_EQ(scalar_from_json<Rational>(json(7)), q(7));
  EXPECT_THROW(scalar_from_json<Rational>(json(0.5)), ParseError);
  EXPECT_THROW(scalar_from_json<Rational>(json::array()), ParseError);
}

TEST(JsonScalars, NegativeInfinityRoundTrips) {
  const double ninf = -std::numeric_limits<double>::infinity();
  EXPECT_EQ(scalar_to_json(ninf), json("-inf"));
  EXPECT_EQ(scalar_from_json<double>(json("-inf")), ninf);
  EXPECT_EQ(scalar_from_json<double>(json("1/4")), 0.25);
  const Matrix<double> m{{1.5, ninf}};
  EXPECT_EQ(matrix_from_json<double>(matrix_to_json(m)), m);
}

TEST(JsonMatrix, RaggedRowsAreRejected) {
  EXPECT_THROW(matrix_from_json<Rational>(json::parse(R"([["1","2"],["3"]])")), ParseError);
  EXPECT_THROW(matrix_from_json<Rational>(json::array()), ParseError);
  EXPECT_EQ(column_from_json<Rational>(json::parse(R"(["1","2"])")), column_of({1, 2}));
  EXPECT_THROW(column_from_json<Rational>(json::parse(R"([["1","2"]])")), ParseError);
}

TEST(JsonWeights, HeadUsesConventionalFieldNames) {
  const json j = head_to_json(cubic_head());
  for (const char* key : {"A_Q", "B_Q", "A_K", "B_K", "A_V", "B_V"}) EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_EQ(j.at("activation"), json("relu"));
  json missing = j;
  missing.erase("A_V");
  EXPECT_THROW(head_from_json<Rational>(missing), ParseError);
}

TEST(JsonWeights, RandomEncodersRoundTrip) {
  Gen g(90);
  for (int t = 0; t < 20; ++t) {
    Encoder<Rational> enc;
    const std::size_t blocks = g.integer(1, 3);
    for (std::size_t b = 0; b < blocks; ++b) {
      auto h = random_head(g, 2, 3, 2, 2, g.coin());
      auto block = single_head_block(h);
      block.ffn = random_ffn(g, {2, 3, 2});
      block.residual = g.coin();
      enc.push_back(block);
    }
    const json j = encoder_to_json(enc);
    const auto back = encoder_from_json<Rational>(json::parse(j.dump()));
    ASSERT_EQ(back.size(), enc.size());
    EXPECT_EQ(encoder_to_json(back), j);
    const auto x = g.matrix(2, 3);
    EXPECT_EQ(eval_encoder(back, x), eval_encoder(enc, x));
  }
}

TEST(JsonWeights, SoftplusAndScaledFlagsSurvive) {
  auto h = cubic_head();
  h.activation = Activation::softplus(25);
  h.scaled = true;
  const auto back = head_from_json<double>(head_to_json(h));
  EXPECT_EQ(back.activation, Activation::softplus(25));
  EXPECT_TRUE(back.scaled);
  json bad = head_to_json(cubic_head());
  bad["activation"] = "softplus";
  EXPECT_THROW(head_from_json<Rational>(bad), ParseError);
  bad["activation"] = "gelu";
  EXPECT_THROW(head_from_json<Rational>(bad), ParseError);
}

TEST(JsonWeights, EncoderDecoderIsRecognized) {
  auto self = cubic_head();
  self.masked = true;
  const EncDecStack<Rational> stack{{single_head_block(cubic_head())},
                                    {EncDecStage<Rational>{{{self}}, {{cubic_head()}}, single_head_block(cubic_head()).ffn, false}}};
  const auto model = weights_from_json<Rational>(encdec_to_json(stack));
  ASSERT_TRUE(std::holds_alternative<EncDecStack<Rational>>(model));
  const auto& back = std::get<EncDecStack<Rational>>(model);
  EXPECT_EQ(eval_encdec(back, scalar(2), scalar(3)), eval_encdec(stack, scalar(2), scalar(3)));
  EXPECT_TRUE(std::holds_alternative<Encoder<Rational>>(weights_from_json<Rational>(encoder_to_json(Encoder<Rational>{}))));
  EXPECT_THROW(weights_from_json<Rational>(json::array()), ParseError);
}

TEST(JsonSpline, FullForm) {
  const auto g = spline_from_json(json::parse(R"({
    "n": 1, "p": 1,
    "outputs": [[{"op": "max", "args": [{"op": "var", "name": "x_1_1"},
                                        {"op": "scale", "factor": "-1", "args": [{"op": "var", "name": "x_1_1"}]}]}]]
  })"));
  EXPECT_EQ(g.n, 1u);
  EXPECT_EQ(g.p, 1u);
  EXPECT_EQ(eval_spline(g, scalar(-3)), scalar(3));
}

TEST(JsonSpline, BareGridInfersShape) {
  const auto g = spline_from_json(json::parse(R"([
    [{"op": "var", "name": "x_1_1"}, {"op": "product", "args": [{"op": "var", "name": "x_1_1"}, {"op": "var", "name": "x_2_2"}]}]
  ])"));
  EXPECT_EQ(g.n, 2u);
  EXPECT_EQ(g.p, 2u);
  EXPECT_EQ(eval_spline(g, Matrix<Rational>{{2, 7}, {9, 5}}), row_of({2, 10}));
}

TEST(JsonSpline, SingleExpression) {
  const auto g = spline_from_json(json::parse(R"({"op": "min", "args": [
    {"op": "poly", "terms": [{"coef": "1/2", "exps": {"x_1_1": 2}}]},
    {"op": "const", "value": "3"}]})"));
  EXPECT_EQ(g.n, 1u);
  EXPECT_EQ(g.p, 1u);
  EXPECT_EQ(eval_spline(g, scalar(2)), scalar(2));
  EXPECT_EQ(eval_spline(g, scalar(4)), scalar(3));
  EXPECT_THROW(spline_from_json(json::parse(R"({"op": "var", "name": "x_1_2"})")), ParseError);
}

TEST(JsonSpline, ErrorsNameTheLocation) {
  try {
    spline_from_json(json::parse(R"({"n": 1, "p": 1, "outputs": [[{"op": "max", "args": [{"op": "cos"}]}]]})"));
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("outputs[0][0].args[0]"), std::string::npos) << msg;
    EXPECT_NE(msg.find("cos"), std::string::npos) << msg;
  }
  EXPECT_THROW(spline_from_json(json::parse(R"({"op": "var", "name": "y"})")), ParseError);
  EXPECT_THROW(spline_from_json(json::parse(R"({"op": "max", "args": []})")), ParseError);
  EXPECT_THROW(spline_from_json(json::parse(R"({"outputs": []})")), ParseError);
}

TEST(JsonSpline, RandomFormsRoundTrip) {
  Gen g(91);
  for (int t = 0; t < 30; ++t) {
    std::vector<PBForm::Row> rows(g.integer(1, 3));
    for (auto& r : rows) {
      r.resize(g.integer(1, 3));
      for (auto& poly : r) poly = random_affine(g, 2, 2) * random_affine(g, 2, 2, 2);
    }
    const SplineGrid f{2, 2, {{PBForm(rows), PBForm(random_affine(g, 2, 2))}}};
    const auto back = spline_from_json(json::parse(spline_to_json(f).dump()));
    for (int s = 0; s < 10; ++s) {
      const auto x = g.matrix(2, 2);
      EXPECT_EQ(eval_spline(back, x), eval_spline(f, x));
    }
  }
}

TEST(JsonLayout, RowsAreOneBasedAndMatchTheEncoder) {
  const SplineGrid f{1, 2, {{PBForm(px(1, 1) * px(1, 2)), PBForm(px(1, 2))}}};
  const auto enc = compile_spline(f);
  const json j = layout_to_json(enc);
  EXPECT_EQ(j.at("mode"), json(to_string(enc.mode)));
  EXPECT_EQ(j.at("provenance").size(), enc.blocks.size());
  ASSERT_EQ(j.at("rows").size(), enc.layout.entries().size());
  for (const auto& r : j.at("rows")) {
    EXPECT_GE(r.at("row").get<std::size_t>(), 1u);
    EXPECT_GE(r.at("column").get<std::size_t>(), 1u);
    EXPECT_LE(r.at("column").get<std::size_t>(), 2u);
  }
  const json stats = stats_to_json(enc);
  EXPECT_EQ(stats.at("blocks"), json(enc.blocks.size()));
}

TEST(JsonReports, EquivFailureCarriesWitness) {
  auto enc = Encoder<Rational>{single_head_block(cubic_head())};
  enc[0].attention.heads[0].value_bias(0, 0) = Rational(1);
  const SplineGrid cube{1, 1, {{PBForm(px(1, 1) * px(1, 1) * px(1, 1))}}};
  const json j = equiv_report_to_json(oracle_equiv(model_of(enc), cube, 20, 4), 4);
  EXPECT_EQ(j.at("exact"), json(false));
  EXPECT_EQ(j.at("seed"), json(4));
  EXPECT_TRUE(j.contains("first_failure"));
  EXPECT_TRUE(j.at("first_failure").contains("X"));
}

TEST(JsonReports, ConvergenceRowsCarryLogError) {
  const double inf = std::numeric_limits<double>::infinity();
  const json j = convergence_to_json({{10, 0.5, std::log10(0.5)}, {inf, 0, -inf}});
  ASSERT_EQ(j.size(), 2u);
  EXPECT_EQ(j[1].at("beta"), json("inf"));
  EXPECT_EQ(j[1].at("log10_max_error"), json("-inf"));
  EXPECT_NEAR(j[0].at("log10_max_error").get<double>(), std::log10(0.5), 1e-15);
}

TEST(JsonFiles, MissingAndMalformedFiles) {
  EXPECT_THROW(read_json_file("/nonexistent/weights.json"), ParseError);
  const std::string path = ::testing::TempDir() + "bad.json";
  write_text_file(path, "{not json");
  EXPECT_THROW(read_json_file(path), ParseError);
  write_text_file(path, "[1, 2]");
  EXPECT_EQ(read_json_file(path), json::parse("[1,2]"));
}

}  // namespace
