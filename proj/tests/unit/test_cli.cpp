// Copyright 2026 The Splineformer Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "splineformer/cli.hpp"
#include "test_support.hpp"

#ifndef SPLINEFORMER_CLI_PATH
#error "SPLINEFORMER_CLI_PATH must name the splineformer executable"
#endif

namespace {

using namespace sft;
using splineformer::json;
namespace fs = std::filesystem;

struct CliRun {
  int code = -1;
  std::string out;
};

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::path(::testing::TempDir()) /
           ("splineformer_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(path(name)) << text;
    return path(name);
  }

  static std::string read(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  /// Runs the binary with `args`; stderr is dropped into err.txt.
  CliRun run(const std::string& args, const std::string& env = "") const {
    const std::string cmd = env + (env.empty() ? "" : " ") + "\"" SPLINEFORMER_CLI_PATH "\" " + args + " 2>\"" +
                            path("err.txt") + "\"";
    CliRun r;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return r;
    char buf[4096];
    std::size_t got = 0;
    while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
  }

  std::string err() const { return read(path("err.txt")); }

  fs::path dir_;
};

const char* kAbs = R"([[{"op": "max", "args": [{"op": "var", "name": "x_1_1"},
                         {"op": "scale", "factor": "-1", "args": [{"op": "var", "name": "x_1_1"}]}]}]])";

const char* kCube = R"({"op": "poly", "terms": [{"exps": {"x_1_1": 3}}]})";

std::string weights_text(const Encoder<Rational>& enc) { return encoder_to_json(enc).dump(); }

TEST_F(CliTest, CompileAbsReportsOneStage) {
  const CliRun r = run("compile \"" + write("abs.json", kAbs) + "\" -o \"" + path("w.json") + "\"");
  ASSERT_EQ(r.code, 0) << err();
  const json stats = json::parse(r.out);
  EXPECT_EQ(stats.at("stages"), json(1));
  for (const char* key : {"blocks", "heads", "rows", "depth"}) EXPECT_TRUE(stats.contains(key)) << key;
  EXPECT_TRUE(fs::exists(path("w.layout.json")));
  EXPECT_EQ(run("verify \"" + path("w.json") + "\" \"" + path("abs.json") + "\"").code, 0) << err();
}

TEST_F(CliTest, CompileIsByteIdentical) {
  const std::string spline = write(
      "s.json", R"([[{"op": "max", "args": [{"op": "product", "args": [{"op": "var", "name": "x_1_1"},
                   {"op": "var", "name": "x_1_2"}]}, {"op": "var", "name": "x_1_2"}]}, {"op": "var", "name": "x_1_1"}]])");
  const CliRun a = run("compile \"" + spline + "\" -o \"" + path("a.json") + "\"");
  const CliRun b = run("compile \"" + spline + "\" -o \"" + path("b.json") + "\"");
  ASSERT_EQ(a.code, 0) << err();
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(read(path("a.json")), read(path("b.json")));
  EXPECT_EQ(read(path("a.layout.json")), read(path("b.layout.json")));
}

TEST_F(CliTest, MaskedCompileOfFutureDependenceIsAContractError) {
  const std::string spline =
      write("s.json", R"([[{"op": "var", "name": "x_1_2"}, {"op": "var", "name": "x_1_1"}]])");
  const CliRun r = run("compile \"" + spline + "\" --masked -o \"" + path("w.json") + "\"");
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(err().find("autoregressive"), std::string::npos) << err();
}

TEST_F(CliTest, CompileParseErrorNamesTheNode) {
  const CliRun r = run("compile \"" + write("s.json", R"({"op": "tanh", "args": []})") + "\" -o \"" + path("w.json") + "\"");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(err().find("tanh"), std::string::npos) << err();
  EXPECT_EQ(run("compile \"" + path("missing.json") + "\" -o \"" + path("w.json") + "\"").code, 2);
}

TEST_F(CliTest, CompileFaithfulCapIsAResourceError) {
  const std::string spline =
      write("s.json", R"({"n": 3, "p": 3, "outputs": [[{"op": "poly", "terms": [{"exps": {"x_1_1": 9}}]},
                         {"op": "var", "name": "x_1_1"}, {"op": "var", "name": "x_1_1"}]]})");
  const CliRun r = run("compile \"" + spline + "\" --mode faithful -o \"" + path("w.json") + "\"");
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(err().find("pruned"), std::string::npos) << err();
}

TEST_F(CliTest, EvalCubeOnTwo) {
  const std::string w = write("w.json", weights_text({single_head_block(cubic_head())}));
  const CliRun r = run("eval \"" + w + "\" \"" + write("x.json", R"([["2"]])") + "\"");
  ASSERT_EQ(r.code, 0) << err();
  EXPECT_EQ(json::parse(r.out), json::parse(R"([["8"]])"));
  const CliRun f = run("eval \"" + w + "\" \"" + path("x.json") + "\" --backend float");
  ASSERT_EQ(f.code, 0) << err();
  EXPECT_EQ(json::parse(f.out), json::parse("[[8.0]]"));
}

TEST_F(CliTest, EvalEmptyEncoderEchoesInput) {
  const std::string w = write("w.json", R"({"blocks": []})");
  const CliRun r = run("eval \"" + w + "\" \"" + write("x.json", R"([["1/2", "-3"], ["0", "7/5"]])") + "\"");
  ASSERT_EQ(r.code, 0) << err();
  EXPECT_EQ(json::parse(r.out), json::parse(R"([["1/2", "-3"], ["0", "7/5"]])"));
}

TEST_F(CliTest, EvalMaskedWeightsIgnoreLaterColumns) {
  Gen g(100);
  const Encoder<Rational> enc{single_head_block(random_head(g, 1, 3, 2, 1, true))};
  const std::string w = write("w.json", weights_text(enc));
  const CliRun a = run("eval \"" + w + "\" \"" + write("a.json", R"([["1", "2", "3"]])") + "\"");
  const CliRun b = run("eval \"" + w + "\" \"" + write("b.json", R"([["1", "5", "-4"]])") + "\"");
  ASSERT_EQ(a.code, 0) << err();
  const json ja = json::parse(a.out), jb = json::parse(b.out);
  EXPECT_EQ(ja[0][0], jb[0][0]);
  EXPECT_EQ(ja, matrix_to_json(eval_encoder(enc, row_of({1, 2, 3}))));
}

TEST_F(CliTest, EvalShapeMismatchIsAnInputError) {
  const std::string w = write("w.json", weights_text({single_head_block(cubic_head())}));
  EXPECT_EQ(run("eval \"" + w + "\" \"" + write("x.json", R"([["1"], ["2"]])") + "\"").code, 2);
  EXPECT_NE(err().find("2x1"), std::string::npos) << err();
}

TEST_F(CliTest, VerifyPassFailAndSampleEcho) {
  Encoder<Rational> enc{single_head_block(cubic_head())};
  const std::string spline = write("s.json", kCube);
  const CliRun ok = run("verify \"" + write("w.json", weights_text(enc)) + "\" \"" + spline + "\" --samples 37");
  ASSERT_EQ(ok.code, 0) << err();
  const json rep = json::parse(ok.out);
  EXPECT_EQ(rep.at("samples"), json(37));
  EXPECT_EQ(rep.at("exact"), json(true));
  enc[0].attention.heads[0].value_weight(0, 0) = Rational(3);
  const CliRun bad = run("verify \"" + write("bad.json", weights_text(enc)) + "\" \"" + spline + "\"");
  EXPECT_EQ(bad.code, 1);
  EXPECT_TRUE(json::parse(bad.out).contains("first_failure"));
}

TEST_F(CliTest, VerifyIsByteIdenticalAndSeedSensitive) {
  auto enc = Encoder<Rational>{single_head_block(cubic_head())};
  enc[0].attention.heads[0].key_bias(0, 0) = Rational(1);
  const std::string args = "verify \"" + write("w.json", weights_text(enc)) + "\" \"" + write("s.json", kCube) + "\"";
  const CliRun a = run(args), b = run(args);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(json::parse(a.out).at("seed"), json(42));
  const CliRun env = run(args, "SPLINEFORMER_SEED=7");
  EXPECT_EQ(json::parse(env.out).at("seed"), json(7));
  const CliRun flag = run(args + " --seed 9", "SPLINEFORMER_SEED=7");
  EXPECT_EQ(json::parse(flag.out).at("seed"), json(9));
  EXPECT_EQ(run(args, "SPLINEFORMER_SEED=abc").code, 2);
}

TEST_F(CliTest, DegreeOfAttentionOnlyModel) {
  Gen g(101);
  Encoder<Rational> enc{single_head_block(random_head(g, 2, 2, 2, 2))};
  const CliRun r = run("degree \"" + write("w.json", weights_text(enc)) + "\" --trials 20");
  ASSERT_EQ(r.code, 0) << err();
  const json rep = json::parse(r.out);
  EXPECT_EQ(rep.at("bound"), json(3));
  EXPECT_EQ(rep.at("bound_satisfied"), json(true));
  EXPECT_EQ(rep.at("trials"), json(20));
}

TEST_F(CliTest, DegreeOfAffineModelIsOne) {
  // One block whose attention is a constant 1 weight: out = x + 1.
  AttentionHead<Rational> h = cubic_head();
  h.query_weight = h.key_weight = scalar(0);
  h.query_bias = h.key_bias = scalar(1);
  h.value_bias = scalar(1);
  const CliRun r = run("degree \"" + write("w.json", weights_text({single_head_block(h)})) + "\" --trials 10");
  ASSERT_EQ(r.code, 0) << err();
  EXPECT_EQ(json::parse(r.out).at("modal_degree"), json(1));
}

TEST_F(CliTest, DegreeBoundDefaultsToThreeToTheT) {
  const Encoder<Rational> enc{single_head_block(cubic_head()), single_head_block(cubic_head())};
  const CliRun r = run("degree \"" + write("w.json", weights_text(enc)) + "\" --trials 5");
  ASSERT_EQ(r.code, 0) << err();
  const json rep = json::parse(r.out);
  EXPECT_EQ(rep.at("bound"), json(9));
  EXPECT_EQ(rep.at("modal_degree"), json(9));
  const CliRun tight = run("degree \"" + path("w.json") + "\" --trials 5 --bound 8");
  EXPECT_EQ(tight.code, 1);
}

TEST_F(CliTest, SmoothSoftplusTable) {
  const std::string w = write("w.json", weights_text({single_head_block(cubic_head())}));
  const CliRun r = run("smooth \"" + w + "\" --betas 10,100,1000 --precision wide --samples 20");
  ASSERT_EQ(r.code, 0) << err();
  const json rep = json::parse(r.out);
  ASSERT_EQ(rep.at("rows").size(), 3u);
  EXPECT_EQ(rep.at("strictly_decreasing"), json(true));
  const CliRun empty = run("smooth \"" + w + "\" --betas \"\"");
  ASSERT_EQ(empty.code, 0) << err();
  EXPECT_TRUE(json::parse(empty.out).at("rows").empty());
}

TEST_F(CliTest, SmoothSoftmaxProbabilityCheck) {
  Gen g(102);
  const Encoder<Rational> enc{single_head_block(random_head(g, 2, 3, 2, 2, true))};
  const CliRun r = run("smooth \"" + write("w.json", weights_text(enc)) + "\" --activation softmax --samples 10");
  ASSERT_EQ(r.code, 0) << err();
  const json check = json::parse(r.out).at("probability_check");
  EXPECT_EQ(check.at("columns"), json(30));
  EXPECT_EQ(check.at("masked_entries_zero"), json(true));
  EXPECT_LE(check.at("max_sum_deviation").get<double>(), 1e-12);
}

TEST_F(CliTest, BadFlagsAreInputErrors) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
  EXPECT_EQ(run("compile x.json --mode greedy -o y.json").code, 2);
  EXPECT_EQ(run("smooth w.json --betas 10,-1").code, 2);
}

TEST(CliInProcess, CompileWritesSameBytesAsStats) {
  const std::string dir = ::testing::TempDir();
  std::ofstream(dir + "inproc_abs.json") << kAbs;
  splineformer::cli::CliConfig cfg;
  cfg.command = "compile";
  cfg.inputs = {dir + "inproc_abs.json"};
  cfg.output = dir + "inproc_w.json";
  std::ostringstream out1, out2, err;
  EXPECT_EQ(splineformer::cli::dispatch(cfg, out1, err), 0) << err.str();
  EXPECT_EQ(splineformer::cli::dispatch(cfg, out2, err), 0) << err.str();
  EXPECT_EQ(out1.str(), out2.str());
  EXPECT_EQ(splineformer::cli::layout_path("a/b.json"), "a/b.layout.json");
  EXPECT_EQ(splineformer::cli::layout_path("weights"), "weights.layout.json");
}

TEST(CliInProcess, BetaParsing) {
  using splineformer::cli::parse_betas;
  EXPECT_EQ(parse_betas("10,100"), (std::vector<double>{10, 100}));
  EXPECT_TRUE(parse_betas("").empty());
  EXPECT_TRUE(std::isinf(parse_betas("inf").front()));
  EXPECT_THROW(parse_betas("0"), ParseError);
  EXPECT_THROW(parse_betas("ten"), ParseError);
}

}  // namespace
