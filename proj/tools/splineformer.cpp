// Copyright 2026 The Splineformer Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "splineformer/cli.hpp"

namespace cli = splineformer::cli;

int main(int argc, char** argv) {
  CLI::App app{"Compile splines into ReLU-attention encoders and verify them."};
  app.require_subcommand(1);
  cli::CliConfig cfg;
  std::optional<std::uint64_t> seed;
  std::string betas = "10,100,1000";

  auto add_seed = [&](CLI::App* sub) {
    sub->add_option("--seed", seed, "Sampling seed (default 42, or SPLINEFORMER_SEED)");
  };

  auto* compile = app.add_subcommand("compile", "Compile a spline JSON into encoder weights");
  compile->add_option("spline", cfg.inputs, "Spline JSON")->required()->expected(1);
  compile->add_option("-o,--output", cfg.output, "Weights JSON to write (layout goes to *.layout.json)")->required();
  compile->add_option("--mode", cfg.mode, "auto, faithful or pruned")
      ->check(CLI::IsMember({"auto", "faithful", "pruned"}));
  compile->add_flag("--masked", cfg.masked, "Emit a decoder (every head masked)");
  add_seed(compile);

  auto* eval = app.add_subcommand("eval", "Evaluate weights on an input matrix");
  eval->add_option("files", cfg.inputs, "Weights JSON and input matrix JSON")->required()->expected(2);
  eval->add_option("--y", cfg.y_path, "Decoder input matrix for encoder-decoder weights");
  eval->add_option("--backend", cfg.backend, "rational or float")->check(CLI::IsMember({"rational", "float"}));

  auto* verify = app.add_subcommand("verify", "Check weights against a spline exactly");
  verify->add_option("files", cfg.inputs, "Weights JSON and spline JSON")->required()->expected(2);
  verify->add_option("--samples", cfg.samples, "Number of random inputs");
  add_seed(verify);

  auto* degree = app.add_subcommand("degree", "Estimate the piecewise-polynomial degree");
  degree->add_option("weights", cfg.inputs, "Weights JSON")->required()->expected(1);
  degree->add_option("--trials", cfg.trials, "Random lines to sample");
  degree->add_option("--bound", cfg.bound, "Degree bound (default 3^t)");
  degree->add_option("--max-deg", cfg.max_deg, "Highest degree to resolve");
  add_seed(degree);

  auto* smooth = app.add_subcommand("smooth", "Swap ReLU attention for a smooth activation");
  smooth->add_option("weights", cfg.inputs, "Weights JSON")->required()->expected(1);
  smooth->add_option("--activation", cfg.activation, "softplus or softmax")
      ->check(CLI::IsMember({"softplus", "softmax"}));
  smooth->add_option("--betas", betas, "Comma-separated softplus betas (default 10,100,1000)");
  smooth->add_option("--samples", cfg.samples, "Number of random inputs")->default_val(100);
  smooth->add_option("--precision", cfg.precision, "float (double) or wide (500 digits)")
      ->check(CLI::IsMember({"float", "wide"}));
  add_seed(smooth);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return cli::kInputError;
  }

  cfg.command = app.get_subcommands().front()->get_name();
  try {
    cfg.seed = seed ? *seed : cli::default_seed();
    cfg.betas = cli::parse_betas(betas);
  } catch (const splineformer::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kInputError;
  }
  return cli::dispatch(cfg, std::cout, std::cerr);
}
