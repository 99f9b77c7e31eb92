// Copyright 2026 The Splineformer Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "splineformer/compiler/compile.hpp"
#include "splineformer/json_io.hpp"
#include "splineformer/verifier.hpp"
#include "splineformer/wide_float.hpp"

namespace splineformer::cli {

enum ExitCode : int { kOk = 0, kVerificationFailed = 1, kInputError = 2, kContractError = 3 };

struct CliConfig {
  std::string command;
  std::vector<std::string> inputs;
  std::string output;
  std::uint64_t seed = 42;
  std::size_t samples = 1000;
  std::string mode = "auto";
  std::string backend = "rational";
  bool masked = false;
  std::string y_path;
  std::size_t trials = 50;
  std::optional<unsigned long long> bound;
  std::optional<unsigned> max_deg;
  std::string activation = "softplus";
  std::vector<double> betas;
  std::string precision = "float";
};

/// Seed used when --seed is absent: SPLINEFORMER_SEED if set, else 42.
inline std::uint64_t default_seed() {
  if (const char* env = std::getenv("SPLINEFORMER_SEED")) {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(env, &used);
      if (used == std::string(env).size()) return v;
    } catch (const std::exception&) {
    }
    throw ParseError(std::string("SPLINEFORMER_SEED is not an unsigned integer: '") + env + "'");
  }
  return 42;
}

/// "10,100,1000" -> {10, 100, 1000}; "inf" is accepted; empty -> {}.
inline std::vector<double> parse_betas(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    if (item == "inf") {
      out.push_back(std::numeric_limits<double>::infinity());
      continue;
    }
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || !(v > 0)) throw ParseError("bad beta '" + item + "'");
    out.push_back(v);
  }
  return out;
}

/// weights.json -> weights.layout.json
inline std::string layout_path(const std::string& weights_path) {
  const std::string suffix = ".json";
  if (weights_path.size() > suffix.size() &&
      weights_path.compare(weights_path.size() - suffix.size(), suffix.size(), suffix) == 0) {
    return weights_path.substr(0, weights_path.size() - suffix.size()) + ".layout.json";
  }
  return weights_path + ".layout.json";
}

namespace detail {

inline const std::string& input(const CliConfig& cfg, std::size_t i, const char* what) {
  if (cfg.inputs.size() <= i) throw ParseError(std::string("missing ") + what + " argument");
  return cfg.inputs[i];
}

inline Encoder<Rational> encoder_only(const WeightsModel<Rational>& w, const char* command) {
  if (const auto* e = std::get_if<Encoder<Rational>>(&w)) return *e;
  throw ParseError(std::string(command) + " needs encoder weights ({\"blocks\": ...})");
}

/// (n, p) an encoder accepts, read off its first head.
inline std::pair<std::size_t, std::size_t> encoder_input_shape(const Encoder<Rational>& e) {
  if (e.empty()) throw ParseError("encoder has no blocks, so its input shape is unknown");
  const auto& h = e.front().attention.heads.front();
  return {h.input_rows(), h.columns()};
}

template <class Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const ContractError& e) {
    err << "error: " << e.what() << "\n";
    return kContractError;
  } catch (const ResourceError& e) {
    err << "error: " << e.what() << "\n";
    return kContractError;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const json::exception& e) {
    err << "error: malformed JSON input: " << e.what() << "\n";
    return kInputError;
  }
}

}  // namespace detail

/// compile SPLINE -o WEIGHTS: writes weights and the layout sidecar, prints stats.
inline int cmd_compile(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const SplineGrid spline = spline_from_json(read_json_file(detail::input(cfg, 0, "spline")));
    if (cfg.output.empty()) throw ParseError("compile needs -o WEIGHTS");
    CompileOptions opts;
    opts.mode = parse_compile_mode(cfg.mode);
    opts.masked = cfg.masked;
    const CompiledEncoder c = compile_spline(spline, opts);
    write_text_file(cfg.output, encoder_to_json(c.blocks).dump(1) + "\n");
    write_text_file(layout_path(cfg.output), layout_to_json(c).dump(1) + "\n");
    out << stats_to_json(c).dump() << "\n";
    return static_cast<int>(kOk);
  });
}

/// eval WEIGHTS X [--y Y] [--backend rational|float]: prints the output matrix.
inline int cmd_eval(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const json weights = read_json_file(detail::input(cfg, 0, "weights"));
    const json xj = read_json_file(detail::input(cfg, 1, "input matrix"));
    auto run = [&](auto tag) {
      using T = decltype(tag);
      const WeightsModel<T> model = weights_from_json<T>(weights);
      const Matrix<T> x = matrix_from_json<T>(xj);
      Matrix<T> result;
      if (const auto* e = std::get_if<Encoder<T>>(&model)) {
        result = eval_encoder(*e, x);
      } else {
        if (cfg.y_path.empty()) throw ParseError("encoder-decoder weights need --y");
        const Matrix<T> y = matrix_from_json<T>(read_json_file(cfg.y_path));
        result = eval_encdec(std::get<EncDecStack<T>>(model), x, y);
      }
      out << matrix_to_json(result).dump() << "\n";
    };
    if (cfg.backend == "rational") {
      run(Rational{});
    } else if (cfg.backend == "float") {
      run(double{});
    } else {
      throw ParseError("unknown backend '" + cfg.backend + "'");
    }
    return static_cast<int>(kOk);
  });
}

/// verify WEIGHTS SPLINE: exit 0 iff the weights match the spline exactly.
inline int cmd_verify(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const Encoder<Rational> enc =
        detail::encoder_only(weights_from_json<Rational>(read_json_file(detail::input(cfg, 0, "weights"))), "verify");
    const SplineGrid spline = spline_from_json(read_json_file(detail::input(cfg, 1, "spline")));
    const EquivReport report = oracle_equiv(model_of(enc), spline, cfg.samples, cfg.seed);
    out << equiv_report_to_json(report, cfg.seed).dump() << "\n";
    if (!report.exact) {
      err << "verification failed: model and spline differ (witness in report)\n";
      return static_cast<int>(kVerificationFailed);
    }
    return static_cast<int>(kOk);
  });
}

/// degree WEIGHTS [--trials] [--bound] [--max-deg]: prints a degree report.
/// Encoder-decoder weights are sampled on the stacked input (X; Y).
inline int cmd_degree(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const WeightsModel<Rational> w = weights_from_json<Rational>(read_json_file(detail::input(cfg, 0, "weights")));
    RationalModel model;
    std::size_t n = 0, p = 0;
    unsigned long long bound = 0;
    if (const auto* e = std::get_if<Encoder<Rational>>(&w)) {
      std::tie(n, p) = detail::encoder_input_shape(*e);
      model = model_of(*e);
      bound = encoder_degree_bound(e->size());
    } else {
      const auto& s = std::get<EncDecStack<Rational>>(w);
      if (s.stages.empty()) throw ParseError("encoder-decoder has no stages");
      const auto& beta = s.stages.front().self_attention.heads.front();
      const std::size_t x_rows = s.encoder.empty() ? s.stages.front().cross_attention.heads.front().input_rows()
                                                   : s.encoder.front().attention.heads.front().input_rows();
      n = x_rows + beta.input_rows();
      p = beta.columns();
      model = model_of(s, x_rows);
      bound = encdec_degree_bound(s.encoder.size(), s.stages.size());
    }
    if (cfg.bound) bound = *cfg.bound;
    const unsigned max_deg = cfg.max_deg ? *cfg.max_deg : static_cast<unsigned>(std::min<unsigned long long>(bound, 200) + 1);
    const DegreeReport report = estimate_degree(model, n, p, max_deg, cfg.trials, cfg.seed, bound);
    out << degree_report_to_json(report, cfg.seed).dump() << "\n";
    return static_cast<int>(report.bound_satisfied ? kOk : kVerificationFailed);
  });
}

/// smooth WEIGHTS --activation softplus|softmax [--betas] [--precision float|wide]:
/// prints a convergence table (softplus) or a probability check (softmax).
inline int cmd_smooth(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const Encoder<Rational> enc =
        detail::encoder_only(weights_from_json<Rational>(read_json_file(detail::input(cfg, 0, "weights"))), "smooth");
    const auto [n, p] = detail::encoder_input_shape(enc);
    std::vector<Matrix<Rational>> samples;
    for (std::size_t k = 0; k < cfg.samples; ++k) samples.push_back(RationalSampler(cfg.seed, k).matrix(n, p));
    json report{{"kind", "smooth"}, {"activation", cfg.activation}, {"samples", cfg.samples}, {"seed", cfg.seed}};
    if (cfg.activation == "softplus") {
      std::vector<ConvergenceRow> table;
      if (cfg.precision == "float") {
        table = smooth_convergence_table<double>(enc, samples, cfg.betas);
      } else if (cfg.precision == "wide") {
        table = smooth_convergence_table<WideFloat>(enc, samples, cfg.betas);
      } else {
        throw ParseError("unknown precision '" + cfg.precision + "' (expected float or wide)");
      }
      report["precision"] = cfg.precision;
      report["rows"] = convergence_to_json(table);
      report["strictly_decreasing"] = strictly_decreasing(table);
    } else if (cfg.activation == "softmax") {
      const SoftmaxCheck c = softmax_column_check(smooth_swap(enc, Activation::softmax()), samples);
      report["probability_check"] = {{"columns", c.columns},
                                     {"max_sum_deviation", c.max_sum_deviation},
                                     {"entries_in_unit_interval", c.entries_in_unit_interval},
                                     {"masked_entries_zero", c.masked_entries_zero},
                                     {"outputs_finite", c.outputs_finite}};
    } else {
      throw ParseError("unknown activation '" + cfg.activation + "' (expected softplus or softmax)");
    }
    out << report.dump() << "\n";
    return static_cast<int>(kOk);
  });
}

inline int dispatch(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.command == "compile") return cmd_compile(cfg, out, err);
  if (cfg.command == "eval") return cmd_eval(cfg, out, err);
  if (cfg.command == "verify") return cmd_verify(cfg, out, err);
  if (cfg.command == "degree") return cmd_degree(cfg, out, err);
  if (cfg.command == "smooth") return cmd_smooth(cfg, out, err);
  err << "error: unknown command '" << cfg.command << "'\n";
  return kInputError;
}

}  // namespace splineformer::cli
