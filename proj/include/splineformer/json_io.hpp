// Copyright 2026 The Splineformer Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "splineformer/compiler/compiled.hpp"
#include "splineformer/encoder.hpp"
#include "splineformer/errors.hpp"
#include "splineformer/maxdef.hpp"
#include "splineformer/pbform.hpp"
#include "splineformer/verifier.hpp"

namespace splineformer {

using json = nlohmann::json;

// ---- scalars and matrices --------------------------------------------------

inline json scalar_to_json(const Rational& q) { return to_string(q); }

inline json scalar_to_json(double x) {
  if (std::isinf(x)) return x < 0 ? json("-inf") : json("inf");
  if (std::isnan(x)) return json("nan");
  return x;
}

template <class T>
T scalar_from_json(const json& j);

template <>
inline Rational scalar_from_json<Rational>(const json& j) {
  if (j.is_string()) return parse_rational(j.get<std::string>());
  if (j.is_number_integer()) return parse_rational(j.dump());
  if (j.is_number_float()) {
    throw ParseError("rational entries must be strings \"p/q\" or integers, got " + j.dump());
  }
  throw ParseError("expected a rational, got " + j.dump());
}

template <>
inline double scalar_from_json<double>(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    return parse_rational(s).get_d();
  }
  throw ParseError("expected a number, got " + j.dump());
}

template <class T>
json matrix_to_json(const Matrix<T>& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(scalar_to_json(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

template <class T>
Matrix<T> matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw ParseError("matrix must be a nonempty array of rows");
  const std::size_t rows = j.size();
  if (!j[0].is_array() || j[0].empty()) throw ParseError("matrix rows must be nonempty arrays");
  const std::size_t cols = j[0].size();
  std::vector<T> data;
  data.reserve(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols) {
      throw ParseError("matrix row " + std::to_string(r + 1) + " has the wrong length");
    }
    for (const auto& v : j[r]) data.push_back(scalar_from_json<T>(v));
  }
  return Matrix<T>(rows, cols, std::move(data));
}

/// Bias vectors: a column (array of one-element rows) or a flat array.
template <class T>
Matrix<T> column_from_json(const json& j) {
  if (j.is_array() && !j.empty() && !j[0].is_array()) {
    std::vector<T> data;
    for (const auto& v : j) data.push_back(scalar_from_json<T>(v));
    const std::size_t rows = data.size();
    return Matrix<T>(rows, 1, std::move(data));
  }
  Matrix<T> m = matrix_from_json<T>(j);
  if (m.cols() != 1) throw ParseError("bias must be a column vector, got " + m.shape());
  return m;
}

// ---- transformer weights ---------------------------------------------------

inline json activation_to_json(const Activation& a) { return to_string(a); }

inline Activation activation_from_json(const json& head) {
  const std::string name = head.value("activation", std::string("relu"));
  if (name == "relu") return Activation::relu();
  if (name == "softmax") return Activation::softmax();
  if (name == "softplus") {
    if (!head.contains("beta")) throw ParseError("softplus head needs \"beta\"");
    return Activation::softplus(head.at("beta").get<double>());
  }
  throw ParseError("unknown activation '" + name + "'");
}

template <class T>
json head_to_json(const AttentionHead<T>& h) {
  json j;
  j["A_Q"] = matrix_to_json(h.query_weight);
  j["B_Q"] = matrix_to_json(h.query_bias);
  j["A_K"] = matrix_to_json(h.key_weight);
  j["B_K"] = matrix_to_json(h.key_bias);
  j["A_V"] = matrix_to_json(h.value_weight);
  j["B_V"] = matrix_to_json(h.value_bias);
  j["masked"] = h.masked;
  j["activation"] = activation_to_json(h.activation);
  if (h.activation.kind == ActivationKind::softplus) j["beta"] = h.activation.beta;
  if (h.scaled) j["scaled"] = true;
  return j;
}

template <class T>
AttentionHead<T> head_from_json(const json& j) {
  auto field = [&](const char* name) {
    if (!j.contains(name)) throw ParseError(std::string("attention head lacks \"") + name + "\"");
    return matrix_from_json<T>(j.at(name));
  };
  AttentionHead<T> h;
  h.query_weight = field("A_Q");
  h.query_bias = field("B_Q");
  h.key_weight = field("A_K");
  h.key_bias = field("B_K");
  h.value_weight = field("A_V");
  h.value_bias = field("B_V");
  h.masked = j.value("masked", false);
  h.scaled = j.value("scaled", false);
  h.activation = activation_from_json(j);
  check_head(h);
  return h;
}

template <class T>
json multihead_to_json(const MultiheadAttention<T>& mh) {
  json heads = json::array();
  for (const auto& h : mh.heads) heads.push_back(head_to_json(h));
  return json{{"heads", heads}};
}

template <class T>
MultiheadAttention<T> multihead_from_json(const json& j) {
  if (!j.contains("heads") || !j.at("heads").is_array()) throw ParseError("attention layer needs a \"heads\" array");
  MultiheadAttention<T> mh;
  for (const auto& h : j.at("heads")) mh.heads.push_back(head_from_json<T>(h));
  check_multihead(mh);
  return mh;
}

template <class T>
json ffn_to_json(const FeedForwardNet<T>& net) {
  json layers = json::array();
  for (const auto& l : net.layers) layers.push_back({{"A", matrix_to_json(l.weight)}, {"b", matrix_to_json(l.bias)}});
  return json{{"layers", layers}};
}

template <class T>
FeedForwardNet<T> ffn_from_json(const json& j) {
  if (!j.contains("layers") || !j.at("layers").is_array()) throw ParseError("network needs a \"layers\" array");
  FeedForwardNet<T> net;
  for (const auto& l : j.at("layers")) {
    if (!l.contains("A") || !l.contains("b")) throw ParseError("network layer needs \"A\" and \"b\"");
    net.layers.push_back({matrix_from_json<T>(l.at("A")), column_from_json<T>(l.at("b"))});
  }
  check_ffn(net);
  return net;
}

template <class T>
json encoder_to_json(const Encoder<T>& blocks) {
  json arr = json::array();
  for (const auto& b : blocks) {
    json jb = multihead_to_json(b.attention);
    jb["ffn"] = ffn_to_json(b.ffn);
    jb["residual"] = b.residual;
    arr.push_back(std::move(jb));
  }
  return json{{"blocks", arr}};
}

template <class T>
Encoder<T> encoder_from_json(const json& j) {
  if (!j.contains("blocks") || !j.at("blocks").is_array()) throw ParseError("weights need a \"blocks\" array");
  Encoder<T> blocks;
  for (const auto& jb : j.at("blocks")) {
    if (!jb.contains("ffn")) throw ParseError("encoder block lacks \"ffn\"");
    blocks.push_back({multihead_from_json<T>(jb), ffn_from_json<T>(jb.at("ffn")), jb.value("residual", false)});
  }
  return blocks;
}

template <class T>
json encdec_to_json(const EncDecStack<T>& s) {
  json stages = json::array();
  for (const auto& st : s.stages) {
    stages.push_back({{"beta", multihead_to_json(st.self_attention)},
                      {"gamma", multihead_to_json(st.cross_attention)},
                      {"ffn", ffn_to_json(st.ffn)},
                      {"residual", st.residual}});
  }
  return json{{"encoder", encoder_to_json(s.encoder)}, {"stages", stages}};
}

template <class T>
EncDecStack<T> encdec_from_json(const json& j) {
  EncDecStack<T> s;
  if (j.contains("encoder")) s.encoder = encoder_from_json<T>(j.at("encoder"));
  if (!j.contains("stages") || !j.at("stages").is_array()) throw ParseError("encoder-decoder needs a \"stages\" array");
  for (const auto& st : j.at("stages")) {
    if (!st.contains("beta") || !st.contains("gamma") || !st.contains("ffn")) {
      throw ParseError("decoder stage needs \"beta\", \"gamma\" and \"ffn\"");
    }
    s.stages.push_back({multihead_from_json<T>(st.at("beta")), multihead_from_json<T>(st.at("gamma")),
                        ffn_from_json<T>(st.at("ffn")), st.value("residual", false)});
  }
  return s;
}

/// Either a plain encoder ({"blocks": ...}) or an encoder-decoder stack
/// ({"encoder": ..., "stages": ...}).
template <class T>
using WeightsModel = std::variant<Encoder<T>, EncDecStack<T>>;

template <class T>
WeightsModel<T> weights_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("weights must be a JSON object");
  if (j.contains("stages")) return encdec_from_json<T>(j);
  return encoder_from_json<T>(j);
}

// ---- splines -----------------------------------------------------------------

inline json polynomial_to_json(const Polynomial& poly) {
  json terms = json::array();
  for (const auto& [m, c] : poly.terms()) {
    json exps = json::object();
    for (const auto& [v, e] : m.factors()) exps[variable_name(v)] = e;
    terms.push_back({{"coef", to_string(c)}, {"exps", exps}});
  }
  return json{{"op", "poly"}, {"terms", terms}};
}

inline json pbform_to_json(const PBForm& f) {
  if (f.is_polynomial()) return polynomial_to_json(f.rows().front().front());
  json rows = json::array();
  for (const auto& r : f.rows()) {
    if (r.size() == 1) {
      rows.push_back(polynomial_to_json(r.front()));
      continue;
    }
    json args = json::array();
    for (const auto& p : r) args.push_back(polynomial_to_json(p));
    rows.push_back({{"op", "min"}, {"args", args}});
  }
  if (rows.size() == 1) return rows.front();
  return json{{"op", "max"}, {"args", rows}};
}

inline Polynomial polynomial_from_json(const json& j, const std::string& path) {
  if (!j.contains("terms") || !j.at("terms").is_array()) throw ParseError(path + ": poly needs a \"terms\" array");
  Polynomial poly;
  for (const auto& t : j.at("terms")) {
    const Rational c = t.contains("coef") ? scalar_from_json<Rational>(t.at("coef")) : Rational(1);
    std::vector<Monomial::Factor> factors;
    if (t.contains("exps")) {
      if (!t.at("exps").is_object()) throw ParseError(path + ": \"exps\" must be an object");
      for (const auto& [name, e] : t.at("exps").items()) {
        if (!e.is_number_integer() || e.get<long>() < 0) throw ParseError(path + ": exponent of " + name + " must be a nonnegative integer");
        factors.emplace_back(parse_variable_name(name), e.get<unsigned>());
      }
    }
    poly.add_term(Monomial(std::move(factors)), c);
  }
  return poly;
}

inline MaxDefExpr maxdef_from_json(const json& j, const std::string& path = "$") {
  if (!j.is_object() || !j.contains("op")) throw ParseError(path + ": expression needs an \"op\"");
  const std::string op = j.at("op").get<std::string>();
  auto args = [&]() {
    if (!j.contains("args") || !j.at("args").is_array() || j.at("args").empty()) {
      throw ParseError(path + ": '" + op + "' needs a nonempty \"args\" array");
    }
    std::vector<MaxDefExpr> out;
    for (std::size_t i = 0; i < j.at("args").size(); ++i) {
      out.push_back(maxdef_from_json(j.at("args")[i], path + ".args[" + std::to_string(i) + "]"));
    }
    return out;
  };
  if (op == "poly") return MaxDefExpr::polynomial(polynomial_from_json(j, path));
  if (op == "const") return MaxDefExpr::constant(scalar_from_json<Rational>(j.at("value")));
  if (op == "var") return MaxDefExpr::variable(parse_variable_name(j.at("name").get<std::string>()));
  if (op == "max") return MaxDefExpr::max(args());
  if (op == "min") return MaxDefExpr::min(args());
  if (op == "sum") return MaxDefExpr::sum(args());
  if (op == "product") return MaxDefExpr::product(args());
  if (op == "scale") {
    if (!j.contains("factor")) throw ParseError(path + ": scale needs a \"factor\"");
    auto a = args();
    if (a.size() != 1) throw ParseError(path + ": scale takes exactly one argument");
    return MaxDefExpr::scale(scalar_from_json<Rational>(j.at("factor")), std::move(a.front()));
  }
  throw ParseError(path + ": unknown op '" + op + "'");
}

inline json spline_to_json(const SplineGrid& g) {
  json outputs = json::array();
  for (const auto& row : g.outputs) {
    json r = json::array();
    for (const auto& f : row) r.push_back(pbform_to_json(f));
    outputs.push_back(std::move(r));
  }
  return json{{"n", g.n}, {"p", g.p}, {"outputs", outputs}};
}

/// Accepts {"n","p","outputs"}, a bare r x p grid of expressions, or a single
/// expression. Without explicit "n"/"p", n is the largest variable row used and
/// p the grid width (single expression: largest variable column).
inline SplineGrid spline_from_json(const json& j) {
  if (j.is_object() && j.contains("op")) return spline_from_json(json::array({json::array({j})}));
  if (j.is_array()) {
    SplineGrid g = spline_from_json(json{{"n", 0}, {"p", 0}, {"outputs", j}, {"infer", true}});
    return g;
  }
  if (!j.is_object() || !j.contains("outputs")) {
    throw ParseError("spline needs \"n\", \"p\" and \"outputs\"");
  }
  const bool infer = j.value("infer", false);
  if (!infer && (!j.contains("n") || !j.contains("p"))) throw ParseError("spline needs \"n\", \"p\" and \"outputs\"");
  SplineGrid g;
  g.n = j.at("n").get<std::size_t>();
  g.p = j.at("p").get<std::size_t>();
  if (!j.at("outputs").is_array()) throw ParseError("\"outputs\" must be an array of rows");
  for (std::size_t r = 0; r < j.at("outputs").size(); ++r) {
    const auto& row = j.at("outputs")[r];
    if (!row.is_array()) throw ParseError("output row " + std::to_string(r + 1) + " must be an array");
    std::vector<PBForm> forms;
    for (std::size_t c = 0; c < row.size(); ++c) {
      const std::string path = "outputs[" + std::to_string(r) + "][" + std::to_string(c) + "]";
      forms.push_back(normalize_to_pbform(maxdef_from_json(row[c], path)));
    }
    g.outputs.push_back(std::move(forms));
  }
  if (infer) {
    std::size_t rows = 1, cols = 1;
    for (const auto& row : g.outputs)
      for (const auto& f : row)
        for (const auto& lattice_row : f.rows())
          for (const auto& poly : lattice_row)
            for (const auto& [m, c] : poly.terms())
              for (const auto& [v, e] : m.factors()) {
                rows = std::max<std::size_t>(rows, v.row + 1);
                cols = std::max<std::size_t>(cols, v.col + 1);
              }
    g.n = rows;
    g.p = g.outputs.empty() ? cols : std::max(cols, g.outputs.front().size());
    if (g.outputs.size() == 1 && g.outputs.front().size() == 1 && cols > 1) {
      throw ParseError("a single expression reads " + std::to_string(cols) +
                       " input columns; give a 1 x p grid or explicit \"n\"/\"p\"");
    }
  }
  check_spline_grid(g);
  return g;
}

// ---- compiler sidecar and reports ---------------------------------------------

inline json monomial_to_json(const Monomial& m) {
  json exps = json::object();
  for (const auto& [v, e] : m.factors()) exps[variable_name(v)] = e;
  return exps;
}

inline json layout_to_json(const CompiledEncoder& c) {
  json rows = json::array();
  for (const auto& e : c.layout.entries()) {
    rows.push_back({{"monomial", monomial_to_json(e.monomial)}, {"column", e.column + 1}, {"row", e.row + 1}});
  }
  const CompileStats s = c.stats();
  return json{{"rows", rows},
              {"mode", to_string(c.mode)},
              {"stages", c.stages},
              {"provenance", c.provenance},
              {"masked", c.masked},
              {"stats", {{"blocks", s.blocks}, {"heads", s.heads}, {"rows", s.max_rows}, {"depth", s.depth}}}};
}

inline json stats_to_json(const CompiledEncoder& c) {
  const CompileStats s = c.stats();
  return json{{"blocks", s.blocks}, {"heads", s.heads}, {"rows", s.max_rows}, {"depth", s.depth},
              {"mode", to_string(c.mode)}, {"stages", c.stages}};
}

inline json equiv_report_to_json(const EquivReport& r, std::uint64_t seed) {
  json j{{"kind", "equiv"},
         {"samples", r.samples},
         {"seed", seed},
         {"exact", r.exact},
         {"max_abs_error", to_string(r.max_abs_error)}};
  if (r.first_failure) {
    j["first_failure"] = {{"X", matrix_to_json(r.first_failure->input)},
                          {"expected", matrix_to_json(r.first_failure->expected)},
                          {"got", matrix_to_json(r.first_failure->got)}};
  }
  return j;
}

inline json degree_report_to_json(const DegreeReport& r, std::uint64_t seed) {
  return json{{"kind", "degree"},          {"trials", r.trials},
              {"seed", seed},              {"degrees", r.degrees},
              {"saturated", r.saturated},  {"modal_degree", r.modal},
              {"max_degree", r.max_degree}, {"max_deg", r.max_deg},
              {"bound", r.bound},          {"bound_satisfied", r.bound_satisfied}};
}

inline json autoregressive_report_to_json(const AutoregressiveReport& r) {
  json j{{"kind", "autoregressive"}, {"trials", r.trials}, {"passed", r.passed}};
  if (r.witness) {
    j["witness"] = {{"X", matrix_to_json(r.witness->input)},
                    {"X_prime", matrix_to_json(r.witness->altered)},
                    {"prefix_columns", r.witness->prefix + 1},
                    {"column", r.witness->column + 1}};
  }
  return j;
}

inline json convergence_to_json(const std::vector<ConvergenceRow>& table) {
  json rows = json::array();
  for (const auto& row : table) {
    rows.push_back({{"beta", scalar_to_json(row.beta)},
                    {"max_error", row.max_error},
                    {"log10_max_error", scalar_to_json(row.log10_error)}});
  }
  return rows;
}

// ---- files ---------------------------------------------------------------------

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError("'" + path + "' is not valid JSON: " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write '" + path + "'");
  out << text;
  if (!out) throw ParseError("failed writing '" + path + "'");
}

}  // namespace splineformer
