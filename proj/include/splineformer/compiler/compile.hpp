// Copyright 2026 The Splineformer Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "splineformer/compiler/block_form.hpp"
#include "splineformer/compiler/compiled.hpp"
#include "splineformer/compiler/heads.hpp"
#include "splineformer/compiler/netbuilder.hpp"
#include "splineformer/compiler/veronese_encoder.hpp"
#include "splineformer/errors.hpp"
#include "splineformer/pbform.hpp"

namespace splineformer {

/// Throws unless output column j reads only input columns 1..j.
inline void check_autoregressive(const SplineGrid& f) {
  for (std::size_t r = 0; r < f.outputs.size(); ++r)
    for (std::size_t j = 0; j < f.p; ++j) {
      const long c = f.outputs[r][j].max_column();
      if (c > static_cast<long>(j)) {
        throw ContractError("output (" + std::to_string(r + 1) + "," + std::to_string(j + 1) +
                            ") reads input column " + std::to_string(c + 1) +
                            ", so the spline is not autoregressive");
      }
    }
}

namespace detail {

/// Value of the form with every polynomial replaced by its constant term, i.e.
/// the form evaluated on an all-zero monomial block.
inline Rational value_at_zero_block(const PBForm& f) {
  bool first = true;
  Rational best;
  for (const auto& row : f.rows()) {
    Rational low = row.front().constant_term();
    for (const auto& poly : row) low = std::min(low, poly.constant_term());
    if (first || low > best) best = low;
    first = false;
  }
  return best;
}

}  // namespace detail

/// Encoder E with eval_encoder(E, X) = [f_1(X), ..., f_p(X)] exactly.
///
/// Pipeline: quadratic Veronese stages up to the degree s of f; the last
/// attention layer also gets 2r constant heads carrying
///   b_j = relu(-sum_{i != j} l_i(0)),  b'_j = relu(sum_{i != j} l_i(0))
/// per output row; its network applies l_1, ..., l_p (each reading its own
/// column block) and the final linear map b - b' + l_1 + ... + l_p.
inline CompiledEncoder compile_spline(const SplineGrid& f, const CompileOptions& opts = {}) {
  check_spline_grid(f);
  if (opts.residual) {
    throw ContractError("residual connections need shape-preserving blocks; compiled blocks change the row count");
  }
  if (opts.masked) check_autoregressive(f);
  const std::size_t n = f.n, p = f.p, r = f.output_rows();
  const unsigned s = std::max(1u, f.max_degree());
  const CompileMode mode = resolve_mode(opts.mode, s, p);

  ColumnTargets targets(p);
  for (const auto& row : f.outputs)
    for (std::size_t j = 0; j < p; ++j)
      for (const auto& lattice_row : row[j].rows())
        for (const auto& poly : lattice_row)
          for (const auto& [m, c] : poly.terms()) {
            if (!m.is_constant()) targets[j].insert(m);
          }

  VeroneseBuild vb = build_veronese_stages(n, p, s, mode, opts.masked, opts.row_cap, targets);
  OpenStage& last = vb.open;
  const MonomialLayout layout = MonomialLayout::from_labels(last.labels);

  // l_{i,rho}: output row rho of the linear spline on column block i.
  std::vector<std::vector<LinearLattice>> pieces(r, std::vector<LinearLattice>(p));
  for (std::size_t rho = 0; rho < r; ++rho)
    for (std::size_t i = 0; i < p; ++i)
      for (const auto& lattice_row : f.outputs[rho][i].rows()) {
        std::vector<LinearForm> forms;
        for (const auto& poly : lattice_row) {
          LinearForm form = LinearForm::constant_form(poly.constant_term());
          form.nonnegative = false;
          for (const auto& [m, c] : poly.terms()) {
            if (m.is_constant()) continue;
            form = form + c * last.readout.at(layout.row(m, i));
          }
          forms.push_back(std::move(form));
        }
        pieces[rho][i].push_back(std::move(forms));
      }

  std::vector<std::size_t> b_head(r), b_prime_head(r);
  for (std::size_t rho = 0; rho < r; ++rho) {
    std::vector<Rational> zero_value(p);
    Rational total = 0;
    for (std::size_t i = 0; i < p; ++i) {
      zero_value[i] = detail::value_at_zero_block(f.outputs[rho][i]);
      total += zero_value[i];
    }
    std::vector<Rational> b(p), b_prime(p);
    for (std::size_t j = 0; j < p; ++j) {
      const Rational others = total - zero_value[j];
      b[j] = others < 0 ? Rational(-others) : Rational(0);
      b_prime[j] = others > 0 ? others : Rational(0);
    }
    b_head[rho] = last.add_head(build_bias_head(b, last.in_rows, opts.masked), true);
    b_prime_head[rho] = last.add_head(build_bias_head(b_prime, last.in_rows, opts.masked), true);
  }

  NetBuilder builder(last.attention.heads.size());
  std::vector<LinearLattice> lanes;
  for (std::size_t rho = 0; rho < r; ++rho) {
    lanes.push_back({{last.head(b_head[rho])}});
    lanes.push_back({{last.head(b_prime_head[rho])}});
    for (std::size_t i = 0; i < p; ++i) lanes.push_back(pieces[rho][i]);
  }
  const auto reduced = reduce_lanes(builder, std::move(lanes));
  std::vector<LinearForm> outputs;
  const std::size_t stride = p + 2;
  for (std::size_t rho = 0; rho < r; ++rho) {
    LinearForm out = reduced[rho * stride] - reduced[rho * stride + 1];
    for (std::size_t i = 0; i < p; ++i) out = out + reduced[rho * stride + 2 + i];
    outputs.push_back(std::move(out));
  }
  const FeedForwardNet<Rational> net = builder.finish(outputs);

  CompiledEncoder out;
  out.n = n;
  out.p = p;
  out.mode = mode;
  out.stages = vb.stages;
  out.masked = opts.masked;
  out.layout = layout;
  out.blocks = std::move(vb.blocks);
  out.provenance = std::move(vb.provenance);
  const std::string tag = last.provenance + "+linear-spline";
  if (!opts.single_hidden_layer || net.hidden_layers() <= 1) {
    out.blocks.push_back({last.attention, net, false});
    out.provenance.push_back(tag);
  } else {
    const auto parts = split_hidden_layers(net);
    out.blocks.push_back({last.attention, parts.front(), false});
    out.provenance.push_back(tag + "/layer-1");
    for (std::size_t k = 1; k < parts.size(); ++k) {
      out.blocks.push_back(ffn_block_form(parts[k], parts[k].input_dim(), p, opts.masked));
      out.provenance.push_back("one-layer-block/layer-" + std::to_string(k + 1));
    }
  }
  return out;
}

/// Decoder (every head masked) computing an autoregressive spline.
inline CompiledEncoder compile_autoregressive(const SplineGrid& f, CompileOptions opts = {}) {
  opts.masked = true;
  return compile_spline(f, opts);
}

}  // namespace splineformer
