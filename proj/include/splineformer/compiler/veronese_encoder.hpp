// Copyright 2026 The Splineformer Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "splineformer/compiler/compiled.hpp"
#include "splineformer/compiler/heads.hpp"
#include "splineformer/compiler/layout.hpp"
#include "splineformer/compiler/netbuilder.hpp"
#include "splineformer/encoder.hpp"
#include "splineformer/errors.hpp"
#include "splineformer/veronese.hpp"

namespace splineformer {

using ColumnTargets = std::vector<std::set<Monomial>>;

/// Attention layer under construction together with the linear readout the
/// following network should produce from the head rows.
struct OpenStage {
  std::size_t in_rows = 0;
  std::size_t p = 0;
  bool masked = false;
  MultiheadAttention<Rational> attention;
  std::vector<bool> nonnegative;  // per head row
  std::vector<LinearForm> readout;
  LabelGrid labels;  // per readout row
  std::string provenance;

  std::size_t add_head(RatHead h, bool nonneg = false) {
    attention.heads.push_back(std::move(h));
    nonnegative.push_back(nonneg);
    return attention.heads.size() - 1;
  }

  LinearForm head(std::size_t row) const { return LinearForm::coordinate(row, nonnegative.at(row)); }

  void add_readout(LinearForm f, std::size_t column, std::optional<Monomial> label) {
    readout.push_back(std::move(f));
    labels.emplace_back(p);
    labels.back()[column] = std::move(label);
  }

  /// Readout row i copies head row i.
  void identity_readout(const std::vector<std::pair<std::size_t, std::optional<Monomial>>>& head_labels) {
    for (std::size_t r = 0; r < head_labels.size(); ++r) add_readout(head(r), head_labels[r].first, head_labels[r].second);
  }
};

/// Encoder block computing the stage readout; returns the labels of its output.
inline std::pair<EncoderBlock<Rational>, LabelGrid> close_stage(const OpenStage& stage) {
  if (stage.attention.heads.empty()) throw ContractError("stage has no heads");
  NetBuilder builder(stage.attention.heads.size());
  std::vector<LinearLattice> lanes;
  lanes.reserve(stage.readout.size());
  for (const auto& f : stage.readout) lanes.push_back({{f}});
  const auto reduced = reduce_lanes(builder, std::move(lanes));
  EncoderBlock<Rational> block{stage.attention, builder.finish(reduced), false};
  return {std::move(block), stage.labels};
}

/// Blocks of the quadratic stages, with the last attention layer left open.
struct VeroneseBuild {
  Encoder<Rational> blocks;
  std::vector<std::string> provenance;
  OpenStage open;
  std::size_t stages = 0;
  std::size_t max_rows = 0;
};

namespace detail {

inline std::size_t ceil_log2(std::size_t s) {
  std::size_t k = 0;
  while ((std::size_t{1} << k) < s) ++k;
  return k;
}

inline LabelGrid input_labels(std::size_t n, std::size_t p) {
  LabelGrid g(n, std::vector<std::optional<Monomial>>(p));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < p; ++j) {
      g[i][j] = Monomial::of(Variable{static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)});
    }
  return g;
}

inline std::optional<Monomial> product_label(const std::vector<std::optional<Monomial>>& parts) {
  Monomial m;
  for (const auto& part : parts) {
    if (!part) return std::nullopt;
    m = m * *part;
  }
  return m;
}

inline void check_cap(std::size_t count, std::size_t cap, const std::string& what) {
  if (count > cap) {
    throw ResourceError(what + " needs " + std::to_string(count) + " rows, above the cap of " +
                        std::to_string(cap) + "; use pruned mode");
  }
}

/// Copy heads for every (entry, column) pair plus one constant head per column.
inline OpenStage faithful_copy_stage(const LabelGrid& in, std::size_t p, bool masked, std::size_t cap,
                                     const std::string& tag) {
  const std::size_t n_in = in.size();
  check_cap(n_in * p * p + p, cap, tag);
  OpenStage st{n_in, p, masked, {}, {}, {}, {}, tag};
  std::vector<std::pair<std::size_t, std::optional<Monomial>>> head_labels;
  for (std::size_t i = 0; i < n_in; ++i)
    for (std::size_t jj = 0; jj < p; ++jj)
      for (std::size_t j = 0; j < p; ++j) {
        st.add_head(build_copy_head(i, jj, j, n_in, p, masked));
        head_labels.emplace_back(j, (masked && jj > j) ? std::nullopt : in[i][jj]);
      }
  for (std::size_t j = 0; j < p; ++j) {
    st.add_head(build_const_head(j, n_in, p, masked), true);
    head_labels.emplace_back(j, Monomial{});
  }
  st.identity_readout(head_labels);
  return st;
}

/// Second half of a faithful stage: diagonal copies, constants, and the
/// z_a (z_b)^+ and z_a (-z_b)^+ heads for every ordered entry pair per column;
/// the readout lays out v_2 of the stage input per column block.
inline OpenStage faithful_product_stage(const LabelGrid& copied, std::size_t n_prev, std::size_t p, bool masked,
                                        std::size_t cap, const std::string& tag) {
  const std::size_t entries = n_prev * p;
  const std::size_t n_in = copied.size();
  check_cap(n_prev * p * p + p + 2 * p * entries * entries, cap, tag);
  const VeroneseIndex idx(row_major_variables(1, entries), 2);
  check_cap(p * idx.size(), cap, tag);

  OpenStage st{n_in, p, masked, {}, {}, {}, {}, tag};
  const std::size_t copies = n_prev * p * p;
  for (std::size_t q = 0; q < copies; ++q) st.add_head(build_copy_head(q, q % p, q % p, n_in, p, masked));
  std::vector<std::size_t> const_row(p);
  for (std::size_t j = 0; j < p; ++j) const_row[j] = st.add_head(build_const_head(j, n_in, p, masked), true);
  auto source_row = [&](std::size_t a, std::size_t j) { return a * p + j; };
  std::map<std::tuple<std::size_t, std::size_t, std::size_t>, std::size_t> plus, minus;
  for (int sign = 0; sign < 2; ++sign)
    for (std::size_t j = 0; j < p; ++j)
      for (std::size_t a = 0; a < entries; ++a)
        for (std::size_t b = 0; b < entries; ++b) {
          const std::size_t h =
              st.add_head(build_product_head(source_row(a, j), source_row(b, j), j, sign == 1, n_in, p, masked));
          (sign == 0 ? plus : minus)[{j, a, b}] = h;
        }

  for (std::size_t j = 0; j < p; ++j) {
    for (const auto& mono : idx.monomials()) {
      std::vector<std::size_t> vars;
      for (const auto& [v, e] : mono.factors())
        for (unsigned k = 0; k < e; ++k) vars.push_back(v.col);
      std::vector<std::optional<Monomial>> parts;
      for (std::size_t a : vars) parts.push_back(copied[source_row(a, j)][j]);
      LinearForm f;
      if (vars.empty()) {
        f = st.head(const_row[j]);
      } else if (vars.size() == 1) {
        f = st.head(source_row(vars[0], j));
      } else {
        f = st.head(plus.at({j, vars[0], vars[1]})) - st.head(minus.at({j, vars[0], vars[1]}));
      }
      st.add_readout(std::move(f), j, product_label(parts));
    }
  }
  return st;
}

/// Cell of `in` holding `m` that a copy head may move into column j.
inline std::pair<std::size_t, std::size_t> find_source(const LabelGrid& in, const Monomial& m, std::size_t j,
                                                       bool masked) {
  std::optional<std::pair<std::size_t, std::size_t>> fallback;
  for (std::size_t r = 0; r < in.size(); ++r)
    for (std::size_t c = 0; c < in[r].size(); ++c) {
      if (!in[r][c] || !(*in[r][c] == m)) continue;
      if (c == j) return {r, c};
      if (!fallback && (!masked || c <= j)) fallback = std::make_pair(r, c);
    }
  if (!fallback) {
    throw ContractError("no entry holding " + to_string(m) + " is visible from column " + std::to_string(j + 1));
  }
  return *fallback;
}

/// Copies every requested factor into its target column.
inline OpenStage pruned_copy_stage(const LabelGrid& in, std::size_t p, bool masked,
                                   const std::set<std::pair<std::size_t, Monomial>>& requests,
                                   const std::string& tag) {
  OpenStage st{in.size(), p, masked, {}, {}, {}, {}, tag};
  std::vector<std::pair<std::size_t, std::optional<Monomial>>> head_labels;
  for (const auto& [j, f] : requests) {
    const auto [r, c] = find_source(in, f, j, masked);
    st.add_head(build_copy_head(r, c, j, in.size(), p, masked));
    head_labels.emplace_back(j, f);
  }
  if (head_labels.empty()) {
    st.add_head(build_const_head(0, in.size(), p, masked), true);
    head_labels.emplace_back(0, Monomial{});
  }
  st.identity_readout(head_labels);
  return st;
}

/// Multiplies the copied factors pairwise into the targets of each column.
inline OpenStage pruned_product_stage(const LabelGrid& copied, std::size_t p, bool masked, const ColumnTargets& targets,
                                      std::size_t half, const std::string& tag) {
  const std::size_t n_in = copied.size();
  OpenStage st{n_in, p, masked, {}, {}, {}, {}, tag};
  std::map<std::pair<Monomial, std::size_t>, std::size_t> row_of;
  for (std::size_t r = 0; r < n_in; ++r)
    for (std::size_t c = 0; c < p; ++c) {
      if (copied[r][c]) row_of.emplace(std::make_pair(*copied[r][c], c), r);
    }
  for (std::size_t j = 0; j < p; ++j) {
    for (const auto& m : targets[j]) {
      const auto factors = cover_monomial(m, 2, half);
      LinearForm f;
      if (factors.empty()) {
        f = st.head(st.add_head(build_const_head(j, n_in, p, masked), true));
      } else if (factors.size() == 1) {
        f = st.head(st.add_head(build_copy_head(row_of.at({factors[0], j}), j, j, n_in, p, masked)));
      } else {
        const std::size_t a = row_of.at({factors[0], j});
        const std::size_t b = row_of.at({factors[1], j});
        const std::size_t hp = st.add_head(build_product_head(a, b, j, false, n_in, p, masked));
        const std::size_t hm = st.add_head(build_product_head(a, b, j, true, n_in, p, masked));
        f = st.head(hp) - st.head(hm);
      }
      st.add_readout(std::move(f), j, m);
    }
  }
  if (st.attention.heads.empty()) st.add_head(build_const_head(0, n_in, p, masked), true);
  return st;
}

/// Single-block representation for degree <= 1.
inline OpenStage linear_stage(std::size_t n, std::size_t p, CompileMode mode, bool masked,
                              const ColumnTargets& targets, std::size_t cap) {
  const LabelGrid in = input_labels(n, p);
  if (mode == CompileMode::faithful) return faithful_copy_stage(in, p, masked, cap, "veronese-1/copy");
  OpenStage st{n, p, masked, {}, {}, {}, {}, "veronese-1/copy"};
  for (std::size_t j = 0; j < p; ++j) {
    for (const auto& m : targets[j]) {
      if (m.is_constant()) {
        st.add_readout(st.head(st.add_head(build_const_head(j, n, p, masked), true)), j, m);
      } else {
        const Variable v = m.factors().front().first;
        st.add_readout(st.head(st.add_head(build_copy_head(v.row, v.col, j, n, p, masked))), j, m);
      }
    }
  }
  if (st.attention.heads.empty()) st.add_head(build_const_head(0, n, p, masked), true);
  return st;
}

}  // namespace detail

/// Quadratic stages reaching degree s, last attention layer left open.
/// `targets[j]` lists the monomials column j must carry (pruned mode only).
inline VeroneseBuild build_veronese_stages(std::size_t n, std::size_t p, unsigned s, CompileMode mode, bool masked,
                                           std::size_t cap, const ColumnTargets& targets) {
  if (n == 0 || p == 0) throw ContractError("input shape must be positive");
  if (s == 0) throw ContractError("Veronese degree must be at least 1");
  if (mode == CompileMode::automatic) throw ContractError("compile mode must be resolved before building");
  if (mode == CompileMode::pruned && targets.size() != p) throw ContractError("need one target set per column");
  for (std::size_t j = 0; j < targets.size(); ++j) {
    for (const auto& m : targets[j]) {
      if (m.degree() > s) throw ContractError("target " + to_string(m) + " exceeds degree " + std::to_string(s));
      if (masked && m.max_column() > static_cast<long>(j)) {
        throw ContractError("target " + to_string(m) + " reads columns after " + std::to_string(j + 1));
      }
    }
  }

  VeroneseBuild vb;
  const std::size_t stages = s <= 1 ? 0 : detail::ceil_log2(s);
  vb.stages = std::max<std::size_t>(stages, 1);
  if (stages == 0) {
    vb.open = detail::linear_stage(n, p, mode, masked, targets, cap);
    return vb;
  }

  // Targets of every stage, propagated backwards through the factorizations.
  std::vector<ColumnTargets> stage_targets(stages + 1, ColumnTargets(p));
  if (mode == CompileMode::pruned) {
    stage_targets[stages] = targets;
    for (std::size_t k = stages; k >= 2; --k) {
      const std::size_t half = std::size_t{1} << (k - 1);
      for (std::size_t j = 0; j < p; ++j)
        for (const auto& m : stage_targets[k][j])
          for (const auto& f : cover_monomial(m, 2, half)) stage_targets[k - 1][j].insert(f);
    }
  }

  LabelGrid current = detail::input_labels(n, p);
  for (std::size_t k = 1; k <= stages; ++k) {
    const std::string tag = "veronese-" + std::to_string(k) + "/" + std::to_string(stages);
    OpenStage copy;
    if (mode == CompileMode::faithful) {
      copy = detail::faithful_copy_stage(current, p, masked, cap, tag + "/copy");
    } else {
      std::set<std::pair<std::size_t, Monomial>> requests;
      const std::size_t half = std::size_t{1} << (k - 1);
      for (std::size_t j = 0; j < p; ++j)
        for (const auto& m : stage_targets[k][j])
          for (const auto& f : cover_monomial(m, 2, half)) requests.emplace(j, f);
      copy = detail::pruned_copy_stage(current, p, masked, requests, tag + "/copy");
    }
    auto [copy_block, copied] = close_stage(copy);
    vb.max_rows = std::max(vb.max_rows, copied.size());
    vb.blocks.push_back(std::move(copy_block));
    vb.provenance.push_back(copy.provenance);

    OpenStage product = mode == CompileMode::faithful
                            ? detail::faithful_product_stage(copied, current.size(), p, masked, cap, tag + "/product")
                            : detail::pruned_product_stage(copied, p, masked, stage_targets[k],
                                                           std::size_t{1} << (k - 1), tag + "/product");
    if (k == stages) {
      vb.open = std::move(product);
    } else {
      auto [block, labels] = close_stage(product);
      vb.max_rows = std::max(vb.max_rows, labels.size());
      vb.blocks.push_back(std::move(block));
      vb.provenance.push_back(product.provenance);
      current = std::move(labels);
    }
  }
  return vb;
}

/// Every monomial of degree <= s visible from each column (all columns up to
/// j when masked).
inline ColumnTargets veronese_targets(std::size_t n, std::size_t p, unsigned s, bool masked) {
  const VeroneseIndex idx(n, p, s);
  ColumnTargets t(p);
  for (std::size_t j = 0; j < p; ++j)
    for (const auto& m : idx.monomials()) {
      if (!masked || m.max_column() <= static_cast<long>(j)) t[j].insert(m);
    }
  return t;
}

/// Encoder whose output carries, in every column j, the monomials of degree
/// <= s of the input (those of columns 1..j when masked) at the layout rows.
inline CompiledEncoder build_veronese_encoder(std::size_t n, std::size_t p, unsigned s,
                                              const CompileOptions& opts = {}) {
  if (opts.residual) throw ContractError("residual connections need shape-preserving blocks");
  const CompileMode mode = resolve_mode(opts.mode, s, p);
  VeroneseBuild vb = build_veronese_stages(n, p, s, mode, opts.masked, opts.row_cap, veronese_targets(n, p, s, opts.masked));
  auto [block, labels] = close_stage(vb.open);
  vb.blocks.push_back(std::move(block));
  vb.provenance.push_back(vb.open.provenance);

  CompiledEncoder out;
  out.n = n;
  out.p = p;
  out.blocks = std::move(vb.blocks);
  out.provenance = std::move(vb.provenance);
  out.layout = MonomialLayout::from_labels(labels);
  out.mode = mode;
  out.stages = vb.stages;
  out.masked = opts.masked;
  return out;
}

/// The two-block encoder whose output holds v_2 of the input in every column.
inline CompiledEncoder build_eps2(std::size_t n, std::size_t p, const CompileOptions& opts = {}) {
  return build_veronese_encoder(n, p, 2, opts);
}

}  // namespace splineformer
