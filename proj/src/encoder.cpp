// Copyright 2026 The hyperrec Authors
// SPDX-License-Identifier: Apache-2.0

#include "hyperrec/encoder.hpp"

#include <cmath>
#include <string>

#include "hyperrec/error.hpp"

namespace hyperrec {

namespace {

constexpr double kActivationSlope = 0.2;

Var apply_activation(Var x, Activation a) {
  switch (a) {
    case Activation::tanh:
      return ad::tanh(x);
    case Activation::leaky_relu:
      return ad::leaky_relu(x, kActivationSlope);
    case Activation::identity:
      return x;
  }
  return x;
}

// Attention for one statement given its projected tokens.
//   query_bias: S x kBiasClasses, entry (i, c) = (W_Q e_i) . a^K_c
AttentionOutput attend(Var query, Var key, Var value, Var query_bias,
                       std::span<const TokenRole> roles, Var bias_value) {
  const std::size_t s = roles.size();
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(query.cols()));

  std::vector<ad::RemapEntry> logit_bias;
  std::vector<ad::RemapEntry> class_mass;
  for (std::size_t i = 0; i < s; ++i) {
    for (std::size_t j = 0; j < s; ++j) {
      const int c = bias_class(roles[i], roles[j]);
      if (c < 0) continue;
      logit_bias.push_back({i * s + j, i * kBiasClasses + static_cast<std::size_t>(c), 1.0});
      class_mass.push_back({i * kBiasClasses + static_cast<std::size_t>(c), i * s + j, 1.0});
    }
  }

  Var logits = ad::matmul_nt(query, key);
  if (!logit_bias.empty()) logits = ad::add(logits, ad::remap(query_bias, s, s, logit_bias));
  Var weights = ad::softmax_rows(ad::scale(logits, inv_sqrt_d));

  Var refined = ad::matmul(weights, value);
  if (!class_mass.empty()) {
    // sum_j w_ij a^V_ij = sum_c (sum of w_ij over pairs of class c) a^V_c
    Var mass = ad::remap(weights, s, kBiasClasses, class_mass);
    refined = ad::add(refined, ad::matmul(mass, bias_value));
  }
  return {refined, weights};
}

CsrMatrix selection(std::size_t rows, std::size_t cols, const std::vector<Triplet>& entries) {
  return CsrMatrix::from_triplets(rows, cols, entries);
}

}  // namespace

QualifierMode parse_qualifier_mode(std::string_view text) {
  if (text == "subtract") return QualifierMode::subtract;
  if (text == "multiply") return QualifierMode::multiply;
  if (text == "rotate") return QualifierMode::rotate;
  throw ConfigError("unknown qualifier mode '" + std::string(text) + "'");
}

Activation parse_activation(std::string_view text) {
  if (text == "tanh") return Activation::tanh;
  if (text == "leaky_relu") return Activation::leaky_relu;
  if (text == "identity") return Activation::identity;
  throw ConfigError("unknown activation '" + std::string(text) + "'");
}

AggregatorVariant parse_variant(std::string_view text) {
  if (text == "sdk") return AggregatorVariant::sdk;
  if (text == "stare") return AggregatorVariant::stare;
  throw ConfigError("unknown aggregator variant '" + std::string(text) + "'");
}

std::string_view to_string(QualifierMode m) {
  switch (m) {
    case QualifierMode::subtract: return "subtract";
    case QualifierMode::multiply: return "multiply";
    case QualifierMode::rotate: return "rotate";
  }
  return "?";
}

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::tanh: return "tanh";
    case Activation::leaky_relu: return "leaky_relu";
    case Activation::identity: return "identity";
  }
  return "?";
}

std::string_view to_string(AggregatorVariant v) {
  return v == AggregatorVariant::sdk ? "sdk" : "stare";
}

int bias_class(TokenRole i, TokenRole j) noexcept {
  auto other_class = [](TokenRole r) {
    switch (r) {
      case TokenRole::head: return static_cast<int>(BiasClass::relation_head);
      case TokenRole::tail: return static_cast<int>(BiasClass::relation_tail);
      case TokenRole::qualifier: return static_cast<int>(BiasClass::relation_qualifier);
      case TokenRole::relation: return -1;
    }
    return -1;
  };
  if (i == TokenRole::relation && j != TokenRole::relation) return other_class(j);
  if (j == TokenRole::relation && i != TokenRole::relation) return other_class(i);
  return -1;
}

Var compose_qualifier(Var value, Var relation, QualifierMode mode) {
  switch (mode) {
    case QualifierMode::subtract:
      return ad::sub(value, relation);
    case QualifierMode::multiply:
      return ad::hadamard(value, relation);
    case QualifierMode::rotate:
      if (value.cols() % 2 != 0) {
        throw ConfigError("rotate composition needs an even embedding width, got " +
                          std::to_string(value.cols()));
      }
      return ad::rotate_pairs(value, relation);
  }
  throw ConfigError("unknown qualifier mode");
}

AttentionOutput relation_aware_attention(Var tokens, std::span<const TokenRole> roles,
                                         const EncoderVars& vars) {
  if (tokens.rows() != roles.size()) {
    throw DimensionError("attention: " + std::to_string(tokens.rows()) + " tokens but " +
                         std::to_string(roles.size()) + " roles");
  }
  Var q = ad::matmul_nt(tokens, vars.w_query);
  Var k = ad::matmul_nt(tokens, vars.w_key);
  Var v = ad::matmul_nt(tokens, vars.w_value);
  Var qb = ad::matmul_nt(q, vars.bias_key);
  return attend(q, k, v, qb, roles, vars.bias_value);
}

Var merge_qualifiers(Var qualifiers, Var w_qualifier) {
  return ad::matmul_nt(ad::sum_rows(qualifiers), w_qualifier);
}

Var gamma_mix(Var x_relation, Var x_qualifiers, double alpha) {
  return ad::add(ad::scale(x_relation, alpha), ad::scale(x_qualifiers, 1.0 - alpha));
}

EncodedHeads encode_heads(const StatementStore& store, std::span<const EntityId> heads,
                          const EncoderVars& vars, const EncoderOptions& options) {
  const std::size_t d = vars.entity.cols();
  if (options.phi == QualifierMode::rotate && d % 2 != 0) {
    throw ConfigError("rotate composition needs an even embedding width, got " +
                      std::to_string(d));
  }
  if (options.alpha < 0.0 || options.alpha > 1.0) {
    throw ConfigError("alpha must lie in [0, 1]");
  }

  EncodedHeads out;
  out.isolated.assign(heads.size(), false);

  // Statements grouped by active head; active heads keep their input order.
  std::vector<std::size_t> active;     // positions into `heads`
  std::vector<std::size_t> stmt_ids;   // global statement indices
  std::vector<std::size_t> stmt_owner; // row into the active list
  for (std::size_t p = 0; p < heads.size(); ++p) {
    auto idx = store.indices_for_head(heads[p]);
    if (idx.empty()) {
      out.isolated[p] = true;
      continue;
    }
    for (std::size_t i : idx) {
      stmt_ids.push_back(i);
      stmt_owner.push_back(active.size());
    }
    active.push_back(p);
  }

  std::vector<std::size_t> isolated_rows;
  for (std::size_t p = 0; p < heads.size(); ++p) {
    if (out.isolated[p]) isolated_rows.push_back(index(heads[p]));
  }
  if (active.empty()) {
    out.embeddings = ad::gather_rows(vars.entity, isolated_rows);
    return out;
  }

  // Token layout: statement by statement, [head, relation, tail, q1, ...].
  // `base` stacks entity rows (head, tail), relation rows, then composed
  // qualifiers; `order` pulls them into statement layout.
  std::vector<std::size_t> entity_rows, relation_rows, qual_value_rows, qual_relation_rows;
  for (std::size_t sid : stmt_ids) {
    const Statement& s = store.statements()[sid];
    entity_rows.push_back(index(s.head));
    entity_rows.push_back(index(s.tail));
    relation_rows.push_back(index(s.relation));
    for (const auto& q : s.qualifiers) {
      qual_value_rows.push_back(index(q.value));
      qual_relation_rows.push_back(index(q.relation));
    }
  }
  const std::size_t n_stmt = stmt_ids.size();
  const std::size_t rel_base = entity_rows.size();
  const std::size_t qual_base = rel_base + relation_rows.size();

  std::vector<Var> blocks{ad::gather_rows(vars.entity, entity_rows),
                          ad::gather_rows(vars.relation, relation_rows)};
  if (!qual_value_rows.empty()) {
    blocks.push_back(compose_qualifier(ad::gather_rows(vars.entity, qual_value_rows),
                                       ad::gather_rows(vars.relation, qual_relation_rows),
                                       options.phi));
  }
  Var base = ad::concat_rows(blocks);

  std::vector<std::size_t> order;
  std::vector<std::size_t> offsets;  // first token of each statement
  std::vector<std::vector<TokenRole>> roles(n_stmt);
  std::size_t next_qual = 0;
  for (std::size_t k = 0; k < n_stmt; ++k) {
    const Statement& s = store.statements()[stmt_ids[k]];
    offsets.push_back(order.size());
    order.push_back(2 * k);
    order.push_back(rel_base + k);
    order.push_back(2 * k + 1);
    roles[k] = {TokenRole::head, TokenRole::relation, TokenRole::tail};
    for (std::size_t q = 0; q < s.qualifiers.size(); ++q) {
      order.push_back(qual_base + next_qual++);
      roles[k].push_back(TokenRole::qualifier);
    }
  }
  const std::size_t n_tok = order.size();
  Var tokens = ad::gather_rows(base, order);

  Var refined = tokens;
  if (options.self_attention) {
    Var q_all = ad::matmul_nt(tokens, vars.w_query);
    Var k_all = ad::matmul_nt(tokens, vars.w_key);
    Var v_all = ad::matmul_nt(tokens, vars.w_value);
    Var qb_all = ad::matmul_nt(q_all, vars.bias_key);
    std::vector<Var> parts;
    parts.reserve(n_stmt);
    std::vector<std::size_t> range;
    for (std::size_t k = 0; k < n_stmt; ++k) {
      range.clear();
      for (std::size_t t = 0; t < roles[k].size(); ++t) range.push_back(offsets[k] + t);
      parts.push_back(attend(ad::gather_rows(q_all, range), ad::gather_rows(k_all, range),
                             ad::gather_rows(v_all, range), ad::gather_rows(qb_all, range),
                             roles[k], vars.bias_value)
                          .refined);
    }
    refined = ad::concat_rows(parts);
  }

  std::vector<std::size_t> head_tok, rel_tok, tail_tok;
  std::vector<Triplet> qual_sum, head_mean, neighbor_sum;
  std::vector<std::size_t> per_head(active.size(), 0);
  for (std::size_t k = 0; k < n_stmt; ++k) ++per_head[stmt_owner[k]];
  for (std::size_t k = 0; k < n_stmt; ++k) {
    head_tok.push_back(offsets[k]);
    rel_tok.push_back(offsets[k] + 1);
    tail_tok.push_back(offsets[k] + 2);
    for (std::size_t t = 3; t < roles[k].size(); ++t) qual_sum.push_back({k, offsets[k] + t, 1.0});
    head_mean.push_back({stmt_owner[k], k, 1.0 / static_cast<double>(per_head[stmt_owner[k]])});
    neighbor_sum.push_back({stmt_owner[k], k, 1.0});
  }

  Var x_rel = ad::gather_rows(refined, rel_tok);
  Var x_tail = ad::gather_rows(refined, tail_tok);
  Var x_qs = ad::matmul_nt(ad::spmm(selection(n_stmt, n_tok, qual_sum), refined),
                        vars.w_qualifier);
  Var context = gamma_mix(x_rel, x_qs, options.alpha);
  Var message = ad::matmul_nt(compose_qualifier(x_tail, context, options.phi),
                           vars.w_forward);
  Var pre = ad::spmm(selection(active.size(), n_stmt, neighbor_sum), message);
  if (options.variant == AggregatorVariant::sdk) {
    Var x_head = ad::gather_rows(refined, head_tok);
    pre = ad::add(ad::spmm(selection(active.size(), n_stmt, head_mean), x_head), pre);
  }
  Var encoded = apply_activation(pre, options.activation);

  if (isolated_rows.empty()) {
    out.embeddings = encoded;
    return out;
  }
  // Reassemble [encoded; raw] into the caller's head order.
  const Var stacked[] = {encoded, ad::gather_rows(vars.entity, isolated_rows)};
  Var all = ad::concat_rows(stacked);
  std::vector<std::size_t> back(heads.size());
  std::size_t a = 0, r = active.size();
  for (std::size_t p = 0; p < heads.size(); ++p) back[p] = out.isolated[p] ? r++ : a++;
  out.embeddings = ad::gather_rows(all, back);
  return out;
}

Var aggregate_head(const StatementStore& store, EntityId head, const EncoderVars& vars,
                   const EncoderOptions& options) {
  const EntityId one[] = {head};
  return encode_heads(store, one, vars, options).embeddings;
}

EncodedHeads encode_all_items(const StatementStore& store, std::span<const EntityId> item_entity,
                              const EncoderVars& vars, const EncoderOptions& options) {
  return encode_heads(store, item_entity, vars, options);
}

}  // namespace hyperrec
