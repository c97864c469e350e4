// Copyright 2026 The hyperrec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "hyperrec/autodiff.hpp"
#include "hyperrec/data.hpp"

namespace hyperrec {

/// Interaction function used both to fold a qualifier pair into one token and
/// to combine a tail with its (relation, qualifier) context.
enum class QualifierMode { subtract, multiply, rotate };
/// Output activation of the aggregator.
enum class Activation { tanh, leaky_relu, identity };
/// `sdk` adds the mean head term to the neighbor sum; `stare` omits it.
enum class AggregatorVariant { sdk, stare };

QualifierMode parse_qualifier_mode(std::string_view text);
Activation parse_activation(std::string_view text);
AggregatorVariant parse_variant(std::string_view text);
std::string_view to_string(QualifierMode m);
std::string_view to_string(Activation a);
std::string_view to_string(AggregatorVariant v);

struct EncoderOptions {
  QualifierMode phi = QualifierMode::multiply;
  Activation activation = Activation::tanh;
  AggregatorVariant variant = AggregatorVariant::sdk;
  double alpha = 0.5;
  /// false feeds raw token embeddings to the aggregator (attention removed).
  bool self_attention = true;
};

/// Encoder parameters bound to a tape. Projection matrices act on column
/// vectors (W e); rows of bias_key/bias_value are indexed by BiasClass.
struct EncoderVars {
  Var entity;       // |E| x d
  Var relation;     // |R| x d
  Var w_query;      // d x d
  Var w_key;        // d x d
  Var w_value;      // d x d
  Var bias_key;     // kBiasClasses x d
  Var bias_value;   // kBiasClasses x d
  Var w_qualifier;  // d x d
  Var w_forward;    // d x d
};

enum class TokenRole : std::uint8_t { head, relation, tail, qualifier };

/// Learned attention biases exist only between the relation token and one
/// other token; the class depends on the other token's role.
enum class BiasClass : std::uint8_t { relation_head = 0, relation_tail = 1, relation_qualifier = 2 };
inline constexpr std::size_t kBiasClasses = 3;

/// Bias class for the ordered token pair (i, j), or -1 when a^K_ij = a^V_ij = 0.
int bias_class(TokenRole i, TokenRole j) noexcept;

/// Qualifier composition phi(q_r, q_v) on row blocks (n x d each).
Var compose_qualifier(Var value, Var relation, QualifierMode mode);

struct AttentionOutput {
  Var refined;  // S x d
  Var weights;  // S x S, rows sum to one
};

/// Single-head relation-aware self-attention over the tokens of one statement.
AttentionOutput relation_aware_attention(Var tokens, std::span<const TokenRole> roles,
                                         const EncoderVars& vars);

/// W_q times the sum of the qualifier rows (n x d, n may be 0) as a 1 x d row.
Var merge_qualifiers(Var qualifiers, Var w_qualifier);

/// alpha * x_r + (1 - alpha) * x_qs
Var gamma_mix(Var x_relation, Var x_qualifiers, double alpha);

struct EncodedHeads {
  Var embeddings;              // heads.size() x d
  std::vector<bool> isolated;  // heads without statements kept their raw embedding
};

/// Knowledge-aware representation of each listed head entity from its statements.
EncodedHeads encode_heads(const StatementStore& store, std::span<const EntityId> heads,
                          const EncoderVars& vars, const EncoderOptions& options);

/// One head; 1 x d.
Var aggregate_head(const StatementStore& store, EntityId head, const EncoderVars& vars,
                   const EncoderOptions& options);

/// Row v is the encoding of item v's aligned entity.
EncodedHeads encode_all_items(const StatementStore& store, std::span<const EntityId> item_entity,
                              const EncoderVars& vars, const EncoderOptions& options);

}  // namespace hyperrec
