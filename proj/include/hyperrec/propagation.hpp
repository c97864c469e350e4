// Copyright 2026 The hyperrec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>

#include "hyperrec/autodiff.hpp"
#include "hyperrec/data.hpp"
#include "hyperrec/sparse.hpp"

namespace hyperrec {

/// Symmetric degree-normalized bipartite operator: entry (u, v) is
/// 1 / sqrt(|N(u)| |N(v)|) for every observed interaction.
class BipartiteOperator {
 public:
  BipartiteOperator() = default;
  explicit BipartiteOperator(const InteractionGraph& graph);

  /// |U| x |V|; users gather from items.
  const CsrMatrix& user_from_item() const noexcept { return user_from_item_; }
  /// |V| x |U|; the exact transpose of user_from_item().
  const CsrMatrix& item_from_user() const noexcept { return item_from_user_; }

 private:
  CsrMatrix user_from_item_;
  CsrMatrix item_from_user_;
};

struct LayerMessages {
  Var users;  // |U| x d
  Var items;  // |V| x d
};

/// One LightGCN hop. No self-connections, weights or nonlinearity; nodes
/// without neighbors receive zero.
LayerMessages lightgcn_layer(const BipartiteOperator& op, Var users, Var items);

/// Next-layer embedding: local + global, elementwise.
Var fuse(Var local, Var global);

/// Mean over all layers (layer 0 included).
Var final_representation(std::span<const Var> layers);

}  // namespace hyperrec
