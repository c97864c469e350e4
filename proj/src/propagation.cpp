// Copyright 2026 The hyperrec Authors
// SPDX-License-Identifier: Apache-2.0

#include "hyperrec/propagation.hpp"

#include <cmath>

#include "hyperrec/error.hpp"

namespace hyperrec {

BipartiteOperator::BipartiteOperator(const InteractionGraph& graph) {
  std::vector<Triplet> entries;
  entries.reserve(graph.edge_count());
  for (const auto& e : graph.edges()) {
    const double w = 1.0 / std::sqrt(static_cast<double>(graph.user_degree(e.user)) *
                                      static_cast<double>(graph.item_degree(e.item)));
    entries.push_back({index(e.user), index(e.item), w});
  }
  user_from_item_ = CsrMatrix::from_triplets(graph.user_count(), graph.item_count(), entries);
  item_from_user_ = user_from_item_.transposed();
}

LayerMessages lightgcn_layer(const BipartiteOperator& op, Var users, Var items) {
  return {ad::spmm(op.user_from_item(), items), ad::spmm(op.item_from_user(), users)};
}

Var fuse(Var local, Var global) {
  if (!local.value().same_shape(global.value())) {
    throw DimensionError("fuse: shape mismatch " + local.value().shape_string() + " vs " +
                         global.value().shape_string());
  }
  return ad::add(global, local);
}

Var final_representation(std::span<const Var> layers) {
  if (layers.empty()) throw ContractError("final_representation: no layers");
  Var total = layers.front();
  for (std::size_t l = 1; l < layers.size(); ++l) total = ad::add(total, layers[l]);
  return ad::scale(total, 1.0 / static_cast<double>(layers.size()));
}

}  // namespace hyperrec
