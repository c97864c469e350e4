// Copyright 2026 The hyperrec Authors
// SPDX-License-Identifier: Apache-2.0

#include "hyperrec/objective.hpp"

#include <algorithm>
#include <string>

#include "hyperrec/error.hpp"

namespace hyperrec {

namespace {
constexpr int kRejectionCap = 100;
}

double score(std::span<const double> user, std::span<const double> item) noexcept {
  return dot(user, item);
}

double margin_loss(std::span<const std::pair<double, double>> scored_pairs) noexcept {
  double total = 0.0;
  for (const auto& [pos, neg] : scored_pairs) total += std::max(0.0, kMargin - pos + neg);
  return total;
}

Var margin_loss(Var positive, Var negative) {
  return ad::sum_all(ad::relu(ad::add_scalar(ad::sub(negative, positive), kMargin)));
}

Var row_scores(Var users, Var items) { return ad::sum_cols(ad::hadamard(users, items)); }

Var infonce(Var local, Var global, double tau, bool include_positive) {
  if (!local.value().same_shape(global.value())) {
    throw DimensionError("infonce: shape mismatch " + local.value().shape_string() + " vs " +
                         global.value().shape_string());
  }
  const std::size_t n = local.rows();
  if (!include_positive && n < 2) {
    throw ContractError("infonce: need at least two instances, got " + std::to_string(n));
  }
  if (n == 0) throw ContractError("infonce: no instances");
  if (!(tau > 0.0)) throw ContractError("infonce: temperature must be positive");

  Var sims = ad::scale(ad::matmul_nt(ad::normalize_rows(local),
                                  ad::normalize_rows(global)),
                       1.0 / tau);
  std::vector<ad::RemapEntry> diagonal;
  diagonal.reserve(n);
  for (std::size_t i = 0; i < n; ++i) diagonal.push_back({i, i * n + i, 1.0});
  Var positives = ad::remap(sims, n, 1, diagonal);
  Var denominators = ad::logsumexp_rows(sims, !include_positive);
  return ad::sum_all(ad::sub(denominators, positives));
}

Var total_loss(Var ranking, Var contrast_users, Var contrast_items, Var parameter_sum_squares,
               const LossWeights& weights) {
  Var loss = ranking;
  if (weights.lambda1 != 0.0) {
    loss = ad::add(loss, ad::scale(ad::add(contrast_users, contrast_items), weights.lambda1));
  }
  if (weights.lambda2 != 0.0) {
    loss = ad::add(loss, ad::scale(parameter_sum_squares, weights.lambda2));
  }
  return loss;
}

ItemId sample_negative(const InteractionGraph& graph, UserId user, Rng& rng) {
  const std::size_t n_items = graph.item_count();
  const auto positives = graph.items_of(user);
  if (positives.size() >= n_items) {
    throw SamplingError("user " + std::to_string(index(user)) +
                        " has interacted with every item; no negative exists");
  }
  for (int attempt = 0; attempt < kRejectionCap; ++attempt) {
    const ItemId v{static_cast<std::uint32_t>(rng.uniform_index(n_items))};
    if (!std::binary_search(positives.begin(), positives.end(), v)) return v;
  }
  // Draw the r-th non-interacted item directly.
  std::size_t r = rng.uniform_index(n_items - positives.size());
  std::size_t p = 0;
  for (std::size_t v = 0; v < n_items; ++v) {
    if (p < positives.size() && index(positives[p]) == v) {
      ++p;
      continue;
    }
    if (r-- == 0) return ItemId{static_cast<std::uint32_t>(v)};
  }
  throw SamplingError("complement draw failed");
}

}  // namespace hyperrec
