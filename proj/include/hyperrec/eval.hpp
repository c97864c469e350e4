// Copyright 2026 The hyperrec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "hyperrec/data.hpp"
#include "hyperrec/tensor.hpp"

namespace hyperrec {

/// Top-k item indices for one user by inner-product score, highest first.
/// Items adjacent to the user in `mask` are skipped. Equal scores rank the
/// lower item index first. May return fewer than k items.
std::vector<std::size_t> rank_items(const Tensor& users, const Tensor& items, std::size_t user,
                                    std::size_t k, const InteractionGraph* mask = nullptr);

/// |top-k ∩ relevant| / |relevant|. nullopt when `relevant` is empty, so the
/// caller leaves that user out of the average. Missing ranks count as misses.
std::optional<double> recall_at_k(std::span<const std::size_t> ranked,
                                  std::span<const std::size_t> relevant, std::size_t k);

/// Binary-gain NDCG with gain 1/log2(rank + 1) and the ideal DCG taken over
/// min(|relevant|, k) positions. nullopt when `relevant` is empty.
std::optional<double> ndcg_at_k(std::span<const std::size_t> ranked,
                                std::span<const std::size_t> relevant, std::size_t k);

/// Mean cosine distance over ordered pairs of distinct rows. Zero-norm rows
/// have cosine 0 with everything. Requires at least two rows.
double mad(const Tensor& embeddings);

/// Group id per item: items sorted by (degree, index) ascending and cut into
/// `groups` consecutive buckets whose sizes differ by at most one.
std::vector<std::size_t> density_groups(std::span<const std::size_t> degrees, std::size_t groups);

struct GroupMetrics {
  std::size_t group = 0;
  std::size_t items = 0;
  std::size_t min_degree = 0;
  std::size_t max_degree = 0;
  std::size_t target_edges = 0;  // held-out edges landing in this group
  std::size_t users = 0;         // users averaged into `recall`
  double recall = 0.0;
};

/// Per-group recall: for every user with held-out items in group g, the share
/// of those items found in the user's overall top-k; averaged over such users.
std::vector<GroupMetrics> density_group_eval(const Tensor& users, const Tensor& items,
                                             const InteractionGraph& train,
                                             const InteractionGraph& target, std::size_t groups,
                                             std::size_t k, const InteractionGraph* mask);

struct EvalMetrics {
  double recall = 0.0;
  double ndcg = 0.0;
  std::size_t users = 0;  // users with at least one held-out item
  double mad_users = 0.0;
  double mad_items = 0.0;
  std::vector<GroupMetrics> groups;
};

struct EvalRequest {
  const Tensor* users = nullptr;      // scoring embeddings
  const Tensor* items = nullptr;
  const Tensor* mad_users = nullptr;  // smoothness embeddings; scoring ones if null
  const Tensor* mad_items = nullptr;
  const InteractionGraph* train = nullptr;   // degrees for the density groups
  const InteractionGraph* target = nullptr;  // held-out relevance
  const InteractionGraph* mask = nullptr;    // excluded from rankings, may be null
  std::size_t k = 20;
  std::size_t groups = 4;
};

/// Full ranking over all items for every user with held-out items,
/// macro-averaged Recall@k and NDCG@k, MAD of both sides and density groups.
EvalMetrics evaluate(const EvalRequest& request);

/// metrics.tsv: header "metric<TAB>value", then one row per scalar.
void write_metrics_tsv(std::ostream& out, const EvalMetrics& metrics);
/// groups.tsv: group, items, min_degree, max_degree, target_edges, users, recall.
void write_groups_tsv(std::ostream& out, std::span<const GroupMetrics> groups);

}  // namespace hyperrec
