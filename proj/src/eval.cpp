// Copyright 2026 The hyperrec Authors
// SPDX-License-Identifier: Apache-2.0

#include "hyperrec/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "hyperrec/config.hpp"
#include "hyperrec/error.hpp"

namespace hyperrec {

namespace {

std::vector<std::size_t> item_indices(std::span<const ItemId> items) {
  std::vector<std::size_t> out;
  out.reserve(items.size());
  for (ItemId v : items) out.push_back(index(v));
  return out;
}

bool contains(std::span<const std::size_t> sorted, std::size_t v) {
  return std::binary_search(sorted.begin(), sorted.end(), v);
}

}  // namespace

std::vector<std::size_t> rank_items(const Tensor& users, const Tensor& items, std::size_t user,
                                    std::size_t k, const InteractionGraph* mask) {
  if (users.cols() != items.cols()) {
    throw DimensionError("rank_items: user dim " + std::to_string(users.cols()) + " vs item dim " +
                         std::to_string(items.cols()));
  }
  if (user >= users.rows()) throw ContractError("rank_items: user out of range");
  const auto u = users.row(user);
  std::vector<std::pair<double, std::size_t>> scored;
  scored.reserve(items.rows());
  for (std::size_t v = 0; v < items.rows(); ++v) {
    if (mask && user < mask->user_count() && v < mask->item_count() &&
        mask->has_edge(UserId(user), ItemId(v))) {
      continue;
    }
    scored.emplace_back(dot(u, items.row(v)), v);
  }
  auto better = [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  };
  const std::size_t n = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(n), scored.end(),
                    better);
  std::vector<std::size_t> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = scored[i].second;
  return out;
}

std::optional<double> recall_at_k(std::span<const std::size_t> ranked,
                                  std::span<const std::size_t> relevant, std::size_t k) {
  if (relevant.empty()) return std::nullopt;
  std::vector<std::size_t> rel(relevant.begin(), relevant.end());
  std::sort(rel.begin(), rel.end());
  rel.erase(std::unique(rel.begin(), rel.end()), rel.end());
  std::size_t hits = 0;
  for (std::size_t i = 0; i < std::min(k, ranked.size()); ++i) hits += contains(rel, ranked[i]);
  return static_cast<double>(hits) / static_cast<double>(rel.size());
}

std::optional<double> ndcg_at_k(std::span<const std::size_t> ranked,
                                std::span<const std::size_t> relevant, std::size_t k) {
  if (relevant.empty()) return std::nullopt;
  std::vector<std::size_t> rel(relevant.begin(), relevant.end());
  std::sort(rel.begin(), rel.end());
  rel.erase(std::unique(rel.begin(), rel.end()), rel.end());
  double dcg = 0.0;
  for (std::size_t i = 0; i < std::min(k, ranked.size()); ++i) {
    if (contains(rel, ranked[i])) dcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
  }
  double idcg = 0.0;
  for (std::size_t i = 0; i < std::min(k, rel.size()); ++i) {
    idcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
  }
  return idcg > 0.0 ? dcg / idcg : 0.0;
}

double mad(const Tensor& embeddings) {
  const std::size_t n = embeddings.rows();
  if (n < 2) throw ContractError("mad: needs at least two rows, got " + std::to_string(n));
  // dot / sqrt(|a|^2 |b|^2) keeps identical rows at cosine exactly 1.
  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i) sq[i] = dot(embeddings.row(i), embeddings.row(i));
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double denom = std::sqrt(sq[i] * sq[j]);
      if (std::sqrt(sq[i]) <= kNormEpsilon || std::sqrt(sq[j]) <= kNormEpsilon) {
        total += 1.0;
        continue;
      }
      total += 1.0 - std::clamp(dot(embeddings.row(i), embeddings.row(j)) / denom, -1.0, 1.0);
    }
  }
  // Each unordered pair stands for two ordered pairs.
  return 2.0 * total / (static_cast<double>(n) * static_cast<double>(n - 1));
}

std::vector<std::size_t> density_groups(std::span<const std::size_t> degrees, std::size_t groups) {
  if (groups < 2) throw ContractError("density_groups: need at least two groups");
  const std::size_t n = degrees.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return degrees[a] < degrees[b]; });
  std::vector<std::size_t> group(n);
  for (std::size_t pos = 0; pos < n; ++pos) group[order[pos]] = pos * groups / n;
  return group;
}

std::vector<GroupMetrics> density_group_eval(const Tensor& users, const Tensor& items,
                                             const InteractionGraph& train,
                                             const InteractionGraph& target, std::size_t groups,
                                             std::size_t k, const InteractionGraph* mask) {
  std::vector<std::size_t> degrees(train.item_count());
  for (std::size_t v = 0; v < degrees.size(); ++v) degrees[v] = train.item_degree(ItemId(v));
  const auto group_of = density_groups(degrees, groups);

  std::vector<GroupMetrics> out(groups);
  for (std::size_t g = 0; g < groups; ++g) {
    out[g].group = g;
    out[g].min_degree = static_cast<std::size_t>(-1);
  }
  for (std::size_t v = 0; v < degrees.size(); ++v) {
    GroupMetrics& m = out[group_of[v]];
    ++m.items;
    m.min_degree = std::min(m.min_degree, degrees[v]);
    m.max_degree = std::max(m.max_degree, degrees[v]);
  }
  for (auto& m : out) {
    if (m.items == 0) m.min_degree = 0;
  }

  std::vector<double> sums(groups, 0.0);
  std::vector<std::vector<std::size_t>> relevant(groups);
  for (std::size_t u = 0; u < target.user_count(); ++u) {
    const auto held = target.items_of(UserId(u));
    if (held.empty()) continue;
    for (auto& r : relevant) r.clear();
    for (ItemId v : held) relevant[group_of[index(v)]].push_back(index(v));
    const auto ranked = rank_items(users, items, u, k, mask);
    for (std::size_t g = 0; g < groups; ++g) {
      if (relevant[g].empty()) continue;
      out[g].target_edges += relevant[g].size();
      ++out[g].users;
      sums[g] += *recall_at_k(ranked, relevant[g], k);
    }
  }
  for (std::size_t g = 0; g < groups; ++g) {
    out[g].recall = out[g].users ? sums[g] / static_cast<double>(out[g].users) : 0.0;
  }
  return out;
}

EvalMetrics evaluate(const EvalRequest& req) {
  if (!req.users || !req.items || !req.train || !req.target) {
    throw ContractError("evaluate: embeddings, train and target graphs are required");
  }
  if (req.users->rows() != req.target->user_count() ||
      req.items->rows() != req.target->item_count()) {
    throw DimensionError("evaluate: embedding tables do not match the graph sizes");
  }
  EvalMetrics m;
  double recall_sum = 0.0, ndcg_sum = 0.0;
  for (std::size_t u = 0; u < req.target->user_count(); ++u) {
    const auto relevant = item_indices(req.target->items_of(UserId(u)));
    if (relevant.empty()) continue;
    const auto ranked = rank_items(*req.users, *req.items, u, req.k, req.mask);
    recall_sum += *recall_at_k(ranked, relevant, req.k);
    ndcg_sum += *ndcg_at_k(ranked, relevant, req.k);
    ++m.users;
  }
  if (m.users) {
    m.recall = recall_sum / static_cast<double>(m.users);
    m.ndcg = ndcg_sum / static_cast<double>(m.users);
  }
  const Tensor& mu = req.mad_users ? *req.mad_users : *req.users;
  const Tensor& mi = req.mad_items ? *req.mad_items : *req.items;
  m.mad_users = mu.rows() >= 2 ? mad(mu) : 0.0;
  m.mad_items = mi.rows() >= 2 ? mad(mi) : 0.0;
  m.groups = density_group_eval(*req.users, *req.items, *req.train, *req.target, req.groups, req.k,
                                req.mask);
  return m;
}

void write_metrics_tsv(std::ostream& out, const EvalMetrics& m) {
  out << "metric\tvalue\n";
  out << "recall\t" << format_double(m.recall) << '\n';
  out << "ndcg\t" << format_double(m.ndcg) << '\n';
  out << "users\t" << m.users << '\n';
  out << "mad_users\t" << format_double(m.mad_users) << '\n';
  out << "mad_items\t" << format_double(m.mad_items) << '\n';
}

void write_groups_tsv(std::ostream& out, std::span<const GroupMetrics> groups) {
  out << "group\titems\tmin_degree\tmax_degree\ttarget_edges\tusers\trecall\n";
  for (const auto& g : groups) {
    out << g.group << '\t' << g.items << '\t' << g.min_degree << '\t' << g.max_degree << '\t'
        << g.target_edges << '\t' << g.users << '\t' << format_double(g.recall) << '\n';
  }
}

}  // namespace hyperrec
