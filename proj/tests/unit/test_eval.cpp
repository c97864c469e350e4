// Copyright 2026 The hyperrec Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "hyperrec/error.hpp"
#include "hyperrec/eval.hpp"
#include "hyperrec/synthetic.hpp"
#include "support.hpp"

using namespace hyperrec;
using namespace hyperrec::testing;

namespace {

using Ids = std::vector<std::size_t>;

double recall_of(const Ids& ranked, const Ids& relevant, std::size_t k) {
  return *recall_at_k(ranked, relevant, k);
}

double ndcg_of(const Ids& ranked, const Ids& relevant, std::size_t k) {
  return *ndcg_at_k(ranked, relevant, k);
}

// Full sort of unmasked items by (score desc, index asc), truncated to k.
Ids oracle_ranking(const Tensor& users, const Tensor& items, std::size_t u, std::size_t k,
                   const InteractionGraph* mask) {
  const auto ur = to_nested(users)[u];
  const auto ir = to_nested(items);
  std::vector<std::pair<double, std::size_t>> all;
  for (std::size_t v = 0; v < ir.size(); ++v) {
    if (mask && mask->has_edge(UserId(u), ItemId(v))) continue;
    double s = 0.0;
    for (std::size_t j = 0; j < ur.size(); ++j) s += ur[j] * ir[v][j];
    all.push_back({-s, v});
  }
  std::sort(all.begin(), all.end());
  Ids out;
  for (std::size_t i = 0; i < std::min(k, all.size()); ++i) out.push_back(all[i].second);
  return out;
}

double oracle_mad(const Tensor& t) {
  const auto rows = to_nested(t);
  double total = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows.size(); ++j) {
      if (i == j) continue;
      total += 1.0 - naive_cosine(rows[i], rows[j]);
      ++pairs;
    }
  }
  return total / static_cast<double>(pairs);
}

InteractionGraph graph_from(const SyntheticCorpus& c, const GeneratorConfig& g) {
  return InteractionGraph(g.users, g.items, c.interactions);
}

}  // namespace

TEST_SUITE("eval") {

TEST_CASE("recall examples") {
  const Ids top{4, 7, 1, 9, 2};
  CHECK(recall_of(top, {7, 1, 2}, 20) == 1.0);
  CHECK(recall_of(top, {0, 3, 5}, 20) == 0.0);
  CHECK(recall_of(top, {9, 11}, 20) == 0.5);
  CHECK_FALSE(recall_at_k(top, Ids{}, 20).has_value());
  // Ranks past k and missing ranks are misses.
  CHECK(recall_of(top, {2}, 4) == 0.0);
  CHECK(recall_of({}, {2}, 20) == 0.0);
}

TEST_CASE("recall matches a counting oracle") {
  Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 30, k = 1 + rng.uniform_index(12);
    Ids perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(perm));
    const Ids ranked(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(k + rng.uniform_index(5)));
    std::set<std::size_t> rel;
    for (std::size_t i = 0, m = 1 + rng.uniform_index(6); i < m; ++i) rel.insert(rng.uniform_index(n));
    std::size_t hits = 0;
    for (std::size_t i = 0; i < std::min(k, ranked.size()); ++i) hits += rel.count(ranked[i]);
    const Ids relevant(rel.begin(), rel.end());
    CHECK(recall_of(ranked, relevant, k) == static_cast<double>(hits) / static_cast<double>(rel.size()));
  }
}

TEST_CASE("ndcg examples") {
  CHECK(ndcg_of({3, 1, 2}, {3}, 20) == 1.0);
  const double rank2 = ndcg_of({1, 3, 2}, {3}, 20);
  CHECK(std::abs(rank2 - 1.0 / std::log2(3.0)) < 1e-12);
  CHECK(std::abs(rank2 - 0.6309) < 1e-4);
  CHECK(ndcg_of({1, 2}, {3}, 20) == 0.0);
  CHECK_FALSE(ndcg_at_k(Ids{1}, Ids{}, 20).has_value());
  // Two relevant, hits at ranks 1 and 3: (1 + 1/2) / (1 + 1/log2 3).
  CHECK(ndcg_of({5, 0, 6}, {5, 6}, 20) == doctest::Approx(1.5 / (1.0 + 1.0 / std::log2(3.0))).epsilon(1e-14));
}

TEST_CASE("ndcg is at most one and equals one exactly for ideal prefixes") {
  Rng rng(2);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 25, k = 1 + rng.uniform_index(10);
    Ids perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(perm));
    std::set<std::size_t> rel;
    for (std::size_t i = 0, m = 1 + rng.uniform_index(8); i < m; ++i) rel.insert(rng.uniform_index(n));
    const Ids relevant(rel.begin(), rel.end());
    const double v = ndcg_of(perm, relevant, k);
    CHECK(v <= 1.0 + 1e-15);
    CHECK(v >= 0.0);
    bool ideal = true;
    for (std::size_t i = 0; i < std::min(k, relevant.size()); ++i) ideal = ideal && rel.count(perm[i]);
    CHECK((std::abs(v - 1.0) < 1e-12) == ideal);
  }
}

TEST_CASE("mad examples") {
  CHECK(mad(Tensor::from_rows({{1.0, 2.0}, {1.0, 2.0}, {1.0, 2.0}})) == 0.0);
  CHECK(mad(Tensor::from_rows({{0.3, -0.7, 0.1}, {0.3, -0.7, 0.1}})) == 0.0);
  CHECK(mad(Tensor::from_rows({{1.0, 0.0}, {0.0, 3.0}})) == 1.0);
  CHECK(mad(Tensor::from_rows({{1.0, 0.0}, {-2.0, 0.0}})) == 2.0);
  CHECK_THROWS_AS(mad(Tensor::from_rows({{1.0, 0.0}})), ContractError);
  CHECK_THROWS_AS(mad(Tensor::matrix(0, 3)), ContractError);

  Rng rng(3);
  const Tensor five = random_tensor(rng, 5, 4);
  CHECK(std::abs(mad(five) - oracle_mad(five)) < 1e-12);
  for (int trial = 0; trial < 30; ++trial) {
    const Tensor t = random_tensor(rng, 2 + rng.uniform_index(10), 1 + rng.uniform_index(6));
    const double m = mad(t);
    CHECK(std::abs(m - oracle_mad(t)) < 1e-12);
    CHECK(m >= 0.0);
    CHECK(m <= 2.0);
  }
}

TEST_CASE("mad ignores positive row scaling") {
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    Tensor t = random_tensor(rng, 6, 3);
    const double before = mad(t);
    for (std::size_t i = 0; i < t.rows(); ++i) {
      const double c = std::exp(rng.uniform(-5, 5));
      for (double& x : t.row(i)) x *= c;
    }
    CHECK(std::abs(mad(t) - before) < 1e-12);
  }
}

TEST_CASE("density group examples") {
  const std::size_t median[] = {1, 9, 1, 9};
  CHECK(density_groups(median, 2) == Ids{0, 1, 0, 1});

  const std::size_t flat[] = {4, 4, 4, 4, 4, 4, 4};
  const Ids g = density_groups(flat, 3);
  CHECK(std::is_sorted(g.begin(), g.end()));
  std::vector<std::size_t> sizes(3, 0);
  for (auto x : g) ++sizes[x];
  CHECK(*std::max_element(sizes.begin(), sizes.end()) - *std::min_element(sizes.begin(), sizes.end()) <= 1);

  CHECK_THROWS_AS(density_groups(flat, 1), ContractError);
}

TEST_CASE("density groups follow degree order with balanced sizes") {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.uniform_index(40), groups = 2 + rng.uniform_index(std::min<std::size_t>(n - 1, 6));
    std::vector<std::size_t> deg(n);
    for (auto& d : deg) d = rng.uniform_index(5);
    const Ids g = density_groups(deg, groups);
    // Oracle: sort (degree, index) pairs and deal out consecutive runs.
    std::vector<std::pair<std::size_t, std::size_t>> order;
    for (std::size_t i = 0; i < n; ++i) order.push_back({deg[i], i});
    std::sort(order.begin(), order.end());
    std::vector<std::size_t> sizes(groups, 0);
    for (auto x : g) ++sizes[x];
    CHECK(*std::max_element(sizes.begin(), sizes.end()) - *std::min_element(sizes.begin(), sizes.end()) <= 1);
    for (std::size_t p = 1; p < n; ++p) CHECK(g[order[p - 1].second] <= g[order[p].second]);
  }
}

TEST_CASE("per-group recall matches a direct recount") {
  GeneratorConfig gen;
  gen.popularity_skew = 1.2;
  gen.seed = 11;
  const SyntheticCorpus corpus = generate_corpus(gen);
  const Split split = split_interactions(graph_from(corpus, gen), 3, 0.0, 0.2);
  Rng rng(6);
  const Tensor users = random_tensor(rng, gen.users, 6), items = random_tensor(rng, gen.items, 6);
  const std::size_t G = 4, k = 10;
  const auto got = density_group_eval(users, items, split.train, split.test, G, k, &split.train);
  REQUIRE(got.size() == G);

  std::vector<std::pair<std::size_t, std::size_t>> order;
  for (std::size_t v = 0; v < gen.items; ++v) order.push_back({split.train.item_degree(ItemId(v)), v});
  std::sort(order.begin(), order.end());
  std::vector<std::size_t> group(gen.items);
  for (std::size_t p = 0; p < order.size(); ++p) group[order[p].second] = p * G / order.size();

  std::vector<double> sum(G, 0.0);
  std::vector<std::size_t> users_in(G, 0), edges_in(G, 0), items_in(G, 0);
  for (auto x : group) ++items_in[x];
  for (std::size_t u = 0; u < gen.users; ++u) {
    const Ids top = oracle_ranking(users, items, u, k, &split.train);
    for (std::size_t gid = 0; gid < G; ++gid) {
      std::size_t rel = 0, hit = 0;
      for (ItemId v : split.test.items_of(UserId(u))) {
        if (group[index(v)] != gid) continue;
        ++rel;
        hit += std::count(top.begin(), top.end(), index(v));
      }
      if (rel == 0) continue;
      ++users_in[gid];
      edges_in[gid] += rel;
      sum[gid] += static_cast<double>(hit) / static_cast<double>(rel);
    }
  }
  for (std::size_t gid = 0; gid < G; ++gid) {
    INFO("group " << gid);
    CHECK(got[gid].items == items_in[gid]);
    CHECK(got[gid].users == users_in[gid]);
    CHECK(got[gid].target_edges == edges_in[gid]);
    const double expect = users_in[gid] ? sum[gid] / static_cast<double>(users_in[gid]) : 0.0;
    CHECK(std::abs(got[gid].recall - expect) < 1e-12);
  }
  CHECK(got.front().max_degree <= got.back().min_degree);
}

TEST_CASE("ranking masks training items and matches a full sort") {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Interaction> edges;
    for (std::uint32_t u = 0; u < 6; ++u) {
      for (std::uint32_t v = 0; v < 15; ++v) {
        if (rng.bernoulli(0.3)) edges.push_back({UserId(u), ItemId(v)});
      }
    }
    const InteractionGraph mask(6, 15, std::move(edges));
    // Few distinct values force ties, which rank lower indices first.
    Tensor users = random_tensor(rng, 6, 2), items = Tensor::matrix(15, 2);
    for (double& x : items.data()) x = static_cast<double>(rng.uniform_index(3));
    for (std::size_t u = 0; u < 6; ++u) {
      const auto got = rank_items(users, items, u, 8, &mask);
      CHECK(got == oracle_ranking(users, items, u, 8, &mask));
      for (auto v : got) CHECK_FALSE(mask.has_edge(UserId(u), ItemId(v)));
    }
  }
}

TEST_CASE("metrics depend on ranks only") {
  // One-dimensional embeddings make the score the item coordinate itself, so
  // any strictly increasing map of the item column is a monotone score transform.
  Rng rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 40;
    Tensor user = Tensor::from_rows({{1.0}});
    Tensor items = Tensor::matrix(n, 1), mapped = Tensor::matrix(n, 1);
    for (std::size_t v = 0; v < n; ++v) {
      items(v, 0) = rng.uniform(-2, 2);
      mapped(v, 0) = std::exp(3.0 * items(v, 0)) + 0.5;
    }
    Ids relevant;
    for (std::size_t v = 0; v < n; ++v) {
      if (rng.bernoulli(0.2)) relevant.push_back(v);
    }
    if (relevant.empty()) relevant.push_back(0);
    const auto a = rank_items(user, items, 0, 10), b = rank_items(user, mapped, 0, 10);
    CHECK(a == b);
    CHECK(recall_of(a, relevant, 10) == recall_of(b, relevant, 10));
    CHECK(ndcg_of(a, relevant, 10) == ndcg_of(b, relevant, 10));
  }
}

TEST_CASE("random embeddings score at chance level") {
  // Each held-out item of user u is uniformly placed among the |V| - deg(u)
  // unmasked items, so its expected recall is k / (|V| - deg(u)).
  GeneratorConfig gen;
  gen.seed = 21;
  const SyntheticCorpus corpus = generate_corpus(gen);
  const Split split = split_interactions(graph_from(corpus, gen), 5, 0.0, 0.2);
  const std::size_t k = 20;
  double analytic = 0.0;
  std::size_t counted = 0;
  for (std::size_t u = 0; u < gen.users; ++u) {
    if (split.test.user_degree(UserId(u)) == 0) continue;
    analytic += static_cast<double>(k) /
                static_cast<double>(gen.items - split.train.user_degree(UserId(u)));
    ++counted;
  }
  analytic /= static_cast<double>(counted);

  std::vector<double> per_seed;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(100 + seed);
    const Tensor users = random_tensor(rng, gen.users, 16), items = random_tensor(rng, gen.items, 16);
    EvalRequest req;
    req.users = &users;
    req.items = &items;
    req.train = &split.train;
    req.target = &split.test;
    req.mask = &split.train;
    req.k = k;
    per_seed.push_back(evaluate(req).recall);
  }
  const double mean = std::accumulate(per_seed.begin(), per_seed.end(), 0.0) / 20.0;
  double var = 0.0;
  for (double r : per_seed) var += (r - mean) * (r - mean);
  const double se = std::sqrt(var / 19.0 / 20.0);
  INFO("mean " << mean << " analytic " << analytic << " se " << se);
  CHECK(std::abs(mean - analytic) < 3.0 * se);
}

TEST_CASE("memorized targets give perfect scores") {
  // Item v is the v-th basis vector; each user points at exactly its targets.
  const std::size_t nu = 4, nv = 30;
  std::vector<Interaction> held;
  Tensor users = Tensor::matrix(nu, nv), items = Tensor::identity(nv);
  for (std::uint32_t u = 0; u < nu; ++u) {
    for (std::uint32_t j = 0; j < 3 + u; ++j) {
      const std::uint32_t v = (7 * u + 5 * j) % nv;
      held.push_back({UserId(u), ItemId(v)});
      users(u, v) = 1.0;
    }
  }
  const InteractionGraph target(nu, nv, held);
  const InteractionGraph train(nu, nv, {{UserId(0), ItemId(29)}});
  EvalRequest req;
  req.users = &users;
  req.items = &items;
  req.train = &train;
  req.target = &target;
  req.groups = 2;
  const EvalMetrics m = evaluate(req);
  CHECK(m.recall == 1.0);
  CHECK(m.ndcg == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(m.users == nu);
  CHECK(m.mad_items == 1.0);
}

TEST_CASE("evaluation is deterministic and writes documented tables") {
  GeneratorConfig gen;
  const SyntheticCorpus corpus = generate_corpus(gen);
  const Split split = split_interactions(graph_from(corpus, gen), 1);
  Rng rng(9);
  const Tensor users = random_tensor(rng, gen.users, 8), items = random_tensor(rng, gen.items, 8);
  EvalRequest req;
  req.users = &users;
  req.items = &items;
  req.train = &split.train;
  req.target = &split.test;
  req.mask = &split.train;
  const EvalMetrics a = evaluate(req), b = evaluate(req);
  std::ostringstream ma, mb, ga, gb;
  write_metrics_tsv(ma, a);
  write_metrics_tsv(mb, b);
  write_groups_tsv(ga, a.groups);
  write_groups_tsv(gb, b.groups);
  CHECK(ma.str() == mb.str());
  CHECK(ga.str() == gb.str());

  std::istringstream lines(ma.str());
  std::string line;
  std::vector<std::string> keys;
  while (std::getline(lines, line)) keys.push_back(line.substr(0, line.find('\t')));
  CHECK(keys == std::vector<std::string>{"metric", "recall", "ndcg", "users", "mad_users", "mad_items"});

  const std::string groups = ga.str();
  CHECK(groups.rfind("group\titems\tmin_degree\tmax_degree\ttarget_edges\tusers\trecall\n", 0) == 0);
  CHECK(std::count(groups.begin(), groups.end(), '\n') == 5);

  Tensor wrong = Tensor::matrix(3, 8);
  req.users = &wrong;
  CHECK_THROWS_AS(evaluate(req), DimensionError);
}

}  // TEST_SUITE
