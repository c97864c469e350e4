// Copyright 2026 The hyperrec Authors
// SPDX-License-Identifier: Apache-2.0

#include "hyperrec/synthetic.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <set>

#include "hyperrec/config.hpp"
#include "hyperrec/error.hpp"
#include "hyperrec/rng.hpp"

namespace hyperrec {

namespace {

template <class T>
T parse_value(std::string_view key, std::string_view text) {
  T v{};
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || end != text.data() + text.size()) {
    throw ConfigError("generator key '" + std::string(key) + "': cannot parse '" +
                      std::string(text) + "'");
  }
  return v;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  return s.substr(first, s.find_last_not_of(" \t\r") - first + 1);
}

// Layout of the entity and relation id spaces.
struct Vocabulary {
  std::vector<std::size_t> shared_entities;                // tails of ambiguous triplets
  std::vector<std::vector<std::size_t>> cluster_entities;  // per cluster
  std::size_t shared_relation = 0;
  std::vector<std::size_t> qualifier_relations;
};

Vocabulary make_vocabulary(const GeneratorConfig& c) {
  Vocabulary v;
  const std::size_t pool = c.entities - c.items;
  const std::size_t shared = std::max<std::size_t>(1, pool / (c.clusters + 1));
  v.cluster_entities.resize(c.clusters);
  for (std::size_t i = 0; i < pool; ++i) {
    const std::size_t e = c.items + i;
    if (i < shared) v.shared_entities.push_back(e);
    else v.cluster_entities[(i - shared) % c.clusters].push_back(e);
  }
  v.shared_relation = c.clusters;
  for (std::size_t r = c.clusters + 1; r < c.relations; ++r) v.qualifier_relations.push_back(r);
  return v;
}

template <class T>
const T& pick(const std::vector<T>& from, Rng& rng) {
  return from[rng.uniform_index(from.size())];
}

}  // namespace

void GeneratorConfig::set(std::string_view key, std::string_view value) {
  if (key == "users") users = parse_value<std::size_t>(key, value);
  else if (key == "items") items = parse_value<std::size_t>(key, value);
  else if (key == "entities") entities = parse_value<std::size_t>(key, value);
  else if (key == "relations") relations = parse_value<std::size_t>(key, value);
  else if (key == "clusters") clusters = parse_value<std::size_t>(key, value);
  else if (key == "qualifier_rate") qualifier_rate = parse_value<double>(key, value);
  else if (key == "p_in") p_in = parse_value<double>(key, value);
  else if (key == "p_out") p_out = parse_value<double>(key, value);
  else if (key == "statements_per_item") statements_per_item = parse_value<std::size_t>(key, value);
  else if (key == "popularity_skew") popularity_skew = parse_value<double>(key, value);
  else if (key == "kg_noise") kg_noise = parse_value<double>(key, value);
  else if (key == "min_user_degree") min_user_degree = parse_value<std::size_t>(key, value);
  else if (key == "seed") seed = parse_value<std::uint64_t>(key, value);
  else throw ConfigError("unknown generator key '" + std::string(key) + "'");
}

std::vector<std::pair<std::string, std::string>> GeneratorConfig::entries() const {
  return {{"users", std::to_string(users)},
          {"items", std::to_string(items)},
          {"entities", std::to_string(entities)},
          {"relations", std::to_string(relations)},
          {"clusters", std::to_string(clusters)},
          {"qualifier_rate", format_double(qualifier_rate)},
          {"p_in", format_double(p_in)},
          {"p_out", format_double(p_out)},
          {"statements_per_item", std::to_string(statements_per_item)},
          {"popularity_skew", format_double(popularity_skew)},
          {"kg_noise", format_double(kg_noise)},
          {"min_user_degree", std::to_string(min_user_degree)},
          {"seed", std::to_string(seed)}};
}

void GeneratorConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError("generator: " + m); };
  if (users == 0 || items == 0) fail("users and items must be positive");
  if (clusters == 0) fail("clusters must be positive");
  if (clusters > users || clusters > items) fail("more clusters than users or items");
  if (relations < clusters + 2) {
    fail("relations must be at least clusters + 2 (" + std::to_string(clusters + 2) + ")");
  }
  if (entities < items + 2 * clusters) {
    fail("entities must be at least items + 2 * clusters (" + std::to_string(items + 2 * clusters) +
         ")");
  }
  if (qualifier_rate < 0.0 || qualifier_rate > 1.0) fail("qualifier_rate must lie in [0, 1]");
  if (kg_noise < 0.0 || kg_noise > 1.0) fail("kg_noise must lie in [0, 1]");
  if (p_out < 0.0 || p_in > 1.0) fail("p_in and p_out must lie in [0, 1]");
  if (p_in <= p_out) fail("p_in must exceed p_out");
  if (popularity_skew < 0.0) fail("popularity_skew must be non-negative");
  if (min_user_degree > items) fail("min_user_degree exceeds the item count");
}

GeneratorConfig parse_generator_config(std::istream& in, GeneratorConfig base) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("generator line " + std::to_string(line_no) + ": expected key=value");
    }
    base.set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  return base;
}

GeneratorConfig load_generator_config(const std::filesystem::path& path, GeneratorConfig base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open generator config " + path.string());
  return parse_generator_config(in, std::move(base));
}

SyntheticCorpus generate_corpus(const GeneratorConfig& c) {
  c.validate();
  Rng rng(c.seed);
  SyntheticCorpus out;
  out.user_cluster.resize(c.users);
  out.item_cluster.resize(c.items);
  for (std::size_t u = 0; u < c.users; ++u) out.user_cluster[u] = u % c.clusters;
  for (std::size_t v = 0; v < c.items; ++v) out.item_cluster[v] = v % c.clusters;

  // Zipf popularity over a random item order, rescaled to mean 1.
  std::vector<std::size_t> rank(c.items);
  std::iota(rank.begin(), rank.end(), std::size_t{0});
  rng.shuffle(std::span<std::size_t>(rank));
  std::vector<double> weight(c.items);
  for (std::size_t v = 0; v < c.items; ++v) {
    weight[v] = std::pow(static_cast<double>(rank[v] + 1), -c.popularity_skew);
  }
  const double mean_weight = std::accumulate(weight.begin(), weight.end(), 0.0) / c.items;
  for (double& w : weight) w /= mean_weight;

  std::vector<std::set<std::size_t>> adjacency(c.users);
  for (std::size_t u = 0; u < c.users; ++u) {
    for (std::size_t v = 0; v < c.items; ++v) {
      const double base = out.user_cluster[u] == out.item_cluster[v] ? c.p_in : c.p_out;
      if (rng.bernoulli(std::min(1.0, base * weight[v]))) adjacency[u].insert(v);
    }
  }
  // Minimum user degree, topped up from the user's own cluster first.
  for (std::size_t u = 0; u < c.users; ++u) {
    std::vector<std::size_t> own, other;
    for (std::size_t v = 0; v < c.items; ++v) {
      if (adjacency[u].count(v)) continue;
      (out.item_cluster[v] == out.user_cluster[u] ? own : other).push_back(v);
    }
    while (adjacency[u].size() < c.min_user_degree) {
      auto& from = own.empty() ? other : own;
      const std::size_t at = rng.uniform_index(from.size());
      adjacency[u].insert(from[at]);
      from.erase(from.begin() + static_cast<std::ptrdiff_t>(at));
    }
  }
  // Every item needs one interaction; take a user of the same cluster.
  std::vector<std::size_t> item_degree(c.items, 0);
  for (const auto& a : adjacency) {
    for (std::size_t v : a) ++item_degree[v];
  }
  for (std::size_t v = 0; v < c.items; ++v) {
    if (item_degree[v] > 0) continue;
    std::vector<std::size_t> candidates;
    for (std::size_t u = 0; u < c.users; ++u) {
      if (out.user_cluster[u] == out.item_cluster[v]) candidates.push_back(u);
    }
    adjacency[pick(candidates, rng)].insert(v);
    item_degree[v] = 1;
  }
  for (std::size_t u = 0; u < c.users; ++u) {
    for (std::size_t v : adjacency[u]) {
      out.interactions.push_back({UserId(static_cast<std::uint32_t>(u)),
                                  ItemId(static_cast<std::uint32_t>(v))});
    }
  }

  const Vocabulary vocab = make_vocabulary(c);
  auto cluster_entity = [&](std::size_t cluster) {
    if (rng.bernoulli(c.kg_noise)) cluster = rng.uniform_index(c.clusters);
    return EntityId(static_cast<std::uint32_t>(pick(vocab.cluster_entities[cluster], rng)));
  };
  out.item_entity.resize(c.items);
  for (std::size_t v = 0; v < c.items; ++v) {
    const auto head = EntityId(static_cast<std::uint32_t>(v));
    out.item_entity[v] = head;
    const std::size_t cluster = out.item_cluster[v];
    for (std::size_t s = 0; s < c.statements_per_item; ++s) {
      Statement st;
      st.head = head;
      if (rng.bernoulli(c.qualifier_rate)) {
        // Same triplet for every cluster; only the qualifiers tell them apart.
        st.relation = RelationId(static_cast<std::uint32_t>(vocab.shared_relation));
        st.tail = EntityId(static_cast<std::uint32_t>(pick(vocab.shared_entities, rng)));
        const std::size_t count = 1 + rng.uniform_index(3);
        for (std::size_t q = 0; q < count; ++q) {
          st.qualifiers.push_back(
              {RelationId(static_cast<std::uint32_t>(pick(vocab.qualifier_relations, rng))),
               cluster_entity(cluster)});
        }
      } else {
        st.relation = RelationId(static_cast<std::uint32_t>(cluster));
        st.tail = cluster_entity(cluster);
      }
      out.statements.push_back(std::move(st));
    }
  }
  return out;
}

void write_corpus(const std::filesystem::path& dir, const SyntheticCorpus& corpus) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream f(dir / name, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write " + (dir / name).string());
    return f;
  };
  {
    auto f = open("interactions.tsv");
    for (const auto& e : corpus.interactions) f << index(e.user) << '\t' << index(e.item) << '\n';
  }
  {
    auto f = open("statements.tsv");
    for (const auto& s : corpus.statements) {
      f << index(s.head) << '\t' << index(s.relation) << '\t' << index(s.tail);
      for (const auto& q : s.qualifiers) f << '\t' << index(q.relation) << '\t' << index(q.value);
      f << '\n';
    }
  }
  {
    auto f = open("alignment.tsv");
    for (std::size_t v = 0; v < corpus.item_entity.size(); ++v) {
      f << v << '\t' << index(corpus.item_entity[v]) << '\n';
    }
  }
  auto f = open("clusters.tsv");
  for (std::size_t u = 0; u < corpus.user_cluster.size(); ++u) {
    f << "user\t" << u << '\t' << corpus.user_cluster[u] << '\n';
  }
  for (std::size_t v = 0; v < corpus.item_cluster.size(); ++v) {
    f << "item\t" << v << '\t' << corpus.item_cluster[v] << '\n';
  }
}

}  // namespace hyperrec
