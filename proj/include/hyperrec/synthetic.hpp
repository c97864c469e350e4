// Copyright 2026 The hyperrec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hyperrec/data.hpp"

namespace hyperrec {

/// Planted-cluster corpus description. Flat "key=value" text like the
/// training config; unknown keys are rejected.
struct GeneratorConfig {
  std::size_t users = 50;
  std::size_t items = 60;
  std::size_t entities = 120;   // must exceed items; the rest are attribute entities
  std::size_t relations = 8;    // at least clusters + 2
  std::size_t clusters = 5;
  double qualifier_rate = 0.3;  // share of statements that carry qualifiers
  double p_in = 0.35;           // interaction probability inside a cluster
  double p_out = 0.02;          // and across clusters
  std::size_t statements_per_item = 3;
  double popularity_skew = 0.5; // Zipf exponent of item popularity
  double kg_noise = 0.05;       // chance a statement points at a foreign cluster
  std::size_t min_user_degree = 3;
  std::uint64_t seed = 7;

  void set(std::string_view key, std::string_view value);
  std::vector<std::pair<std::string, std::string>> entries() const;
  /// Throws ConfigError on infeasible settings, p_in <= p_out included.
  void validate() const;
};

GeneratorConfig parse_generator_config(std::istream& in, GeneratorConfig base = {});
GeneratorConfig load_generator_config(const std::filesystem::path& path, GeneratorConfig base = {});

struct SyntheticCorpus {
  std::vector<Interaction> interactions;  // sorted, duplicate free
  std::vector<Statement> statements;
  std::vector<EntityId> item_entity;      // alignment, indexed by item
  std::vector<std::size_t> user_cluster;
  std::vector<std::size_t> item_cluster;
};

/// Deterministic per config (seed included).
SyntheticCorpus generate_corpus(const GeneratorConfig& config);

/// Writes interactions.tsv, statements.tsv, alignment.tsv and clusters.tsv
/// ("kind<TAB>id<TAB>cluster", kind in {user, item}). External ids equal the
/// generator's indices.
void write_corpus(const std::filesystem::path& dir, const SyntheticCorpus& corpus);

}  // namespace hyperrec
