// Copyright 2026 The hyperrec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace hyperrec {

// Dense 0-based indices, one namespace per kind.
enum class UserId : std::uint32_t {};
enum class ItemId : std::uint32_t {};
enum class EntityId : std::uint32_t {};
enum class RelationId : std::uint32_t {};

template <class Id>
constexpr std::size_t index(Id id) noexcept {
  return static_cast<std::size_t>(id);
}

/// Maps arbitrary external integer ids onto dense internal indices in
/// first-seen order.
class IdMap {
 public:
  std::uint32_t intern(std::int64_t external);
  /// Returns false if the external id was never interned.
  bool find(std::int64_t external, std::uint32_t& internal) const;
  std::int64_t external(std::size_t internal) const { return externals_.at(internal); }
  std::size_t size() const noexcept { return externals_.size(); }
  std::span<const std::int64_t> externals() const noexcept { return externals_; }

  /// One "internal<TAB>external" line per id.
  void write(std::ostream& out) const;

 private:
  std::vector<std::int64_t> externals_;
  std::unordered_map<std::int64_t, std::uint32_t> internals_;
};

struct Qualifier {
  RelationId relation;
  EntityId value;
  friend bool operator==(const Qualifier&, const Qualifier&) = default;
};

/// One hyper-relational fact: a base triplet plus ordered qualifier pairs.
struct Statement {
  EntityId head;
  RelationId relation;
  EntityId tail;
  std::vector<Qualifier> qualifiers;
  friend bool operator==(const Statement&, const Statement&) = default;
};

class StatementStore {
 public:
  StatementStore() = default;
  explicit StatementStore(std::vector<Statement> statements);

  void add(Statement s);
  std::span<const Statement> statements() const noexcept { return statements_; }
  std::size_t size() const noexcept { return statements_.size(); }
  /// Indices of statements whose head is h, in insertion order. Empty for an
  /// entity without statements.
  std::span<const std::size_t> indices_for_head(EntityId h) const noexcept;
  std::vector<Statement> statements_for_head(EntityId h) const;

  friend bool operator==(const StatementStore& a, const StatementStore& b) {
    return a.statements_ == b.statements_;
  }

 private:
  std::vector<Statement> statements_;
  std::unordered_map<std::uint32_t, std::vector<std::size_t>> head_index_;
};

struct Interaction {
  UserId user;
  ItemId item;
  friend auto operator<=>(const Interaction&, const Interaction&) = default;
};

/// Binary user-item bipartite graph with sorted adjacency lists in both directions.
class InteractionGraph {
 public:
  InteractionGraph() = default;
  /// Duplicate edges collapse. Every id must lie below the given counts.
  InteractionGraph(std::size_t user_count, std::size_t item_count,
                   std::vector<Interaction> edges);

  std::size_t user_count() const noexcept { return user_neighbors_.size(); }
  std::size_t item_count() const noexcept { return item_neighbors_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }

  /// Sorted by (user, item).
  std::span<const Interaction> edges() const noexcept { return edges_; }
  std::span<const ItemId> items_of(UserId u) const noexcept { return user_neighbors_[index(u)]; }
  std::span<const UserId> users_of(ItemId v) const noexcept { return item_neighbors_[index(v)]; }
  std::size_t user_degree(UserId u) const noexcept { return user_neighbors_[index(u)].size(); }
  std::size_t item_degree(ItemId v) const noexcept { return item_neighbors_[index(v)].size(); }
  bool has_edge(UserId u, ItemId v) const noexcept;

  friend bool operator==(const InteractionGraph& a, const InteractionGraph& b) {
    return a.user_count() == b.user_count() && a.item_count() == b.item_count() &&
           a.edges_ == b.edges_;
  }

 private:
  std::vector<Interaction> edges_;
  std::vector<std::vector<ItemId>> user_neighbors_;
  std::vector<std::vector<UserId>> item_neighbors_;
};

struct ParsedInteractions {
  InteractionGraph graph;
  IdMap users;
  IdMap items;
};

struct ParsedStatements {
  StatementStore store;
  IdMap entities;
  IdMap relations;
};

/// "user<TAB>item" lines; '#' comments and blank lines ignored.
ParsedInteractions parse_interactions(std::istream& in);
/// "h<TAB>r<TAB>t[<TAB>qr<TAB>qv]*" lines, interning ids into the given maps.
StatementStore parse_statements(std::istream& in, IdMap& entities, IdMap& relations);
ParsedStatements parse_statements(std::istream& in);

/// External item id -> external entity id, validated injective.
using RawAlignment = std::map<std::int64_t, std::int64_t>;
RawAlignment parse_alignment(std::istream& in);

/// Resolves the alignment for every item of `items`. Entities referenced only
/// here are interned into `entities`. Throws ConfigError naming every item
/// without an entry.
std::vector<EntityId> resolve_alignment(const RawAlignment& alignment, const IdMap& items,
                                        IdMap& entities);

void write_interactions(std::ostream& out, const InteractionGraph& g, const IdMap& users,
                        const IdMap& items);
void write_statements(std::ostream& out, const StatementStore& store, const IdMap& entities,
                      const IdMap& relations);

/// Everything loaded from a dataset directory, densified and validated.
struct Dataset {
  InteractionGraph interactions;
  StatementStore statements;
  std::vector<EntityId> item_entity;
  IdMap users;
  IdMap items;
  IdMap entities;
  IdMap relations;
  /// FNV-1a 64-bit hashes of the three source files, hex encoded.
  std::string interactions_hash;
  std::string statements_hash;
  std::string alignment_hash;

  std::size_t user_count() const noexcept { return interactions.user_count(); }
  std::size_t item_count() const noexcept { return interactions.item_count(); }
  std::size_t entity_count() const noexcept { return entities.size(); }
  std::size_t relation_count() const noexcept { return relations.size(); }
};

inline constexpr const char* kInteractionsFile = "interactions.tsv";
inline constexpr const char* kStatementsFile = "statements.tsv";
inline constexpr const char* kAlignmentFile = "alignment.tsv";

/// Reads interactions.tsv, statements.tsv and alignment.tsv from `dir`.
Dataset load_dataset(const std::filesystem::path& dir);

std::string fnv1a_hex(std::string_view bytes);

struct Split {
  InteractionGraph train;
  InteractionGraph valid;
  InteractionGraph test;
};

/// Per-user random holdout: round(deg * test_fraction) edges to test,
/// round(deg * valid_fraction) to validation, always leaving one training edge.
Split split_interactions(const InteractionGraph& g, std::uint64_t seed,
                         double valid_fraction = 0.1, double test_fraction = 0.1);

}  // namespace hyperrec
