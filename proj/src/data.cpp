// Copyright 2026 The hyperrec Authors
// SPDX-License-Identifier: Apache-2.0

#include "hyperrec/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "hyperrec/error.hpp"
#include "hyperrec/rng.hpp"

namespace hyperrec {

namespace {

// Splits one data line on TABs. Spaces or other separators are rejected so
// that "1 2" is never silently read as a single field.
std::vector<std::int64_t> parse_fields(std::string_view line, std::size_t line_no,
                                       const char* what) {
  std::vector<std::int64_t> fields;
  std::size_t pos = 0;
  while (true) {
    const std::size_t tab = line.find('\t', pos);
    std::string_view tok = line.substr(pos, tab == std::string_view::npos ? line.npos : tab - pos);
    std::int64_t v = 0;
    auto [end, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (tok.empty() || ec != std::errc() || end != tok.data() + tok.size()) {
      throw ParseError(std::string(what) + " line " + std::to_string(line_no) +
                       ": expected a TAB-separated decimal integer, got '" + std::string(tok) +
                       "'");
    }
    fields.push_back(v);
    if (tab == std::string_view::npos) break;
    pos = tab + 1;
  }
  return fields;
}

// Calls fn(fields, line_no) for every data line.
template <class Fn>
void for_each_record(std::istream& in, const char* what, Fn&& fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    fn(parse_fields(line, line_no, what), line_no);
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::uint32_t IdMap::intern(std::int64_t external) {
  auto [it, inserted] =
      internals_.try_emplace(external, static_cast<std::uint32_t>(externals_.size()));
  if (inserted) externals_.push_back(external);
  return it->second;
}

bool IdMap::find(std::int64_t external, std::uint32_t& internal) const {
  auto it = internals_.find(external);
  if (it == internals_.end()) return false;
  internal = it->second;
  return true;
}

void IdMap::write(std::ostream& out) const {
  for (std::size_t i = 0; i < externals_.size(); ++i) out << i << '\t' << externals_[i] << '\n';
}

StatementStore::StatementStore(std::vector<Statement> statements) {
  for (auto& s : statements) add(std::move(s));
}

void StatementStore::add(Statement s) {
  head_index_[static_cast<std::uint32_t>(s.head)].push_back(statements_.size());
  statements_.push_back(std::move(s));
}

std::span<const std::size_t> StatementStore::indices_for_head(EntityId h) const noexcept {
  auto it = head_index_.find(static_cast<std::uint32_t>(h));
  if (it == head_index_.end()) return {};
  return it->second;
}

std::vector<Statement> StatementStore::statements_for_head(EntityId h) const {
  std::vector<Statement> out;
  for (std::size_t i : indices_for_head(h)) out.push_back(statements_[i]);
  return out;
}

InteractionGraph::InteractionGraph(std::size_t user_count, std::size_t item_count,
                                   std::vector<Interaction> edges)
    : user_neighbors_(user_count), item_neighbors_(item_count) {
  for (const auto& e : edges) {
    if (index(e.user) >= user_count || index(e.item) >= item_count) {
      throw ContractError("interaction (" + std::to_string(index(e.user)) + "," +
                          std::to_string(index(e.item)) + ") outside graph bounds");
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  edges_ = std::move(edges);
  for (const auto& e : edges_) {
    user_neighbors_[index(e.user)].push_back(e.item);
    item_neighbors_[index(e.item)].push_back(e.user);
  }
  // user lists come out sorted from the edge order; item lists are filled in
  // ascending user order as well.
}

bool InteractionGraph::has_edge(UserId u, ItemId v) const noexcept {
  const auto& items = user_neighbors_[index(u)];
  return std::binary_search(items.begin(), items.end(), v);
}

ParsedInteractions parse_interactions(std::istream& in) {
  ParsedInteractions out;
  std::vector<Interaction> edges;
  for_each_record(in, "interactions", [&](const std::vector<std::int64_t>& f, std::size_t n) {
    if (f.size() != 2) {
      throw ParseError("interactions line " + std::to_string(n) + ": expected 2 fields, got " +
                       std::to_string(f.size()));
    }
    edges.push_back({UserId{out.users.intern(f[0])}, ItemId{out.items.intern(f[1])}});
  });
  out.graph = InteractionGraph(out.users.size(), out.items.size(), std::move(edges));
  return out;
}

StatementStore parse_statements(std::istream& in, IdMap& entities, IdMap& relations) {
  StatementStore store;
  for_each_record(in, "statements", [&](const std::vector<std::int64_t>& f, std::size_t n) {
    if (f.size() < 3) {
      throw ParseError("statements line " + std::to_string(n) + ": expected at least 3 fields");
    }
    if ((f.size() - 3) % 2 != 0) {
      throw ParseError("statements line " + std::to_string(n) +
                       ": odd number of qualifier fields");
    }
    Statement s{EntityId{entities.intern(f[0])}, RelationId{relations.intern(f[1])},
                EntityId{entities.intern(f[2])}, {}};
    for (std::size_t i = 3; i < f.size(); i += 2) {
      s.qualifiers.push_back({RelationId{relations.intern(f[i])}, EntityId{entities.intern(f[i + 1])}});
    }
    store.add(std::move(s));
  });
  return store;
}

ParsedStatements parse_statements(std::istream& in) {
  ParsedStatements out;
  out.store = parse_statements(in, out.entities, out.relations);
  return out;
}

RawAlignment parse_alignment(std::istream& in) {
  RawAlignment map;
  std::map<std::int64_t, std::int64_t> owner;  // entity -> item
  for_each_record(in, "alignment", [&](const std::vector<std::int64_t>& f, std::size_t n) {
    if (f.size() != 2) {
      throw ParseError("alignment line " + std::to_string(n) + ": expected 2 fields");
    }
    auto [it, inserted] = map.try_emplace(f[0], f[1]);
    if (!inserted && it->second != f[1]) {
      throw ConfigError("alignment line " + std::to_string(n) + ": item " + std::to_string(f[0]) +
                        " aligned to two entities");
    }
    auto [ot, fresh] = owner.try_emplace(f[1], f[0]);
    if (!fresh && ot->second != f[0]) {
      throw ConfigError("alignment is not injective: entity " + std::to_string(f[1]) +
                        " is shared by items " + std::to_string(ot->second) + " and " +
                        std::to_string(f[0]));
    }
  });
  return map;
}

std::vector<EntityId> resolve_alignment(const RawAlignment& alignment, const IdMap& items,
                                        IdMap& entities) {
  std::vector<EntityId> out;
  out.reserve(items.size());
  std::vector<std::int64_t> missing;
  for (std::int64_t ext : items.externals()) {
    auto it = alignment.find(ext);
    if (it == alignment.end()) {
      missing.push_back(ext);
      continue;
    }
    out.push_back(EntityId{entities.intern(it->second)});
  }
  if (!missing.empty()) {
    std::string msg = "alignment does not cover items:";
    for (auto m : missing) msg += " " + std::to_string(m);
    throw ConfigError(msg);
  }
  return out;
}

void write_interactions(std::ostream& out, const InteractionGraph& g, const IdMap& users,
                        const IdMap& items) {
  for (const auto& e : g.edges()) {
    out << users.external(index(e.user)) << '\t' << items.external(index(e.item)) << '\n';
  }
}

void write_statements(std::ostream& out, const StatementStore& store, const IdMap& entities,
                      const IdMap& relations) {
  for (const auto& s : store.statements()) {
    out << entities.external(index(s.head)) << '\t' << relations.external(index(s.relation))
        << '\t' << entities.external(index(s.tail));
    for (const auto& q : s.qualifiers) {
      out << '\t' << relations.external(index(q.relation)) << '\t'
          << entities.external(index(q.value));
    }
    out << '\n';
  }
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Dataset load_dataset(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw IoError("dataset directory " + dir.string() + " does not exist");
  }
  const std::string interactions = read_file(dir / kInteractionsFile);
  const std::string statements = read_file(dir / kStatementsFile);
  const std::string alignment = read_file(dir / kAlignmentFile);

  Dataset ds;
  {
    std::istringstream in(interactions);
    auto parsed = parse_interactions(in);
    ds.interactions = std::move(parsed.graph);
    ds.users = std::move(parsed.users);
    ds.items = std::move(parsed.items);
  }
  {
    std::istringstream in(statements);
    ds.statements = parse_statements(in, ds.entities, ds.relations);
  }
  {
    std::istringstream in(alignment);
    ds.item_entity = resolve_alignment(parse_alignment(in), ds.items, ds.entities);
  }
  ds.interactions_hash = fnv1a_hex(interactions);
  ds.statements_hash = fnv1a_hex(statements);
  ds.alignment_hash = fnv1a_hex(alignment);
  return ds;
}

Split split_interactions(const InteractionGraph& g, std::uint64_t seed, double valid_fraction,
                         double test_fraction) {
  Rng rng(seed);
  std::vector<Interaction> train, valid, test;
  for (std::size_t u = 0; u < g.user_count(); ++u) {
    auto neighbors = g.items_of(UserId{static_cast<std::uint32_t>(u)});
    std::vector<ItemId> items(neighbors.begin(), neighbors.end());
    rng.shuffle(std::span<ItemId>(items));
    const std::size_t deg = items.size();
    if (deg == 0) continue;
    std::size_t n_test = static_cast<std::size_t>(std::lround(deg * test_fraction));
    std::size_t n_valid = static_cast<std::size_t>(std::lround(deg * valid_fraction));
    while (n_test + n_valid >= deg) {
      if (n_valid > 0) {
        --n_valid;
      } else {
        --n_test;
      }
    }
    const UserId uid{static_cast<std::uint32_t>(u)};
    for (std::size_t i = 0; i < deg; ++i) {
      if (i < n_test) {
        test.push_back({uid, items[i]});
      } else if (i < n_test + n_valid) {
        valid.push_back({uid, items[i]});
      } else {
        train.push_back({uid, items[i]});
      }
    }
  }
  return Split{InteractionGraph(g.user_count(), g.item_count(), std::move(train)),
               InteractionGraph(g.user_count(), g.item_count(), std::move(valid)),
               InteractionGraph(g.user_count(), g.item_count(), std::move(test))};
}

}  // namespace hyperrec
