// Copyright 2026 The hyperrec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Shared fixtures, generators and naive reference implementations for the
// test suites. Reference code here is deliberately written without the
// engine's kernels so the two can be compared.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hyperrec/config.hpp"
#include "hyperrec/data.hpp"
#include "hyperrec/rng.hpp"
#include "hyperrec/sparse.hpp"
#include "hyperrec/tensor.hpp"

namespace hyperrec::testing {

inline Tensor random_tensor(Rng& rng, std::size_t rows, std::size_t cols, double lo = -1.0,
                            double hi = 1.0) {
  Tensor t = Tensor::matrix(rows, cols);
  for (double& v : t.data()) v = rng.uniform(lo, hi);
  return t;
}

inline std::vector<std::vector<double>> to_nested(const Tensor& t) {
  std::vector<std::vector<double>> out(t.rows(), std::vector<double>(t.cols()));
  for (std::size_t i = 0; i < t.rows(); ++i) {
    for (std::size_t j = 0; j < t.cols(); ++j) out[i][j] = t.data()[i * t.cols() + j];
  }
  return out;
}

inline std::vector<std::vector<double>> naive_matmul(const std::vector<std::vector<double>>& a,
                                                     const std::vector<std::vector<double>>& b) {
  const std::size_t n = a.size(), m = b.size(), p = b.empty() ? 0 : b[0].size();
  std::vector<std::vector<double>> c(n, std::vector<double>(p, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      for (std::size_t k = 0; k < m; ++k) c[i][j] += a[i][k] * b[k][j];
    }
  }
  return c;
}

inline std::vector<std::vector<double>> naive_transpose(const std::vector<std::vector<double>>& a) {
  if (a.empty()) return {};
  std::vector<std::vector<double>> t(a[0].size(), std::vector<double>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < a[0].size(); ++j) t[j][i] = a[i][j];
  }
  return t;
}

inline double max_diff(const Tensor& t, const std::vector<std::vector<double>>& ref) {
  double worst = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    for (std::size_t j = 0; j < ref[i].size(); ++j) {
      worst = std::max(worst, std::abs(t.data()[i * t.cols() + j] - ref[i][j]));
    }
  }
  return worst;
}

inline double naive_cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (std::sqrt(aa) <= 1e-12 || std::sqrt(bb) <= 1e-12) return 0.0;
  return ab / (std::sqrt(aa) * std::sqrt(bb));
}

/// Dense symmetric-normalized bipartite adjacency as (|U|+|V|) square matrix,
/// users first.
inline std::vector<std::vector<double>> dense_normalized_adjacency(const InteractionGraph& g) {
  const std::size_t nu = g.user_count(), nv = g.item_count(), n = nu + nv;
  std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
  for (const auto& e : g.edges()) {
    const std::size_t u = index(e.user), v = index(e.item);
    const double w = 1.0 / std::sqrt(static_cast<double>(g.user_degree(e.user)) *
                                     static_cast<double>(g.item_degree(e.item)));
    a[u][nu + v] = w;
    a[nu + v][u] = w;
  }
  return a;
}

// Full-sort reference selection: (member, weight) lists per anchor.
inline std::vector<std::vector<std::pair<std::size_t, double>>> brute_force_topk(const Tensor& z, std::size_t k) {
  const auto rows = to_nested(z);
  std::vector<std::vector<std::pair<std::size_t, double>>> out(rows.size());
  for (std::size_t u = 0; u < rows.size(); ++u) {
    std::vector<std::pair<double, std::size_t>> all;
    for (std::size_t v = 0; v < rows.size(); ++v) {
      if (v != u) all.push_back({naive_cosine(rows[u], rows[v]), v});
    }
    std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    for (const auto& [c, v] : all) {
      if (out[u].size() == k || c <= 0.0) break;
      out[u].push_back({v, c});
    }
    std::sort(out[u].begin(), out[u].end());
  }
  return out;
}

inline std::vector<std::pair<std::size_t, double>> row_entries(const CsrMatrix& m, std::size_t r) {
  std::vector<std::pair<std::size_t, double>> out;
  auto cols = m.row_columns(r);
  auto vals = m.row_values(r);
  for (std::size_t i = 0; i < cols.size(); ++i) out.push_back({cols[i], vals[i]});
  return out;
}

/// The four-user, five-item, six-statement fixture of the gradient check.
struct ToyCorpus {
  InteractionGraph graph;
  StatementStore statements;
  std::vector<EntityId> item_entity;
  std::size_t entities = 9;
  std::size_t relations = 3;
};

inline Statement make_statement(std::uint32_t h, std::uint32_t r, std::uint32_t t,
                                std::vector<std::pair<std::uint32_t, std::uint32_t>> quals = {}) {
  Statement s;
  s.head = EntityId(h);
  s.relation = RelationId(r);
  s.tail = EntityId(t);
  for (auto [qr, qv] : quals) s.qualifiers.push_back({RelationId(qr), EntityId(qv)});
  return s;
}

inline ToyCorpus toy_corpus() {
  ToyCorpus c;
  auto e = [](std::uint32_t u, std::uint32_t v) { return Interaction{UserId(u), ItemId(v)}; };
  c.graph = InteractionGraph(4, 5,
                             {e(0, 0), e(0, 1), e(1, 1), e(1, 2), e(1, 3), e(2, 0), e(2, 3),
                              e(2, 4), e(3, 2), e(3, 4)});
  // Item v is entity v; entities 5..8 are attributes. Item 4 has no statements.
  c.statements = StatementStore({make_statement(0, 0, 5, {{2, 6}}),
                                 make_statement(0, 1, 6),
                                 make_statement(1, 0, 5, {{2, 7}, {2, 8}}),
                                 make_statement(2, 1, 7),
                                 make_statement(3, 0, 8, {{1, 5}}),
                                 make_statement(3, 2, 6)});
  c.item_entity = {EntityId(0), EntityId(1), EntityId(2), EntityId(3), EntityId(4)};
  return c;
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("hyperrec_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& path) {
  std::string out;
  if (FILE* f = std::fopen(path.string().c_str(), "rb")) {
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, f)) > 0) out.append(buf, n);
    std::fclose(f);
  }
  return out;
}

}  // namespace hyperrec::testing
