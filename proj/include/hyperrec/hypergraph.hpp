// Copyright 2026 The hyperrec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "hyperrec/autodiff.hpp"
#include "hyperrec/sparse.hpp"
#include "hyperrec/tensor.hpp"

namespace hyperrec {

/// Cosine dependency between rows of an embedding matrix, computed on demand
/// one row at a time (no n x n buffer).
class DependencyScorer {
 public:
  explicit DependencyScorer(const Tensor& embeddings);

  std::size_t size() const noexcept { return norms_.size(); }
  double operator()(std::size_t u, std::size_t v) const noexcept;
  /// Scores of u against every node, self included.
  std::vector<double> row(std::size_t u) const;

 private:
  const Tensor* embeddings_;
  std::vector<double> norms_;
};

struct HypergraphOptions {
  std::size_t k = 8;
  /// Put the anchor node in its own hyperedge at weight 1 (takes one of the k slots).
  bool include_self = false;
};

/// Square weighted incidence: row e is the hyperedge anchored at node e, its
/// entries the dependency scores of the selected members.
struct Hypergraph {
  CsrMatrix incidence;
  std::vector<double> node_degree;  // column sums
  std::vector<double> edge_degree;  // row sums

  std::size_t size() const noexcept { return incidence.rows(); }
  friend bool operator==(const Hypergraph&, const Hypergraph&) = default;
};

/// Each row keeps the k highest-scoring other nodes with strictly positive
/// score; ties go to the lower node index.
Hypergraph build_hypergraph(const Tensor& embeddings, const HypergraphOptions& options);
Hypergraph build_hypergraph(const Tensor& embeddings, std::size_t k);

/// Entry (e, u) scaled by 1 / sqrt(node_degree[u] * edge_degree[e]); zero
/// degrees give zero entries. Negative weights are a contract violation.
CsrMatrix normalize(const Hypergraph& hg);

inline constexpr double kHyperSlope = 0.2;

/// LeakyReLU(Hn Hn^T Z W) for a normalized incidence Hn.
Var hyper_convolve(const CsrMatrix& normalized, Var z, Var w, double slope = kHyperSlope);

/// Debug dump: one "edge<TAB>node<TAB>weight" line per stored entry.
void write_hypergraph_tsv(std::ostream& out, const Hypergraph& hg);

}  // namespace hyperrec
