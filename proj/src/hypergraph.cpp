// Copyright 2026 The hyperrec Authors
// SPDX-License-Identifier: Apache-2.0

#include "hyperrec/hypergraph.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "hyperrec/error.hpp"

namespace hyperrec {

DependencyScorer::DependencyScorer(const Tensor& embeddings) : embeddings_(&embeddings) {
  norms_.reserve(embeddings.rows());
  for (std::size_t i = 0; i < embeddings.rows(); ++i) norms_.push_back(norm(embeddings.row(i)));
}

double DependencyScorer::operator()(std::size_t u, std::size_t v) const noexcept {
  if (norms_[u] <= kNormEpsilon || norms_[v] <= kNormEpsilon) return 0.0;
  return dot(embeddings_->row(u), embeddings_->row(v)) / (norms_[u] * norms_[v]);
}

std::vector<double> DependencyScorer::row(std::size_t u) const {
  std::vector<double> out(size());
  for (std::size_t v = 0; v < size(); ++v) out[v] = (*this)(u, v);
  return out;
}

Hypergraph build_hypergraph(const Tensor& embeddings, const HypergraphOptions& options) {
  if (options.k == 0) throw ContractError("hypergraph: k must be at least 1");
  const std::size_t n = embeddings.rows();
  DependencyScorer scorer(embeddings);

  std::vector<Triplet> entries;
  std::vector<std::pair<double, std::size_t>> candidates;
  const std::size_t others = options.include_self ? options.k - 1 : options.k;
  for (std::size_t u = 0; u < n; ++u) {
    candidates.clear();
    for (std::size_t v = 0; v < n; ++v) {
      if (v == u) continue;
      const double c = scorer(u, v);
      if (c > 0.0) candidates.emplace_back(c, v);
    }
    auto better = [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    };
    const std::size_t keep = std::min(others, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep),
                      candidates.end(), better);
    if (options.include_self) entries.push_back({u, u, 1.0});
    for (std::size_t i = 0; i < keep; ++i) entries.push_back({u, candidates[i].second, candidates[i].first});
  }

  Hypergraph hg;
  hg.incidence = CsrMatrix::from_triplets(n, n, std::move(entries));
  hg.node_degree.assign(n, 0.0);
  hg.edge_degree.assign(n, 0.0);
  for (std::size_t e = 0; e < n; ++e) {
    auto cols = hg.incidence.row_columns(e);
    auto vals = hg.incidence.row_values(e);
    for (std::size_t i = 0; i < cols.size(); ++i) {
      hg.edge_degree[e] += vals[i];
      hg.node_degree[cols[i]] += vals[i];
    }
  }
  return hg;
}

Hypergraph build_hypergraph(const Tensor& embeddings, std::size_t k) {
  return build_hypergraph(embeddings, HypergraphOptions{k, false});
}

CsrMatrix normalize(const Hypergraph& hg) {
  const std::size_t n = hg.size();
  if (hg.node_degree.size() != n || hg.edge_degree.size() != n) {
    throw ContractError("normalize: degree vectors inconsistent with incidence");
  }
  std::vector<Triplet> entries;
  entries.reserve(hg.incidence.nnz());
  for (std::size_t e = 0; e < n; ++e) {
    auto cols = hg.incidence.row_columns(e);
    auto vals = hg.incidence.row_values(e);
    for (std::size_t i = 0; i < cols.size(); ++i) {
      if (vals[i] < 0.0) {
        throw ContractError("normalize: negative hyperedge weight at (" + std::to_string(e) +
                            "," + std::to_string(cols[i]) + ")");
      }
      const double denom = hg.node_degree[cols[i]] * hg.edge_degree[e];
      if (denom <= 0.0) continue;
      entries.push_back({e, cols[i], vals[i] / std::sqrt(denom)});
    }
  }
  return CsrMatrix::from_triplets(n, n, std::move(entries));
}

Var hyper_convolve(const CsrMatrix& normalized, Var z, Var w, double slope) {
  Var edge_side = ad::spmm(normalized.transposed(), z);
  Var node_side = ad::spmm(normalized, edge_side);
  return ad::leaky_relu(ad::matmul(node_side, w), slope);
}

void write_hypergraph_tsv(std::ostream& out, const Hypergraph& hg) {
  out << std::setprecision(17);
  for (std::size_t e = 0; e < hg.size(); ++e) {
    auto cols = hg.incidence.row_columns(e);
    auto vals = hg.incidence.row_values(e);
    for (std::size_t i = 0; i < cols.size(); ++i) out << e << '\t' << cols[i] << '\t' << vals[i] << '\n';
  }
}

}  // namespace hyperrec
