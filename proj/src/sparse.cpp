// Copyright 2026 The hyperrec Authors
// SPDX-License-Identifier: Apache-2.0

#include "hyperrec/sparse.hpp"

#include <algorithm>

#include "hyperrec/error.hpp"

namespace hyperrec {

CsrMatrix::CsrMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), row_ptr_(rows + 1, 0) {}

CsrMatrix CsrMatrix::from_triplets(std::size_t rows, std::size_t cols,
                                   std::vector<Triplet> entries) {
  for (const auto& t : entries) {
    if (t.row >= rows || t.col >= cols) {
      throw DimensionError("sparse entry (" + std::to_string(t.row) + "," +
                           std::to_string(t.col) + ") outside " + std::to_string(rows) + "x" +
                           std::to_string(cols));
    }
  }
  std::stable_sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  CsrMatrix m(rows, cols);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& t = entries[i];
    if (i > 0 && entries[i - 1].row == t.row && entries[i - 1].col == t.col) {
      m.values_.back() += t.value;
      continue;
    }
    m.col_idx_.push_back(t.col);
    m.values_.push_back(t.value);
    ++m.row_ptr_[t.row + 1];
  }
  for (std::size_t r = 0; r < rows; ++r) m.row_ptr_[r + 1] += m.row_ptr_[r];
  return m;
}

CsrMatrix CsrMatrix::transposed() const {
  std::vector<Triplet> entries;
  entries.reserve(nnz());
  for (std::size_t r = 0; r < rows_; ++r) {
    auto cs = row_columns(r);
    auto vs = row_values(r);
    for (std::size_t k = 0; k < cs.size(); ++k) entries.push_back({cs[k], r, vs[k]});
  }
  return from_triplets(cols_, rows_, std::move(entries));
}

Tensor CsrMatrix::to_dense() const {
  Tensor out = Tensor::matrix(rows_, cols_);
  for (std::size_t r = 0; r < rows_; ++r) {
    auto cs = row_columns(r);
    auto vs = row_values(r);
    for (std::size_t k = 0; k < cs.size(); ++k) out(r, cs[k]) += vs[k];
  }
  return out;
}

Tensor CsrMatrix::multiply(const Tensor& dense) const {
  if (dense.rank() != 2 || dense.rows() != cols_) {
    throw DimensionError("sparse multiply: shape mismatch [" + std::to_string(rows_) + "x" +
                         std::to_string(cols_) + "] vs " + dense.shape_string());
  }
  const std::size_t d = dense.cols();
  Tensor out = Tensor::matrix(rows_, d);
  for (std::size_t r = 0; r < rows_; ++r) {
    auto cs = row_columns(r);
    auto vs = row_values(r);
    auto orow = out.row(r);
    for (std::size_t k = 0; k < cs.size(); ++k) {
      auto src = dense.row(cs[k]);
      for (std::size_t j = 0; j < d; ++j) orow[j] += vs[k] * src[j];
    }
  }
  return out;
}

Tensor CsrMatrix::multiply_transposed(const Tensor& dense) const {
  if (dense.rank() != 2 || dense.rows() != rows_) {
    throw DimensionError("sparse transposed multiply: shape mismatch [" +
                         std::to_string(rows_) + "x" + std::to_string(cols_) + "]^T vs " +
                         dense.shape_string());
  }
  const std::size_t d = dense.cols();
  Tensor out = Tensor::matrix(cols_, d);
  for (std::size_t r = 0; r < rows_; ++r) {
    auto cs = row_columns(r);
    auto vs = row_values(r);
    auto src = dense.row(r);
    for (std::size_t k = 0; k < cs.size(); ++k) {
      auto orow = out.row(cs[k]);
      for (std::size_t j = 0; j < d; ++j) orow[j] += vs[k] * src[j];
    }
  }
  return out;
}

}  // namespace hyperrec
