// Copyright 2026 The hyperrec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <span>
#include <vector>

#include "hyperrec/sparse.hpp"
#include "hyperrec/tensor.hpp"

namespace hyperrec {

class Tape;

/// Handle to a node recorded on a Tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  const Tensor& value() const;
  /// Gradient accumulated by the last backward(); zeros if none reached this node.
  const Tensor& grad() const;
  std::size_t id() const noexcept { return id_; }
  Tape* tape() const noexcept { return tape_; }
  bool valid() const noexcept { return tape_ != nullptr; }
  bool requires_grad() const;

  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }

 private:
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Reverse-mode tape. A fresh tape is built for every loss evaluation, so the
/// recorded graph can follow topology that changes from step to step.
class Tape {
 public:
  using Backward = std::function<void(Tape&, const Tensor& upstream)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  Var variable(Tensor value);

  /// Records an op result. `backward` runs only if some parent requires grad.
  Var record(Tensor value, std::initializer_list<Var> parents, Backward backward);
  Var record(Tensor value, std::span<const Var> parents, Backward backward);

  /// Seeds d(loss)/d(loss) = 1 and propagates to every node. loss must be 1 x 1.
  void backward(Var loss);

  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  const Tensor& grad(std::size_t id);
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  std::size_t size() const noexcept { return nodes_.size(); }

  /// Adds `delta` into the gradient slot of `target` (no-op for constants).
  void accumulate(Var target, const Tensor& delta);
  /// Direct mutable access to a gradient slot, allocated on first use.
  Tensor& grad_slot(Var target);

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    Backward backward;
  };
  // Deque keeps value()/grad() references valid while more nodes are recorded.
  std::deque<Node> nodes_;
};

namespace ad {

Var matmul(Var a, Var b);
/// a * b^T.
Var matmul_nt(Var a, Var b);
Var transpose(Var a);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var hadamard(Var a, Var b);
Var scale(Var a, double factor);
Var add_scalar(Var a, double offset);
Var concat_rows(std::span<const Var> parts);
/// 1 x c column-wise sum over rows.
Var sum_rows(Var a);
/// 1 x c mean over rows.
Var mean_rows(Var a);
/// r x 1 sum over columns.
Var sum_cols(Var a);
Var sum_all(Var a);
Var sum_squares(Var a);
/// Row selection with repetition; the backward pass scatter-adds.
Var gather_rows(Var a, std::span<const std::size_t> rows);
/// Applies a constant sparse operator on the left: op * a.
Var spmm(const CsrMatrix& op, Var a);

/// One entry of a constant linear remapping: out[out_index] += coeff * in[in_index]
/// (flat indices into row-major storage).
struct RemapEntry {
  std::size_t out_index;
  std::size_t in_index;
  double coeff = 1.0;
};
/// General constant linear map of a tensor's entries into a fresh rows x cols tensor.
Var remap(Var a, std::size_t rows, std::size_t cols, std::span<const RemapEntry> entries);

Var softmax_rows(Var a);
Var leaky_relu(Var a, double slope);
Var relu(Var a);
Var tanh(Var a);
/// Rows divided by their L2 norm; rows with norm <= kNormEpsilon map to zero
/// and pass no gradient.
Var normalize_rows(Var a);
/// r x 1 stable log-sum-exp of each row, optionally skipping the diagonal entry.
Var logsumexp_rows(Var a, bool exclude_diagonal = false);
/// Treats consecutive column pairs as complex numbers and rotates pair k of
/// each row by the angle phases(row, 2k).
Var rotate_pairs(Var values, Var phases);
/// Cosine similarity of two 1 x d rows as a 1 x 1 node.
Var cosine_similarity(Var a, Var b);

}  // namespace ad

}  // namespace hyperrec
