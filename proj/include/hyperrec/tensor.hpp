// Copyright 2026 The hyperrec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace hyperrec {

/// Dense row-major tensor of doubles.
///
/// Arbitrary rank is supported for storage and serialization; every
/// arithmetic routine in the library works on rank-2 tensors, with vectors
/// represented as 1 x n rows and scalars as 1 x 1.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0);
  Tensor(std::vector<std::size_t> shape, std::vector<double> data);

  static Tensor matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  static Tensor from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Tensor row_vector(std::span<const double> values);
  static Tensor row_vector(std::initializer_list<double> values);
  static Tensor scalar(double value);
  static Tensor identity(std::size_t n);

  const std::vector<std::size_t>& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  // Rank-2 accessors. A rank-0/1 tensor is viewed as a single row.
  std::size_t rows() const noexcept;
  std::size_t cols() const noexcept;

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols() + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols() + c]; }
  double& operator[](std::size_t i) noexcept { return data_[i]; }
  double operator[](std::size_t i) const noexcept { return data_[i]; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols(), cols()}; }
  std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols(), cols()};
  }

  /// Value of a single-element tensor.
  double item() const;

  bool same_shape(const Tensor& other) const noexcept { return shape_ == other.shape_; }
  std::string shape_string() const;

  void fill(double value) noexcept;
  bool all_finite() const noexcept;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

// Plain (non-differentiable) kernels shared by the tape and the oracles'
// consumers. All of them check shapes and throw DimensionError.
Tensor matmul(const Tensor& a, const Tensor& b);
/// a * b^T and a^T * b without materializing the transpose.
Tensor matmul_nt(const Tensor& a, const Tensor& b);
Tensor matmul_tn(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor hadamard(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);
void add_in_place(Tensor& target, const Tensor& source);

/// Stable softmax of a 1 x n row.
Tensor softmax_row(const Tensor& logits);
/// Stable log-sum-exp of a 1 x n row.
double logsumexp_row(const Tensor& values);

inline constexpr double kNormEpsilon = 1e-12;

double dot(std::span<const double> a, std::span<const double> b) noexcept;
double norm(std::span<const double> a) noexcept;
/// Cosine similarity; 0 when either norm is at most kNormEpsilon.
double cosine_similarity(std::span<const double> a, std::span<const double> b) noexcept;

double max_abs_difference(const Tensor& a, const Tensor& b);

}  // namespace hyperrec
