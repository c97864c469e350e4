// Copyright 2026 The hyperrec Authors
// SPDX-License-Identifier: Apache-2.0

#include "hyperrec/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

#include "hyperrec/error.hpp"

namespace hyperrec {

namespace {

std::size_t product(const std::vector<std::size_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

void require_rank2(const Tensor& t, const char* op) {
  if (t.rank() != 2) {
    throw DimensionError(std::string(op) + ": expected a matrix, got shape " + t.shape_string());
  }
}

void require_same(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(op) + ": shape mismatch " + a.shape_string() + " vs " +
                         b.shape_string());
  }
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape, double fill)
    : shape_(std::move(shape)), data_(product(shape_), fill) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != product(shape_)) {
    throw DimensionError("tensor data length " + std::to_string(data_.size()) +
                         " does not match shape " + shape_string());
  }
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, double fill) {
  return Tensor({rows, cols}, fill);
}

Tensor Tensor::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw DimensionError("from_rows: ragged rows");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Tensor({r, c}, std::move(data));
}

Tensor Tensor::row_vector(std::span<const double> values) {
  return Tensor({1, values.size()}, std::vector<double>(values.begin(), values.end()));
}

Tensor Tensor::row_vector(std::initializer_list<double> values) {
  return Tensor({1, values.size()}, std::vector<double>(values));
}

Tensor Tensor::scalar(double value) { return Tensor({1, 1}, value); }

Tensor Tensor::identity(std::size_t n) {
  Tensor t = matrix(n, n);
  for (std::size_t i = 0; i < n; ++i) t(i, i) = 1.0;
  return t;
}

std::size_t Tensor::rows() const noexcept {
  if (shape_.size() < 2) return shape_.empty() ? (data_.empty() ? 0 : 1) : 1;
  return shape_[0];
}

std::size_t Tensor::cols() const noexcept {
  if (shape_.empty()) return data_.size();
  return shape_.back();
}

double Tensor::item() const {
  if (data_.size() != 1) {
    throw DimensionError("item(): tensor of shape " + shape_string() + " is not a scalar");
  }
  return data_[0];
}

std::string Tensor::shape_string() const {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape_.size(); ++i) {
    if (i) os << 'x';
    os << shape_[i];
  }
  os << ']';
  return os.str();
}

void Tensor::fill(double value) noexcept { std::fill(data_.begin(), data_.end(), value); }

bool Tensor::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank2(a, "matmul");
  require_rank2(b, "matmul");
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: shape mismatch " + a.shape_string() + " vs " + b.shape_string());
  }
  const std::size_t n = a.rows(), m = a.cols(), p = b.cols();
  Tensor out = Tensor::matrix(n, p);
  const double* pa = a.data().data();
  const double* pb = b.data().data();
  double* po = out.data().data();
  for (std::size_t i = 0; i < n; ++i) {
    double* orow = po + i * p;
    for (std::size_t k = 0; k < m; ++k) {
      const double aik = pa[i * m + k];
      if (aik == 0.0) continue;
      const double* brow = pb + k * p;
      for (std::size_t j = 0; j < p; ++j) orow[j] += aik * brow[j];
    }
  }
  return out;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  require_rank2(a, "matmul_nt");
  require_rank2(b, "matmul_nt");
  if (a.cols() != b.cols()) {
    throw DimensionError("matmul_nt: shape mismatch " + a.shape_string() + " vs " + b.shape_string());
  }
  const std::size_t n = a.rows(), m = a.cols(), p = b.rows();
  Tensor out = Tensor::matrix(n, p);
  const double* pa = a.data().data();
  const double* pb = b.data().data();
  double* po = out.data().data();
  for (std::size_t i = 0; i < n; ++i) {
    const double* arow = pa + i * m;
    for (std::size_t j = 0; j < p; ++j) {
      const double* brow = pb + j * m;
      double s = 0.0;
      for (std::size_t k = 0; k < m; ++k) s += arow[k] * brow[k];
      po[i * p + j] = s;
    }
  }
  return out;
}

Tensor matmul_tn(const Tensor& a, const Tensor& b) {
  require_rank2(a, "matmul_tn");
  require_rank2(b, "matmul_tn");
  if (a.rows() != b.rows()) {
    throw DimensionError("matmul_tn: shape mismatch " + a.shape_string() + " vs " + b.shape_string());
  }
  const std::size_t n = a.rows(), m = a.cols(), p = b.cols();
  Tensor out = Tensor::matrix(m, p);
  const double* pa = a.data().data();
  const double* pb = b.data().data();
  double* po = out.data().data();
  for (std::size_t i = 0; i < n; ++i) {
    const double* brow = pb + i * p;
    for (std::size_t k = 0; k < m; ++k) {
      const double aik = pa[i * m + k];
      if (aik == 0.0) continue;
      double* orow = po + k * p;
      for (std::size_t j = 0; j < p; ++j) orow[j] += aik * brow[j];
    }
  }
  return out;
}

Tensor transpose(const Tensor& a) {
  require_rank2(a, "transpose");
  const std::size_t n = a.rows(), m = a.cols();
  Tensor out = Tensor::matrix(m, n);
  const double* pa = a.data().data();
  double* po = out.data().data();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) po[j * n + i] = pa[i * m + j];
  return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same(a, b, "add");
  Tensor out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
  return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same(a, b, "sub");
  Tensor out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b[i];
  return out;
}

Tensor hadamard(const Tensor& a, const Tensor& b) {
  require_same(a, b, "hadamard");
  Tensor out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b[i];
  return out;
}

Tensor scale(const Tensor& a, double factor) {
  Tensor out = a;
  for (double& v : out.data()) v *= factor;
  return out;
}

void add_in_place(Tensor& target, const Tensor& source) {
  require_same(target, source, "add_in_place");
  auto t = target.data();
  auto s = source.data();
  for (std::size_t i = 0; i < t.size(); ++i) t[i] += s[i];
}

Tensor softmax_row(const Tensor& logits) {
  if (logits.rows() != 1) {
    throw DimensionError("softmax_row: expected a 1 x n row, got " + logits.shape_string());
  }
  Tensor out = logits;
  auto v = out.data();
  if (v.empty()) return out;
  const double mx = *std::max_element(v.begin(), v.end());
  double total = 0.0;
  for (double& x : v) {
    x = std::exp(x - mx);
    total += x;
  }
  for (double& x : v) x /= total;
  return out;
}

double logsumexp_row(const Tensor& values) {
  if (values.rows() != 1 || values.size() == 0) {
    throw DimensionError("logsumexp_row: expected a non-empty 1 x n row, got " +
                         values.shape_string());
  }
  auto v = values.data();
  const double mx = *std::max_element(v.begin(), v.end());
  double total = 0.0;
  for (double x : v) total += std::exp(x - mx);
  return mx + std::log(total);
}

double dot(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> a) noexcept { return std::sqrt(dot(a, a)); }

double cosine_similarity(std::span<const double> a, std::span<const double> b) noexcept {
  const double na = norm(a);
  const double nb = norm(b);
  if (na <= kNormEpsilon || nb <= kNormEpsilon) return 0.0;
  return dot(a, b) / (na * nb);
}

double max_abs_difference(const Tensor& a, const Tensor& b) {
  require_same(a, b, "max_abs_difference");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

}  // namespace hyperrec
