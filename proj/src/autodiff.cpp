// Copyright 2026 The hyperrec Authors
// SPDX-License-Identifier: Apache-2.0

#include "hyperrec/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hyperrec/error.hpp"

namespace hyperrec {

const Tensor& Var::value() const { return tape_->value(id_); }
const Tensor& Var::grad() const { return tape_->grad(id_); }
bool Var::requires_grad() const { return tape_->requires_grad(id_); }

Var Tape::constant(Tensor value) {
  nodes_.push_back(Node{std::move(value), {}, false, {}});
  return Var(this, nodes_.size() - 1);
}

Var Tape::variable(Tensor value) {
  nodes_.push_back(Node{std::move(value), {}, true, {}});
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Tensor value, std::initializer_list<Var> parents, Backward backward) {
  return record(std::move(value), std::span<const Var>(parents.begin(), parents.size()),
                std::move(backward));
}

Var Tape::record(Tensor value, std::span<const Var> parents, Backward backward) {
  bool needs = false;
  for (const Var& p : parents) {
    if (p.tape() != this) throw ContractError("operands recorded on different tapes");
    needs = needs || nodes_[p.id()].requires_grad;
  }
  nodes_.push_back(Node{std::move(value), {}, needs, needs ? std::move(backward) : Backward{}});
  return Var(this, nodes_.size() - 1);
}

const Tensor& Tape::grad(std::size_t id) {
  Node& n = nodes_[id];
  if (n.grad.size() != n.value.size() || !n.grad.same_shape(n.value)) {
    n.grad = Tensor(n.value.shape(), 0.0);
  }
  return n.grad;
}

Tensor& Tape::grad_slot(Var target) {
  grad(target.id());
  return nodes_[target.id()].grad;
}

void Tape::accumulate(Var target, const Tensor& delta) {
  if (!nodes_[target.id()].requires_grad) return;
  add_in_place(grad_slot(target), delta);
}

void Tape::backward(Var loss) {
  if (loss.tape() != this) throw ContractError("backward: loss belongs to another tape");
  if (loss.value().size() != 1) {
    throw DimensionError("backward: loss must be a scalar, got " + loss.value().shape_string());
  }
  for (auto& n : nodes_) {
    if (n.requires_grad) n.grad = Tensor(n.value.shape(), 0.0);
  }
  grad_slot(loss).fill(1.0);
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || !n.backward) continue;
    // The closure may touch other nodes' grads but never appends nodes, so the
    // reference stays valid.
    const Tensor& upstream = n.grad;
    n.backward(*this, upstream);
  }
}

namespace ad {

namespace {

void require_same(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(op) + ": shape mismatch " + a.shape_string() + " vs " +
                         b.shape_string());
  }
}

Tape& tape_of(Var a) {
  if (!a.valid()) throw ContractError("operation on an unbound variable");
  return *a.tape();
}

}  // namespace

Var matmul(Var a, Var b) {
  Tape& t = tape_of(a);
  Tensor out = hyperrec::matmul(a.value(), b.value());
  return t.record(std::move(out), {a, b}, [a, b](Tape& tp, const Tensor& g) {
    if (a.requires_grad()) tp.accumulate(a, hyperrec::matmul_nt(g, b.value()));
    if (b.requires_grad()) tp.accumulate(b, hyperrec::matmul_tn(a.value(), g));
  });
}

Var matmul_nt(Var a, Var b) {
  Tape& t = tape_of(a);
  Tensor out = hyperrec::matmul_nt(a.value(), b.value());
  return t.record(std::move(out), {a, b}, [a, b](Tape& tp, const Tensor& g) {
    if (a.requires_grad()) tp.accumulate(a, hyperrec::matmul(g, b.value()));
    if (b.requires_grad()) tp.accumulate(b, hyperrec::matmul_tn(g, a.value()));
  });
}

Var transpose(Var a) {
  Tape& t = tape_of(a);
  return t.record(hyperrec::transpose(a.value()), {a}, [a](Tape& tp, const Tensor& g) {
    tp.accumulate(a, hyperrec::transpose(g));
  });
}

Var add(Var a, Var b) {
  Tape& t = tape_of(a);
  return t.record(hyperrec::add(a.value(), b.value()), {a, b}, [a, b](Tape& tp, const Tensor& g) {
    tp.accumulate(a, g);
    tp.accumulate(b, g);
  });
}

Var sub(Var a, Var b) {
  Tape& t = tape_of(a);
  return t.record(hyperrec::sub(a.value(), b.value()), {a, b}, [a, b](Tape& tp, const Tensor& g) {
    tp.accumulate(a, g);
    if (b.requires_grad()) tp.accumulate(b, hyperrec::scale(g, -1.0));
  });
}

Var hadamard(Var a, Var b) {
  Tape& t = tape_of(a);
  return t.record(hyperrec::hadamard(a.value(), b.value()), {a, b},
                  [a, b](Tape& tp, const Tensor& g) {
                    if (a.requires_grad()) tp.accumulate(a, hyperrec::hadamard(g, b.value()));
                    if (b.requires_grad()) tp.accumulate(b, hyperrec::hadamard(g, a.value()));
                  });
}

Var scale(Var a, double factor) {
  Tape& t = tape_of(a);
  return t.record(hyperrec::scale(a.value(), factor), {a}, [a, factor](Tape& tp, const Tensor& g) {
    tp.accumulate(a, hyperrec::scale(g, factor));
  });
}

Var add_scalar(Var a, double offset) {
  Tape& t = tape_of(a);
  Tensor out = a.value();
  for (double& v : out.data()) v += offset;
  return t.record(std::move(out), {a}, [a](Tape& tp, const Tensor& g) { tp.accumulate(a, g); });
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw ContractError("concat_rows: no operands");
  Tape& t = tape_of(parts.front());
  const std::size_t c = parts.front().cols();
  std::size_t total = 0;
  for (const Var& p : parts) {
    if (p.value().rank() != 2 || p.cols() != c) {
      throw DimensionError("concat_rows: shape mismatch " + parts.front().value().shape_string() +
                           " vs " + p.value().shape_string());
    }
    total += p.rows();
  }
  Tensor out = Tensor::matrix(total, c);
  std::size_t offset = 0;
  for (const Var& p : parts) {
    std::copy(p.value().data().begin(), p.value().data().end(),
              out.data().begin() + static_cast<std::ptrdiff_t>(offset * c));
    offset += p.rows();
  }
  std::vector<Var> saved(parts.begin(), parts.end());
  return t.record(std::move(out), parts, [saved, c](Tape& tp, const Tensor& g) {
    std::size_t offset = 0;
    for (const Var& p : saved) {
      if (p.requires_grad()) {
        Tensor& slot = tp.grad_slot(p);
        auto src = g.data().subspan(offset * c, p.rows() * c);
        auto dst = slot.data();
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
      }
      offset += p.rows();
    }
  });
}

Var sum_rows(Var a) {
  Tape& t = tape_of(a);
  const Tensor& x = a.value();
  Tensor out = Tensor::matrix(1, x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j) out(0, j) += x(i, j);
  return t.record(std::move(out), {a}, [a](Tape& tp, const Tensor& g) {
    Tensor& slot = tp.grad_slot(a);
    for (std::size_t i = 0; i < slot.rows(); ++i)
      for (std::size_t j = 0; j < slot.cols(); ++j) slot(i, j) += g(0, j);
  });
}

Var mean_rows(Var a) {
  const std::size_t n = a.rows();
  if (n == 0) throw ContractError("mean_rows: empty operand");
  return scale(sum_rows(a), 1.0 / static_cast<double>(n));
}

Var sum_cols(Var a) {
  Tape& t = tape_of(a);
  const Tensor& x = a.value();
  Tensor out = Tensor::matrix(x.rows(), 1);
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j) out(i, 0) += x(i, j);
  return t.record(std::move(out), {a}, [a](Tape& tp, const Tensor& g) {
    Tensor& slot = tp.grad_slot(a);
    for (std::size_t i = 0; i < slot.rows(); ++i)
      for (std::size_t j = 0; j < slot.cols(); ++j) slot(i, j) += g(i, 0);
  });
}

Var sum_all(Var a) {
  Tape& t = tape_of(a);
  double s = 0.0;
  for (double v : a.value().data()) s += v;
  return t.record(Tensor::scalar(s), {a}, [a](Tape& tp, const Tensor& g) {
    Tensor& slot = tp.grad_slot(a);
    const double gv = g[0];
    for (double& v : slot.data()) v += gv;
  });
}

Var sum_squares(Var a) {
  Tape& t = tape_of(a);
  double s = 0.0;
  for (double v : a.value().data()) s += v * v;
  return t.record(Tensor::scalar(s), {a}, [a](Tape& tp, const Tensor& g) {
    Tensor& slot = tp.grad_slot(a);
    auto x = a.value().data();
    auto d = slot.data();
    const double gv = 2.0 * g[0];
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += gv * x[i];
  });
}

Var gather_rows(Var a, std::span<const std::size_t> rows) {
  Tape& t = tape_of(a);
  const Tensor& x = a.value();
  const std::size_t c = x.cols();
  Tensor out = Tensor::matrix(rows.size(), c);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= x.rows()) {
      throw DimensionError("gather_rows: row " + std::to_string(rows[i]) + " outside " +
                           x.shape_string());
    }
    std::copy_n(x.row(rows[i]).begin(), c, out.row(i).begin());
  }
  std::vector<std::size_t> idx(rows.begin(), rows.end());
  return t.record(std::move(out), {a}, [a, idx = std::move(idx)](Tape& tp, const Tensor& g) {
    Tensor& slot = tp.grad_slot(a);
    const std::size_t c = slot.cols();
    for (std::size_t i = 0; i < idx.size(); ++i) {
      auto dst = slot.row(idx[i]);
      auto src = g.row(i);
      for (std::size_t j = 0; j < c; ++j) dst[j] += src[j];
    }
  });
}

Var spmm(const CsrMatrix& op, Var a) {
  Tape& t = tape_of(a);
  Tensor out = op.multiply(a.value());
  // The operator is copied into the closure so callers may drop theirs.
  return t.record(std::move(out), {a}, [a, op](Tape& tp, const Tensor& g) {
    tp.accumulate(a, op.multiply_transposed(g));
  });
}

Var remap(Var a, std::size_t rows, std::size_t cols, std::span<const RemapEntry> entries) {
  Tape& t = tape_of(a);
  const Tensor& x = a.value();
  Tensor out = Tensor::matrix(rows, cols);
  for (const auto& e : entries) {
    if (e.in_index >= x.size() || e.out_index >= out.size()) {
      throw DimensionError("remap: entry outside operand bounds");
    }
    out[e.out_index] += e.coeff * x[e.in_index];
  }
  std::vector<RemapEntry> saved(entries.begin(), entries.end());
  return t.record(std::move(out), {a}, [a, saved = std::move(saved)](Tape& tp, const Tensor& g) {
    Tensor& slot = tp.grad_slot(a);
    for (const auto& e : saved) slot[e.in_index] += e.coeff * g[e.out_index];
  });
}

Var softmax_rows(Var a) {
  Tape& t = tape_of(a);
  const Tensor& x = a.value();
  Tensor out = Tensor::matrix(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto src = x.row(i);
    auto dst = out.row(i);
    const double mx = *std::max_element(src.begin(), src.end());
    double total = 0.0;
    for (std::size_t j = 0; j < src.size(); ++j) {
      dst[j] = std::exp(src[j] - mx);
      total += dst[j];
    }
    for (double& v : dst) v /= total;
  }
  Tensor y = out;
  return t.record(std::move(out), {a}, [a, y = std::move(y)](Tape& tp, const Tensor& g) {
    Tensor& slot = tp.grad_slot(a);
    for (std::size_t i = 0; i < y.rows(); ++i) {
      auto yr = y.row(i);
      auto gr = g.row(i);
      const double inner = dot(yr, gr);
      auto dst = slot.row(i);
      for (std::size_t j = 0; j < yr.size(); ++j) dst[j] += yr[j] * (gr[j] - inner);
    }
  });
}

Var leaky_relu(Var a, double slope) {
  Tape& t = tape_of(a);
  Tensor out = a.value();
  for (double& v : out.data()) v = v > 0.0 ? v : slope * v;
  return t.record(std::move(out), {a}, [a, slope](Tape& tp, const Tensor& g) {
    Tensor& slot = tp.grad_slot(a);
    auto x = a.value().data();
    for (std::size_t i = 0; i < x.size(); ++i) slot[i] += (x[i] > 0.0 ? 1.0 : slope) * g[i];
  });
}

Var relu(Var a) { return leaky_relu(a, 0.0); }

Var tanh(Var a) {
  Tape& t = tape_of(a);
  Tensor out = a.value();
  for (double& v : out.data()) v = std::tanh(v);
  Tensor y = out;
  return t.record(std::move(out), {a}, [a, y = std::move(y)](Tape& tp, const Tensor& g) {
    Tensor& slot = tp.grad_slot(a);
    for (std::size_t i = 0; i < y.size(); ++i) slot[i] += (1.0 - y[i] * y[i]) * g[i];
  });
}

Var normalize_rows(Var a) {
  Tape& t = tape_of(a);
  const Tensor& x = a.value();
  Tensor out = Tensor::matrix(x.rows(), x.cols());
  std::vector<double> norms(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    norms[i] = norm(x.row(i));
    if (norms[i] <= kNormEpsilon) continue;
    auto src = x.row(i);
    auto dst = out.row(i);
    for (std::size_t j = 0; j < src.size(); ++j) dst[j] = src[j] / norms[i];
  }
  Tensor y = out;
  return t.record(std::move(out), {a},
                  [a, y = std::move(y), norms = std::move(norms)](Tape& tp, const Tensor& g) {
                    Tensor& slot = tp.grad_slot(a);
                    for (std::size_t i = 0; i < y.rows(); ++i) {
                      if (norms[i] <= kNormEpsilon) continue;
                      auto yr = y.row(i);
                      auto gr = g.row(i);
                      const double inner = dot(yr, gr);
                      auto dst = slot.row(i);
                      for (std::size_t j = 0; j < yr.size(); ++j) {
                        dst[j] += (gr[j] - yr[j] * inner) / norms[i];
                      }
                    }
                  });
}

Var logsumexp_rows(Var a, bool exclude_diagonal) {
  Tape& t = tape_of(a);
  const Tensor& x = a.value();
  const std::size_t r = x.rows(), c = x.cols();
  Tensor out = Tensor::matrix(r, 1);
  Tensor weights = Tensor::matrix(r, c);
  for (std::size_t i = 0; i < r; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t j = 0; j < c; ++j) {
      if (exclude_diagonal && i == j) continue;
      mx = std::max(mx, x(i, j));
      any = true;
    }
    if (!any) throw ContractError("logsumexp_rows: row " + std::to_string(i) + " has no terms");
    double total = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      if (exclude_diagonal && i == j) continue;
      weights(i, j) = std::exp(x(i, j) - mx);
      total += weights(i, j);
    }
    for (std::size_t j = 0; j < c; ++j) weights(i, j) /= total;
    out(i, 0) = mx + std::log(total);
  }
  return t.record(std::move(out), {a}, [a, weights = std::move(weights)](Tape& tp, const Tensor& g) {
    Tensor& slot = tp.grad_slot(a);
    for (std::size_t i = 0; i < weights.rows(); ++i) {
      const double gi = g(i, 0);
      for (std::size_t j = 0; j < weights.cols(); ++j) slot(i, j) += gi * weights(i, j);
    }
  });
}

Var rotate_pairs(Var values, Var phases) {
  Tape& t = tape_of(values);
  const Tensor& x = values.value();
  const Tensor& p = phases.value();
  require_same(x, p, "rotate_pairs");
  if (x.cols() % 2 != 0) {
    throw DimensionError("rotate_pairs: odd embedding width " + std::to_string(x.cols()));
  }
  Tensor out = Tensor::matrix(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t k = 0; k + 1 < x.cols(); k += 2) {
      const double re = x(i, k), im = x(i, k + 1);
      const double c = std::cos(p(i, k)), s = std::sin(p(i, k));
      out(i, k) = re * c - im * s;
      out(i, k + 1) = re * s + im * c;
    }
  }
  Tensor y = out;
  return t.record(std::move(out), {values, phases},
                  [values, phases, y = std::move(y)](Tape& tp, const Tensor& g) {
                    const Tensor& p = phases.value();
                    const bool want_x = values.requires_grad();
                    const bool want_p = phases.requires_grad();
                    Tensor* gx = want_x ? &tp.grad_slot(values) : nullptr;
                    Tensor* gp = want_p ? &tp.grad_slot(phases) : nullptr;
                    for (std::size_t i = 0; i < y.rows(); ++i) {
                      for (std::size_t k = 0; k + 1 < y.cols(); k += 2) {
                        const double g0 = g(i, k), g1 = g(i, k + 1);
                        const double c = std::cos(p(i, k)), s = std::sin(p(i, k));
                        if (gx) {
                          (*gx)(i, k) += g0 * c + g1 * s;
                          (*gx)(i, k + 1) += -g0 * s + g1 * c;
                        }
                        if (gp) (*gp)(i, k) += -g0 * y(i, k + 1) + g1 * y(i, k);
                      }
                    }
                  });
}

Var cosine_similarity(Var a, Var b) {
  return sum_all(hadamard(normalize_rows(a), normalize_rows(b)));
}

}  // namespace ad

}  // namespace hyperrec
