// Copyright 2026 The hyperrec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hyperrec/autodiff.hpp"

namespace hyperrec {

struct GradCheckReport {
  /// max over coordinates of |analytic - numeric| / max(|analytic|, |numeric|, floor)
  double max_relative_error = 0.0;
  std::size_t worst_input = 0;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  bool finite = true;
  std::string message;

  bool passed(double tolerance) const { return finite && max_relative_error < tolerance; }
};

/// Builds a scalar on the given tape from variables bound to the inputs.
using ScalarFunction = std::function<Var(Tape&, std::span<const Var>)>;

/// Compares reverse-mode gradients with central differences
/// (f(x + eps) - f(x - eps)) / (2 eps), coordinate by coordinate.
/// `floor` keeps the relative error meaningful where both gradients vanish.
GradCheckReport gradient_check(const ScalarFunction& f, std::span<const Tensor> inputs,
                               double eps = 1e-5, double floor = 1e-6);

/// Single-input convenience overload.
GradCheckReport gradient_check(const std::function<Var(Tape&, Var)>& f, const Tensor& x,
                               double eps = 1e-5, double floor = 1e-6);

}  // namespace hyperrec
