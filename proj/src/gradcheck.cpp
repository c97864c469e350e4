// Copyright 2026 The hyperrec Authors
// SPDX-License-Identifier: Apache-2.0

#include "hyperrec/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace hyperrec {

namespace {

double evaluate(const ScalarFunction& f, std::span<const Tensor> inputs) {
  Tape tape;
  std::vector<Var> vars;
  vars.reserve(inputs.size());
  for (const auto& x : inputs) vars.push_back(tape.constant(x));
  return f(tape, vars).value().item();
}

}  // namespace

GradCheckReport gradient_check(const ScalarFunction& f, std::span<const Tensor> inputs,
                               double eps, double floor) {
  GradCheckReport report;

  std::vector<Tensor> analytic;
  {
    Tape tape;
    std::vector<Var> vars;
    for (const auto& x : inputs) vars.push_back(tape.variable(x));
    Var out = f(tape, vars);
    if (!std::isfinite(out.value().item())) {
      report.finite = false;
      report.message = "function value is not finite at the check point";
      return report;
    }
    tape.backward(out);
    for (const Var& v : vars) analytic.push_back(v.grad());
  }

  std::vector<Tensor> probe(inputs.begin(), inputs.end());
  for (std::size_t k = 0; k < probe.size(); ++k) {
    for (std::size_t i = 0; i < probe[k].size(); ++i) {
      const double saved = probe[k][i];
      probe[k][i] = saved + eps;
      const double up = evaluate(f, probe);
      probe[k][i] = saved - eps;
      const double down = evaluate(f, probe);
      probe[k][i] = saved;
      if (!std::isfinite(up) || !std::isfinite(down)) {
        report.finite = false;
        report.worst_input = k;
        report.worst_index = i;
        report.message = "function value is not finite inside the eps-ball";
        return report;
      }
      const double numeric = (up - down) / (2.0 * eps);
      const double a = analytic[k][i];
      const double denom = std::max({std::abs(a), std::abs(numeric), floor});
      const double rel = std::abs(a - numeric) / denom;
      if (rel > report.max_relative_error) {
        report.max_relative_error = rel;
        report.worst_input = k;
        report.worst_index = i;
        report.worst_analytic = a;
        report.worst_numeric = numeric;
      }
    }
  }
  return report;
}

GradCheckReport gradient_check(const std::function<Var(Tape&, Var)>& f, const Tensor& x,
                               double eps, double floor) {
  const Tensor inputs[] = {x};
  return gradient_check([&f](Tape& t, std::span<const Var> v) { return f(t, v[0]); }, inputs,
                        eps, floor);
}

}  // namespace hyperrec
