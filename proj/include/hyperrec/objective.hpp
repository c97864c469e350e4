// Copyright 2026 The hyperrec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <utility>
#include <vector>

#include "hyperrec/autodiff.hpp"
#include "hyperrec/data.hpp"
#include "hyperrec/rng.hpp"

namespace hyperrec {

struct TrainTriple {
  UserId user;
  ItemId positive;
  ItemId negative;
};

struct LossWeights {
  double lambda1 = 2e-3;
  double lambda2 = 1e-4;
  double tau = 0.5;
};

/// Fixed margin of the pairwise hinge.
inline constexpr double kMargin = 1.0;

/// Inner product of final user and item representations.
double score(std::span<const double> user, std::span<const double> item) noexcept;

/// sum over pairs of max(0, margin - positive + negative).
double margin_loss(std::span<const std::pair<double, double>> scored_pairs) noexcept;
/// Differentiable form over r x 1 columns of positive and negative scores.
Var margin_loss(Var positive, Var negative);

/// Row-wise inner products of two n x d blocks, n x 1.
Var row_scores(Var users, Var items);

/// Cross-view InfoNCE: sum_i -log( exp(s(l_i, g_i)/tau) / sum_{j != i} exp(s(l_i, g_j)/tau) ),
/// s = cosine. With include_positive the denominator also runs over j = i.
/// Requires n >= 2 when the positive is excluded.
Var infonce(Var local, Var global, double tau, bool include_positive = false);

/// L = L_m + lambda1 (L_c^u + L_c^v) + lambda2 * sum_squares
Var total_loss(Var ranking, Var contrast_users, Var contrast_items, Var parameter_sum_squares,
               const LossWeights& weights);

/// Uniform item outside N(u): up to 100 rejection draws, then an explicit
/// complement draw. Throws SamplingError when the user has interacted with
/// every item.
ItemId sample_negative(const InteractionGraph& graph, UserId user, Rng& rng);

}  // namespace hyperrec
