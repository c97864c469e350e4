// Copyright 2026 The hyperrec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hyperrec/config.hpp"
#include "hyperrec/data.hpp"
#include "hyperrec/eval.hpp"
#include "hyperrec/trainer.hpp"

namespace hyperrec {

inline constexpr std::string_view kArtifactVersion = "hyperrec-0.1.0";

/// A dataset plus its seeded split and the derived training inputs. Not
/// movable: `data` points into `dataset`.
struct PreparedData {
  Dataset dataset;
  Split split;
  TrainingData data;

  PreparedData() = default;
  PreparedData(const PreparedData&) = delete;
  PreparedData& operator=(const PreparedData&) = delete;

  ModelShape shape(const TrainingConfig& config) const;
};

std::unique_ptr<PreparedData> prepare_data(Dataset dataset, const TrainingConfig& config);
std::unique_ptr<PreparedData> prepare_data(const std::filesystem::path& dataset_dir,
                                           const TrainingConfig& config);

struct HistoryRow {
  std::size_t epoch = 0;
  EpochMetrics loss;
  std::optional<double> recall;  // set on evaluation epochs
  std::optional<double> ndcg;
};

struct TrainOutcome {
  ModelState best;   // best validation state (initial state if never evaluated)
  ModelState last;   // state after the final epoch
  std::vector<HistoryRow> history;
  bool stopped_early = false;
};

/// Called after every epoch with the current state and the new history row.
using EpochHook = std::function<void(const ModelState&, const HistoryRow&)>;

/// Epoch loop with validation every `eval_every` epochs and early stopping
/// after `patience` evaluations without a better validation Recall@k.
/// Continues from `state` (fresh or resumed).
TrainOutcome train_model(const PreparedData& prepared, const TrainingConfig& config,
                         ModelState state, const EpochHook& hook = {});

ModelState fresh_state(const PreparedData& prepared, const TrainingConfig& config);

enum class Holdout { train, valid, test };

/// Evaluates `params` against one split. Rankings mask training edges except
/// when the target itself is the training split.
EvalMetrics evaluate_model(const PreparedData& prepared, const ParamStore& params,
                           const TrainingConfig& config, Holdout target);

void write_history_tsv(std::ostream& out, std::span<const HistoryRow> rows, std::size_t k = 20);

/// Run directory layout:
///   manifest.txt   config, seed, dataset location and hashes, file list
///   checkpoint/    best validation state
///   last/          state after the latest epoch, used by resume
///   history.tsv    epoch, L, L_m, L_c_u, L_c_v, recall@k, ndcg@k
///   metrics.tsv    test metrics of the best checkpoint
///   groups.tsv     density-group breakdown of the same evaluation
///   *.map          internal to external id maps
struct TrainRequest {
  std::filesystem::path dataset_dir;
  std::filesystem::path out_dir;
  TrainingConfig config;
  bool resume = false;
};

EvalMetrics run_training(const TrainRequest& request);

/// Re-evaluates a finished run from its manifest and best checkpoint and
/// rewrites metrics.tsv and groups.tsv (into `out_dir` if given).
EvalMetrics run_evaluation(const std::filesystem::path& run_dir,
                           const std::optional<std::filesystem::path>& out_dir = std::nullopt);

enum class Variant { full, no_sa, no_dh, no_ssl };
std::string_view to_string(Variant v);
Variant parse_variant_name(std::string_view text);
TrainingConfig apply_variant(TrainingConfig config, Variant v);

struct VariantSummary {
  Variant variant = Variant::full;
  std::vector<EvalMetrics> per_seed;
  double recall = 0.0;
  double ndcg = 0.0;
  double mad_users = 0.0;
  double mad_items = 0.0;
  double sparsest_recall = 0.0;
};

VariantSummary summarize(Variant v, std::vector<EvalMetrics> per_seed);

struct AblationRequest {
  std::filesystem::path dataset_dir;
  std::filesystem::path out_dir;
  TrainingConfig config;
  std::vector<Variant> variants{Variant::full, Variant::no_sa, Variant::no_dh, Variant::no_ssl};
  std::size_t seeds = 3;
};

/// Trains every variant on seeds config.seed .. config.seed + seeds - 1 and
/// writes table.tsv (variant, seeds, recall, ndcg), mad.tsv (variant,
/// mad_users, mad_items) and groups.tsv (variant, group, recall).
std::vector<VariantSummary> run_ablation(const AblationRequest& request);

struct SweepPoint {
  std::string param;
  std::string value;
};

struct SweepRequest {
  std::filesystem::path dataset_dir;
  std::filesystem::path out_dir;
  TrainingConfig config;
  std::vector<SweepPoint> points;
};

/// Values of one tunable key from its search grid.
std::vector<std::string> grid_values(std::string_view param);

struct SweepResult {
  SweepPoint point;
  EvalMetrics metrics;
};

/// One independent run per point (others held at `config`); writes
/// sensitivity.tsv with columns param, value, recall, ndcg.
std::vector<SweepResult> run_sweep(const SweepRequest& request);

}  // namespace hyperrec
