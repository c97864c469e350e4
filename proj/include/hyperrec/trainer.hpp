// Copyright 2026 The hyperrec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hyperrec/autodiff.hpp"
#include "hyperrec/config.hpp"
#include "hyperrec/data.hpp"
#include "hyperrec/encoder.hpp"
#include "hyperrec/hypergraph.hpp"
#include "hyperrec/objective.hpp"
#include "hyperrec/propagation.hpp"
#include "hyperrec/rng.hpp"

namespace hyperrec {

/// Table sizes a model is built for.
struct ModelShape {
  std::size_t users = 0;
  std::size_t items = 0;
  std::size_t entities = 0;
  std::size_t relations = 0;
  std::size_t dim = 0;
  std::size_t layers = 0;

  friend bool operator==(const ModelShape&, const ModelShape&) = default;
};

/// Named trainable tensors in a fixed order.
class ParamStore {
 public:
  void add(std::string name, Tensor value);
  std::size_t size() const noexcept { return tensors_.size(); }
  std::span<const std::string> names() const noexcept { return names_; }
  std::span<Tensor> tensors() noexcept { return tensors_; }
  std::span<const Tensor> tensors() const noexcept { return tensors_; }
  Tensor& at(std::string_view name);
  const Tensor& at(std::string_view name) const;

  friend bool operator==(const ParamStore&, const ParamStore&) = default;

 private:
  std::vector<std::string> names_;
  std::vector<Tensor> tensors_;
};

namespace param_names {
inline constexpr std::string_view kUsers = "user_emb";
inline constexpr std::string_view kEntities = "entity_emb";
inline constexpr std::string_view kRelations = "relation_emb";
inline constexpr std::string_view kQuery = "w_query";
inline constexpr std::string_view kKey = "w_key";
inline constexpr std::string_view kValue = "w_value";
inline constexpr std::string_view kBiasKey = "bias_key";
inline constexpr std::string_view kBiasValue = "bias_value";
inline constexpr std::string_view kQualifier = "w_qualifier";
inline constexpr std::string_view kForward = "w_forward";
std::string hyper(std::size_t layer);
}  // namespace param_names

struct AdamState {
  std::vector<Tensor> first;
  std::vector<Tensor> second;
  std::uint64_t step = 0;
  friend bool operator==(const AdamState&, const AdamState&) = default;
};

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEpsilon = 1e-8;

struct ModelState {
  ModelShape shape;
  ParamStore params;
  AdamState adam;
  std::size_t epoch = 0;
  Rng rng;
  // Early-stopping bookkeeping on validation Recall@k.
  double best_valid = -1.0;
  std::size_t best_epoch = 0;
  std::size_t stale_evals = 0;

  friend bool operator==(const ModelState&, const ModelState&) = default;
};

/// Xavier-uniform weights and embeddings (bound sqrt(6 / (fan_in + fan_out))),
/// zero attention biases, zero optimizer moments. Deterministic per seed.
ModelState init_params(const TrainingConfig& config, const ModelShape& shape, std::uint64_t seed);

/// Parameters bound to a tape.
struct BoundParams {
  EncoderVars encoder;
  Var users;
  std::vector<Var> hyper;  // one d x d matrix per layer
  std::vector<Var> all;    // same order as ParamStore
};

BoundParams bind_params(Tape& tape, const ParamStore& params, bool trainable);
/// Same wiring for variables created elsewhere, `vars` in ParamStore order.
BoundParams bind_vars(std::span<const std::string> names, std::span<const Var> vars);

/// Fixed inputs of the forward pass.
struct TrainingData {
  InteractionGraph train;
  BipartiteOperator op;
  const StatementStore* statements = nullptr;
  std::vector<EntityId> item_entity;
};

TrainingData make_training_data(const InteractionGraph& train, const StatementStore& statements,
                                std::span<const EntityId> item_entity);

/// Normalized incidences per layer, reusable to hold the structure fixed.
struct HypergraphSet {
  std::vector<CsrMatrix> users;
  std::vector<CsrMatrix> items;
};

struct ForwardResult {
  std::vector<Var> user_layers;   // layer inputs E^(0..L)
  std::vector<Var> item_layers;
  std::vector<Var> user_local;    // LightGCN output per layer
  std::vector<Var> item_local;
  std::vector<Var> user_global;   // hypergraph output per layer
  std::vector<Var> item_global;
  Var user_final;                 // mean over user_layers
  Var item_final;
  HypergraphSet hypergraphs;      // structures actually used, per layer
  std::size_t isolated_items = 0;
};

/// Encoder -> L x (LightGCN, hypergraph build, hypergraph convolution, fusion)
/// -> mean pooling. When `fixed` is given its structures are used instead of
/// rebuilding them (gradient checks hold the discrete selection constant).
ForwardResult forward_pass(const TrainingData& data, const BoundParams& params,
                           const TrainingConfig& config, const HypergraphSet* fixed = nullptr);

struct BatchLoss {
  Var total;
  Var ranking;
  Var contrast_users;
  Var contrast_items;
};

/// Loss of one batch of triples on a finished forward pass. no_ssl drops the
/// contrastive term from `total` but still reports it.
BatchLoss batch_loss(const ForwardResult& forward, const BoundParams& params,
                     std::span<const TrainTriple> batch, const TrainingConfig& config);

struct EpochMetrics {
  double loss = 0.0;
  double ranking = 0.0;
  double contrast_users = 0.0;
  double contrast_items = 0.0;
  std::size_t batches = 0;
};

/// One pass over the shuffled training edges; one Adam step per batch.
/// Throws NumericError (with the offending batch) on a non-finite loss.
EpochMetrics train_epoch(const TrainingData& data, ModelState& state, const TrainingConfig& config);

/// Adam update with bias correction.
void adam_step(ModelState& state, std::span<const Tensor> grads, double learning_rate);

struct Representations {
  Tensor users;       // pooled
  Tensor items;
  Tensor last_users;  // final layer input E^(L)
  Tensor last_items;
};

/// Gradient-free forward pass.
Representations infer(const TrainingData& data, const ParamStore& params,
                      const TrainingConfig& config);

/// Checkpoint directory: manifest.txt (config, shape, counters, generator
/// state, tensor names) and tensors.bin (one tensor record per entry).
void save_checkpoint(const std::filesystem::path& dir, const ModelState& state,
                     const TrainingConfig& config);

struct LoadedCheckpoint {
  ModelState state;
  TrainingConfig config;
};
LoadedCheckpoint load_checkpoint(const std::filesystem::path& dir);

}  // namespace hyperrec
