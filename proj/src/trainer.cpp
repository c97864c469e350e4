// Copyright 2026 The hyperrec Authors
// SPDX-License-Identifier: Apache-2.0

#include "hyperrec/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "hyperrec/error.hpp"
#include "hyperrec/tensor_io.hpp"

namespace hyperrec {

namespace {

constexpr std::string_view kCheckpointFormat = "hyperrec-checkpoint-1";
constexpr std::uint64_t kTrainingStreamSalt = 0x9e3779b97f4a7c15ULL;

Tensor xavier(Rng& rng, std::size_t rows, std::size_t cols) {
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Tensor t = Tensor::matrix(rows, cols);
  for (double& v : t.data()) v = rng.uniform(-bound, bound);
  return t;
}

std::vector<std::size_t> unique_sorted(std::vector<std::size_t> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

std::vector<std::size_t> iota(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

// Sum of per-layer contrastive losses over the selected rows.
Var layered_infonce(Tape& tape, std::span<const Var> local, std::span<const Var> global,
                    const std::vector<std::size_t>& rows, const TrainingConfig& config) {
  const std::size_t min_rows = config.infonce_positive ? 1 : 2;
  if (rows.size() < min_rows) return tape.constant(Tensor::scalar(0.0));
  Var total;
  for (std::size_t l = 0; l < local.size(); ++l) {
    Var term = infonce(ad::gather_rows(local[l], rows), ad::gather_rows(global[l], rows),
                       config.tau, config.infonce_positive);
    total = total.valid() ? ad::add(total, term) : term;
  }
  return total.valid() ? total : tape.constant(Tensor::scalar(0.0));
}

std::string describe_batch(std::span<const TrainTriple> batch) {
  std::ostringstream os;
  os << "batch of " << batch.size() << " triples (user, positive, negative):";
  for (const auto& t : batch) {
    os << " (" << index(t.user) << "," << index(t.positive) << "," << index(t.negative) << ")";
  }
  return os.str();
}

}  // namespace

std::string param_names::hyper(std::size_t layer) { return "w_hyper_" + std::to_string(layer); }

void ParamStore::add(std::string name, Tensor value) {
  names_.push_back(std::move(name));
  tensors_.push_back(std::move(value));
}

Tensor& ParamStore::at(std::string_view name) {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return tensors_[i];
  }
  throw ContractError("no parameter named '" + std::string(name) + "'");
}

const Tensor& ParamStore::at(std::string_view name) const {
  return const_cast<ParamStore*>(this)->at(name);
}

ModelState init_params(const TrainingConfig& config, const ModelShape& shape, std::uint64_t seed) {
  config.validate();
  if (shape.dim != config.dim || shape.layers != config.layers) {
    throw ConfigError("model shape disagrees with the configuration");
  }
  const std::size_t d = shape.dim;
  Rng rng(seed);
  ModelState state;
  state.shape = shape;
  using namespace param_names;
  state.params.add(std::string(kUsers), xavier(rng, shape.users, d));
  state.params.add(std::string(kEntities), xavier(rng, shape.entities, d));
  state.params.add(std::string(kRelations), xavier(rng, shape.relations, d));
  state.params.add(std::string(kQuery), xavier(rng, d, d));
  state.params.add(std::string(kKey), xavier(rng, d, d));
  state.params.add(std::string(kValue), xavier(rng, d, d));
  state.params.add(std::string(kBiasKey), Tensor::matrix(kBiasClasses, d));
  state.params.add(std::string(kBiasValue), Tensor::matrix(kBiasClasses, d));
  state.params.add(std::string(kQualifier), xavier(rng, d, d));
  state.params.add(std::string(kForward), xavier(rng, d, d));
  for (std::size_t l = 0; l < shape.layers; ++l) state.params.add(hyper(l), xavier(rng, d, d));

  for (const Tensor& t : state.params.tensors()) {
    state.adam.first.emplace_back(t.shape(), 0.0);
    state.adam.second.emplace_back(t.shape(), 0.0);
  }
  state.rng = Rng(seed ^ kTrainingStreamSalt);
  return state;
}

BoundParams bind_vars(std::span<const std::string> names, std::span<const Var> vars) {
  if (names.size() != vars.size()) throw ContractError("bind_vars: name and variable counts differ");
  BoundParams b;
  b.all.assign(vars.begin(), vars.end());
  auto find = [&](std::string_view name) {
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (names[i] == name) return b.all[i];
    }
    throw ContractError("no parameter named '" + std::string(name) + "'");
  };
  using namespace param_names;
  b.users = find(kUsers);
  b.encoder = EncoderVars{find(kEntities), find(kRelations), find(kQuery),
                          find(kKey),      find(kValue),     find(kBiasKey),
                          find(kBiasValue), find(kQualifier), find(kForward)};
  for (std::size_t l = 0;; ++l) {
    const std::string name = hyper(l);
    if (std::find(names.begin(), names.end(), name) == names.end()) break;
    b.hyper.push_back(find(name));
  }
  return b;
}

BoundParams bind_params(Tape& tape, const ParamStore& params, bool trainable) {
  std::vector<Var> vars;
  for (const Tensor& t : params.tensors()) {
    vars.push_back(trainable ? tape.variable(t) : tape.constant(t));
  }
  return bind_vars(params.names(), vars);
}

TrainingData make_training_data(const InteractionGraph& train, const StatementStore& statements,
                                std::span<const EntityId> item_entity) {
  if (item_entity.size() != train.item_count()) {
    throw ConfigError("alignment covers " + std::to_string(item_entity.size()) + " items, graph has " +
                      std::to_string(train.item_count()));
  }
  TrainingData data;
  data.train = train;
  data.op = BipartiteOperator(train);
  data.statements = &statements;
  data.item_entity.assign(item_entity.begin(), item_entity.end());
  return data;
}

ForwardResult forward_pass(const TrainingData& data, const BoundParams& params,
                           const TrainingConfig& config, const HypergraphSet* fixed) {
  if (params.hyper.size() < config.layers) {
    throw ConfigError("model has " + std::to_string(params.hyper.size()) +
                      " hypergraph layers, configuration asks for " +
                      std::to_string(config.layers));
  }
  if (fixed && (fixed->users.size() < config.layers || fixed->items.size() < config.layers)) {
    throw ContractError("fixed hypergraph set is shorter than the layer count");
  }
  ForwardResult r;
  EncodedHeads encoded = encode_all_items(*data.statements, data.item_entity, params.encoder,
                                          config.encoder_options());
  r.isolated_items = static_cast<std::size_t>(
      std::count(encoded.isolated.begin(), encoded.isolated.end(), true));

  Var users = params.users;
  Var items = encoded.embeddings;
  r.user_layers.push_back(users);
  r.item_layers.push_back(items);
  const HypergraphOptions hg_options{config.k, config.include_self};

  for (std::size_t l = 0; l < config.layers; ++l) {
    LayerMessages local = lightgcn_layer(data.op, users, items);
    CsrMatrix hu, hv;
    if (fixed) {
      hu = fixed->users[l];
      hv = fixed->items[l];
    } else if (config.no_dh && l > 0) {
      hu = r.hypergraphs.users.front();
      hv = r.hypergraphs.items.front();
    } else {
      hu = normalize(build_hypergraph(local.users.value(), hg_options));
      hv = normalize(build_hypergraph(local.items.value(), hg_options));
    }
    Var psi_u = hyper_convolve(hu, local.users, params.hyper[l]);
    Var psi_v = hyper_convolve(hv, local.items, params.hyper[l]);
    r.hypergraphs.users.push_back(std::move(hu));
    r.hypergraphs.items.push_back(std::move(hv));

    r.user_local.push_back(local.users);
    r.item_local.push_back(local.items);
    r.user_global.push_back(psi_u);
    r.item_global.push_back(psi_v);
    users = fuse(local.users, psi_u);
    items = fuse(local.items, psi_v);
    r.user_layers.push_back(users);
    r.item_layers.push_back(items);
  }
  r.user_final = final_representation(r.user_layers);
  r.item_final = final_representation(r.item_layers);
  return r;
}

BatchLoss batch_loss(const ForwardResult& forward, const BoundParams& params,
                     std::span<const TrainTriple> batch, const TrainingConfig& config) {
  if (batch.empty()) throw ContractError("batch_loss: empty batch");
  Tape& tape = *params.users.tape();
  std::vector<std::size_t> users, positives, negatives;
  for (const auto& t : batch) {
    users.push_back(index(t.user));
    positives.push_back(index(t.positive));
    negatives.push_back(index(t.negative));
  }
  Var u = ad::gather_rows(forward.user_final, users);
  Var pos = row_scores(u, ad::gather_rows(forward.item_final, positives));
  Var neg = row_scores(u, ad::gather_rows(forward.item_final, negatives));

  BatchLoss out;
  out.ranking = margin_loss(pos, neg);

  std::vector<std::size_t> user_rows, item_rows;
  if (config.contrast_scope == ContrastScope::full) {
    user_rows = iota(forward.user_final.rows());
    item_rows = iota(forward.item_final.rows());
  } else {
    user_rows = unique_sorted(users);
    std::vector<std::size_t> items = positives;
    items.insert(items.end(), negatives.begin(), negatives.end());
    item_rows = unique_sorted(std::move(items));
  }
  out.contrast_users = layered_infonce(tape, forward.user_local, forward.user_global, user_rows, config);
  out.contrast_items = layered_infonce(tape, forward.item_local, forward.item_global, item_rows, config);

  Var reg;
  for (const Var& p : params.all) {
    Var sq = ad::sum_squares(p);
    reg = reg.valid() ? ad::add(reg, sq) : sq;
  }
  const LossWeights weights{config.no_ssl ? 0.0 : config.lambda1, config.lambda2, config.tau};
  out.total = total_loss(out.ranking, out.contrast_users, out.contrast_items, reg, weights);
  return out;
}

void adam_step(ModelState& state, std::span<const Tensor> grads, double learning_rate) {
  auto params = state.params.tensors();
  if (grads.size() != params.size()) throw ContractError("adam_step: gradient count mismatch");
  ++state.adam.step;
  const double t = static_cast<double>(state.adam.step);
  const double c1 = 1.0 - std::pow(kAdamBeta1, t);
  const double c2 = 1.0 - std::pow(kAdamBeta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto p = params[i].data();
    auto g = grads[i].data();
    auto m = state.adam.first[i].data();
    auto v = state.adam.second[i].data();
    for (std::size_t j = 0; j < p.size(); ++j) {
      m[j] = kAdamBeta1 * m[j] + (1.0 - kAdamBeta1) * g[j];
      v[j] = kAdamBeta2 * v[j] + (1.0 - kAdamBeta2) * g[j] * g[j];
      p[j] -= learning_rate * (m[j] / c1) / (std::sqrt(v[j] / c2) + kAdamEpsilon);
    }
  }
}

EpochMetrics train_epoch(const TrainingData& data, ModelState& state, const TrainingConfig& config) {
  if (data.train.edge_count() == 0) throw ContractError("train_epoch: no training edges");
  std::vector<Interaction> edges(data.train.edges().begin(), data.train.edges().end());
  state.rng.shuffle(std::span<Interaction>(edges));

  EpochMetrics metrics;
  std::vector<TrainTriple> batch;
  for (std::size_t start = 0; start < edges.size(); start += config.batch_size) {
    const std::size_t end = std::min(edges.size(), start + config.batch_size);
    batch.clear();
    for (std::size_t i = start; i < end; ++i) {
      batch.push_back({edges[i].user, edges[i].item, sample_negative(data.train, edges[i].user, state.rng)});
    }

    Tape tape;
    BoundParams params = bind_params(tape, state.params, true);
    ForwardResult fwd = forward_pass(data, params, config);
    BatchLoss loss = batch_loss(fwd, params, batch, config);
    const double value = loss.total.value().item();
    if (!std::isfinite(value)) {
      throw NumericError("non-finite loss at epoch " + std::to_string(state.epoch + 1) + ", " +
                         describe_batch(batch));
    }
    tape.backward(loss.total);
    std::vector<Tensor> grads;
    grads.reserve(params.all.size());
    for (const Var& p : params.all) grads.push_back(p.grad());
    adam_step(state, grads, config.learning_rate);

    metrics.loss += value;
    metrics.ranking += loss.ranking.value().item();
    metrics.contrast_users += loss.contrast_users.value().item();
    metrics.contrast_items += loss.contrast_items.value().item();
    ++metrics.batches;
  }
  ++state.epoch;
  return metrics;
}

Representations infer(const TrainingData& data, const ParamStore& params,
                      const TrainingConfig& config) {
  Tape tape;
  BoundParams bound = bind_params(tape, params, false);
  ForwardResult fwd = forward_pass(data, bound, config);
  return {fwd.user_final.value(), fwd.item_final.value(), fwd.user_layers.back().value(),
          fwd.item_layers.back().value()};
}

void save_checkpoint(const std::filesystem::path& dir, const ModelState& state,
                     const TrainingConfig& config) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "manifest.txt", std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write checkpoint manifest in " + dir.string());
    out << "format=" << kCheckpointFormat << '\n';
    out << "users=" << state.shape.users << '\n';
    out << "items=" << state.shape.items << '\n';
    out << "entities=" << state.shape.entities << '\n';
    out << "relations=" << state.shape.relations << '\n';
    out << "dim=" << state.shape.dim << '\n';
    out << "layers=" << state.shape.layers << '\n';
    out << "epoch=" << state.epoch << '\n';
    out << "adam_step=" << state.adam.step << '\n';
    out << "best_valid=" << format_double(state.best_valid) << '\n';
    out << "best_epoch=" << state.best_epoch << '\n';
    out << "stale_evals=" << state.stale_evals << '\n';
    out << "rng=" << state.rng.state() << '\n';
    for (const auto& name : state.params.names()) out << "tensor=" << name << '\n';
    for (const auto& [k, v] : config.entries()) out << "config." << k << '=' << v << '\n';
  }
  std::ofstream bin(dir / "tensors.bin", std::ios::binary | std::ios::trunc);
  if (!bin) throw IoError("cannot write checkpoint tensors in " + dir.string());
  for (const Tensor& t : state.params.tensors()) write_tensor(bin, t);
  for (const Tensor& t : state.adam.first) write_tensor(bin, t);
  for (const Tensor& t : state.adam.second) write_tensor(bin, t);
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.txt", std::ios::binary);
  if (!in) throw IoError("no checkpoint at " + dir.string());
  std::map<std::string, std::string> fields;
  std::vector<std::string> names;
  LoadedCheckpoint out;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("checkpoint manifest: malformed line '" + line + "'");
    std::string key = line.substr(0, eq), value = line.substr(eq + 1);
    if (key == "tensor") {
      names.push_back(value);
    } else if (key.rfind("config.", 0) == 0) {
      out.config.set(key.substr(7), value);
    } else {
      fields[key] = value;
    }
  }
  auto field = [&](const char* key) -> const std::string& {
    auto it = fields.find(key);
    if (it == fields.end()) throw ParseError(std::string("checkpoint manifest lacks '") + key + "'");
    return it->second;
  };
  auto number = [&](const char* key) { return static_cast<std::size_t>(std::stoull(field(key))); };
  if (field("format") != kCheckpointFormat) throw ParseError("unsupported checkpoint format");

  ModelState& s = out.state;
  s.shape = ModelShape{number("users"), number("items"), number("entities"), number("relations"),
                       number("dim"), number("layers")};
  s.epoch = number("epoch");
  s.adam.step = number("adam_step");
  s.best_valid = std::stod(field("best_valid"));
  s.best_epoch = number("best_epoch");
  s.stale_evals = number("stale_evals");
  s.rng.set_state(field("rng"));

  std::ifstream bin(dir / "tensors.bin", std::ios::binary);
  if (!bin) throw IoError("checkpoint tensors missing in " + dir.string());
  for (const auto& name : names) s.params.add(name, read_tensor(bin));
  for (std::size_t i = 0; i < names.size(); ++i) s.adam.first.push_back(read_tensor(bin));
  for (std::size_t i = 0; i < names.size(); ++i) s.adam.second.push_back(read_tensor(bin));
  return out;
}

}  // namespace hyperrec
