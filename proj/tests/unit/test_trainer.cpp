// Copyright 2026 The hyperrec Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "hyperrec/error.hpp"
#include "hyperrec/gradcheck.hpp"
#include "hyperrec/synthetic.hpp"
#include "hyperrec/trainer.hpp"
#include "support.hpp"

using namespace hyperrec;
using namespace hyperrec::testing;

namespace {

using Mat = std::vector<std::vector<double>>;

TrainingConfig toy_config() {
  TrainingConfig c;
  c.dim = 4;
  c.layers = 2;
  c.k = 2;
  c.batch_size = 4;
  c.lambda1 = 0.1;
  c.lambda2 = 1e-3;
  c.learning_rate = 1e-2;
  return c;
}

ModelShape toy_shape(const ToyCorpus& toy, const TrainingConfig& c) {
  return {toy.graph.user_count(), toy.graph.item_count(), toy.entities, toy.relations, c.dim, c.layers};
}

// In-memory synthetic corpus and its training inputs.
struct Synthetic {
  InteractionGraph graph;
  StatementStore statements;
  std::vector<EntityId> item_entity;
  Split split;
  TrainingData data;
  ModelShape shape;

  Synthetic(const GeneratorConfig& g, const TrainingConfig& c) {
    const SyntheticCorpus corpus = generate_corpus(g);
    graph = InteractionGraph(g.users, g.items, corpus.interactions);
    statements = StatementStore(corpus.statements);
    item_entity = corpus.item_entity;
    split = split_interactions(graph, c.seed);
    data = make_training_data(split.train, statements, item_entity);
    shape = {g.users, g.items, g.entities, g.relations, c.dim, c.layers};
  }
  Synthetic(const Synthetic&) = delete;
};

Mat dense_hyper_step(const CsrMatrix& normalized, const Tensor& z, const Tensor& w) {
  const Mat hn = to_nested(normalized.to_dense());
  Mat out = naive_matmul(naive_matmul(naive_matmul(hn, naive_transpose(hn)), to_nested(z)), to_nested(w));
  for (auto& row : out) {
    for (double& x : row) x = x > 0 ? x : 0.2 * x;
  }
  return out;
}

Mat plus(const Mat& a, const Mat& b) {
  Mat out = a;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < a[i].size(); ++j) out[i][j] += b[i][j];
  }
  return out;
}

Mat mean(const Mat& a, const Mat& b) {
  Mat out = plus(a, b);
  for (auto& row : out) {
    for (double& x : row) x /= 2.0;
  }
  return out;
}

std::vector<TrainTriple> toy_batch() {
  auto t = [](std::uint32_t u, std::uint32_t p, std::uint32_t n) { return TrainTriple{UserId{u}, ItemId{p}, ItemId{n}}; };
  return {t(0, 0, 2), t(1, 3, 0), t(2, 4, 1), t(3, 2, 3), t(0, 1, 4)};
}

std::vector<EpochMetrics> run_epochs(const TrainingData& data, ModelState& state, const TrainingConfig& c,
                                     std::size_t epochs) {
  std::vector<EpochMetrics> out;
  for (std::size_t e = 0; e < epochs; ++e) out.push_back(train_epoch(data, state, c));
  return out;
}

}  // namespace

TEST_SUITE("trainer") {

TEST_CASE("initialization is deterministic, bounded and zero-biased") {
  const ToyCorpus toy = toy_corpus();
  TrainingConfig c = toy_config();
  c.dim = 32;
  const ModelShape shape = toy_shape(toy, c);
  const ModelState a = init_params(c, shape, 42), b = init_params(c, shape, 42);
  CHECK(a == b);
  CHECK_FALSE(init_params(c, shape, 43).params == a.params);

  const auto names = a.params.names();
  const auto tensors = a.params.tensors();
  REQUIRE(names.size() == 10 + c.layers);
  for (std::size_t i = 0; i < names.size(); ++i) {
    const Tensor& t = tensors[i];
    if (names[i] == "bias_key" || names[i] == "bias_value") {
      CHECK(t == Tensor::matrix(kBiasClasses, c.dim));
      continue;
    }
    const double bound = std::sqrt(6.0 / static_cast<double>(t.rows() + t.cols()));
    if (t.rows() == 32 && t.cols() == 32) CHECK(bound == doctest::Approx(0.306).epsilon(1e-3));
    for (double x : t.data()) CHECK(std::abs(x) <= bound);
    INFO(names[i]);
    CHECK(*std::max_element(t.data().begin(), t.data().end()) > 0.5 * bound);
  }
  for (std::size_t i = 0; i < a.adam.first.size(); ++i) {
    CHECK(a.adam.first[i] == Tensor(tensors[i].shape(), 0.0));
    CHECK(a.adam.second[i] == Tensor(tensors[i].shape(), 0.0));
  }
  CHECK(a.adam.step == 0);
  CHECK(a.epoch == 0);
}

TEST_CASE("initialization rejects a mismatched shape") {
  const ToyCorpus toy = toy_corpus();
  const TrainingConfig c = toy_config();
  ModelShape shape = toy_shape(toy, c);
  shape.dim = 8;
  CHECK_THROWS_AS(init_params(c, shape, 1), ConfigError);
}

TEST_CASE("all-zero parameters give all-zero representations") {
  const ToyCorpus toy = toy_corpus();
  const TrainingConfig c = toy_config();
  ModelState s = init_params(c, toy_shape(toy, c), 1);
  for (Tensor& t : s.params.tensors()) t.fill(0.0);
  const TrainingData data = make_training_data(toy.graph, toy.statements, toy.item_entity);
  const Representations r = infer(data, s.params, c);
  CHECK(r.users == Tensor::matrix(4, c.dim));
  CHECK(r.items == Tensor::matrix(5, c.dim));
}

TEST_CASE("single-layer forward matches hand-chained modules") {
  const ToyCorpus toy = toy_corpus();
  TrainingConfig c = toy_config();
  c.layers = 1;
  const ModelState s = init_params(c, toy_shape(toy, c), 7);
  const TrainingData data = make_training_data(toy.graph, toy.statements, toy.item_entity);

  Tape tape;
  const BoundParams p = bind_params(tape, s.params, false);
  const ForwardResult fwd = forward_pass(data, p, c);

  // Layer 0: encoder output for items, raw embeddings for users.
  const Tensor items0 = encode_all_items(toy.statements, toy.item_entity, p.encoder, c.encoder_options()).embeddings.value();
  const Tensor& users0 = s.params.at("user_emb");
  CHECK(fwd.item_layers[0].value() == items0);
  CHECK(fwd.isolated_items == 1);

  // Dense LightGCN hop, users stacked over items.
  Mat stacked = to_nested(users0);
  for (auto& row : to_nested(items0)) stacked.push_back(row);
  const Mat prop = naive_matmul(dense_normalized_adjacency(toy.graph), stacked);
  const Mat zu(prop.begin(), prop.begin() + 4), zv(prop.begin() + 4, prop.end());
  CHECK(max_diff(fwd.user_local[0].value(), zu) < 1e-12);
  CHECK(max_diff(fwd.item_local[0].value(), zv) < 1e-12);

  // Hypergraph on the propagated embeddings, dense convolution, fusion, pooling.
  const Tensor& w = s.params.at("w_hyper_0");
  const Tensor zu_t = fwd.user_local[0].value(), zv_t = fwd.item_local[0].value();
  const Mat psi_u = dense_hyper_step(normalize(build_hypergraph(zu_t, c.k)), zu_t, w);
  const Mat psi_v = dense_hyper_step(normalize(build_hypergraph(zv_t, c.k)), zv_t, w);
  CHECK(max_diff(fwd.user_global[0].value(), psi_u) < 1e-12);
  CHECK(max_diff(fwd.item_global[0].value(), psi_v) < 1e-12);
  CHECK(max_diff(fwd.user_final.value(), mean(to_nested(users0), plus(zu, psi_u))) < 1e-12);
  CHECK(max_diff(fwd.item_final.value(), mean(to_nested(items0), plus(zv, psi_v))) < 1e-12);
}

TEST_CASE("ablation flags touch only their own component") {
  const ToyCorpus toy = toy_corpus();
  const TrainingConfig full = toy_config();
  const ModelState s = init_params(full, toy_shape(toy, full), 3);
  const TrainingData data = make_training_data(toy.graph, toy.statements, toy.item_entity);
  const Representations base = infer(data, s.params, full);

  SUBCASE("no_ssl leaves the forward pass unchanged") {
    TrainingConfig c = full;
    c.no_ssl = true;
    const Representations r = infer(data, s.params, c);
    CHECK(r.users == base.users);
    CHECK(r.items == base.items);
  }
  SUBCASE("no_dh reuses the first hypergraph and is a no-op at one layer") {
    TrainingConfig c = full;
    c.no_dh = true;
    Tape tape;
    const ForwardResult fwd = forward_pass(data, bind_params(tape, s.params, false), c);
    for (std::size_t l = 1; l < c.layers; ++l) {
      CHECK(fwd.hypergraphs.users[l] == fwd.hypergraphs.users[0]);
      CHECK(fwd.hypergraphs.items[l] == fwd.hypergraphs.items[0]);
    }
    TrainingConfig one = full;
    one.layers = 1;
    const ModelState s1 = init_params(one, toy_shape(toy, one), 3);
    TrainingConfig one_dh = one;
    one_dh.no_dh = true;
    CHECK(infer(data, s1.params, one).users == infer(data, s1.params, one_dh).users);
  }
  SUBCASE("no_sa ignores every attention parameter") {
    TrainingConfig c = full;
    c.no_sa = true;
    const Representations r = infer(data, s.params, c);
    CHECK_FALSE(r.items == base.items);
    ParamStore perturbed = s.params;
    for (const char* name : {"w_query", "w_key", "w_value", "bias_key", "bias_value"}) {
      for (double& x : perturbed.at(name).data()) x += 0.37;
    }
    CHECK(infer(data, perturbed, c).items == r.items);
    CHECK_FALSE(infer(data, perturbed, full).items == base.items);
  }
}

TEST_CASE("no_ssl still reports the contrastive loss but drops it from the total") {
  const ToyCorpus toy = toy_corpus();
  TrainingConfig c = toy_config();
  const ModelState s = init_params(c, toy_shape(toy, c), 5);
  const TrainingData data = make_training_data(toy.graph, toy.statements, toy.item_entity);
  const auto batch = toy_batch();
  auto losses = [&](const TrainingConfig& cfg) {
    Tape tape;
    const BoundParams p = bind_params(tape, s.params, false);
    const BatchLoss l = batch_loss(forward_pass(data, p, cfg), p, batch, cfg);
    return std::array<double, 4>{l.total.value().item(), l.ranking.value().item(),
                                 l.contrast_users.value().item(), l.contrast_items.value().item()};
  };
  const auto full = losses(c);
  c.no_ssl = true;
  const auto ablated = losses(c);
  CHECK(ablated[1] == full[1]);
  CHECK(ablated[2] == full[2]);
  CHECK(ablated[3] == full[3]);
  CHECK(full[0] - ablated[0] == doctest::Approx(0.1 * (full[2] + full[3])));
}

TEST_CASE("contrastive rows follow the configured scope") {
  const ToyCorpus toy = toy_corpus();
  TrainingConfig c = toy_config();
  c.layers = 1;
  const ModelState s = init_params(c, toy_shape(toy, c), 9);
  const TrainingData data = make_training_data(toy.graph, toy.statements, toy.item_entity);
  const std::vector<TrainTriple> batch{{UserId{0}, ItemId{0}, ItemId{2}}, {UserId{2}, ItemId{0}, ItemId{1}}};
  Tape tape;
  const BoundParams p = bind_params(tape, s.params, false);
  const ForwardResult fwd = forward_pass(data, p, c);
  const BatchLoss in_batch = batch_loss(fwd, p, batch, c);
  const std::size_t users[] = {0, 2}, items[] = {0, 1, 2};
  auto expected = [&](const Var& local, const Var& global, std::span<const std::size_t> rows) {
    return infonce(ad::gather_rows(local, rows), ad::gather_rows(global, rows), c.tau).value().item();
  };
  CHECK(in_batch.contrast_users.value().item() == expected(fwd.user_local[0], fwd.user_global[0], users));
  CHECK(in_batch.contrast_items.value().item() == expected(fwd.item_local[0], fwd.item_global[0], items));
  c.contrast_scope = ContrastScope::full;
  const BatchLoss full = batch_loss(fwd, p, batch, c);
  CHECK(full.contrast_users.value().item() ==
        infonce(fwd.user_local[0], fwd.user_global[0], c.tau).value().item());
}

TEST_CASE("full-pipeline gradients agree with finite differences") {
  const ToyCorpus toy = toy_corpus();
  const TrainingData data = make_training_data(toy.graph, toy.statements, toy.item_entity);
  for (bool no_sa : {false, true}) {
    TrainingConfig c = toy_config();
    c.no_sa = no_sa;
    const ModelState s = init_params(c, toy_shape(toy, c), 11);
    HypergraphSet fixed;
    {
      Tape tape;
      fixed = forward_pass(data, bind_params(tape, s.params, false), c).hypergraphs;
    }
    const auto names = s.params.names();
    const std::vector<std::string> name_list(names.begin(), names.end());
    const auto batch = toy_batch();
    auto f = [&](Tape&, std::span<const Var> vars) {
      const BoundParams p = bind_vars(name_list, vars);
      return batch_loss(forward_pass(data, p, c, &fixed), p, batch, c).total;
    };
    const std::vector<Tensor> inputs(s.params.tensors().begin(), s.params.tensors().end());
    const GradCheckReport r = gradient_check(f, inputs);
    INFO(r.message);
    CHECK(r.passed(1e-4));
  }
}

TEST_CASE("zero learning rate leaves parameters unchanged") {
  const ToyCorpus toy = toy_corpus();
  TrainingConfig c = toy_config();
  c.learning_rate = 0.0;
  c.lambda1 = 0.0;
  c.lambda2 = 0.0;
  ModelState s = init_params(c, toy_shape(toy, c), 13);
  const ParamStore before = s.params;
  const TrainingData data = make_training_data(toy.graph, toy.statements, toy.item_entity);
  const EpochMetrics m = train_epoch(data, s, c);
  CHECK(s.params == before);
  CHECK(m.batches == 3);
  CHECK(s.adam.step == 3);
}

TEST_CASE("adam update matches the bias-corrected closed form") {
  ModelState s;
  s.params.add("w", Tensor::row_vector({1.0, -2.0}));
  s.adam.first.push_back(Tensor::row_vector({0.0, 0.0}));
  s.adam.second.push_back(Tensor::row_vector({0.0, 0.0}));
  const Tensor g = Tensor::row_vector({0.5, -4.0});
  adam_step(s, std::span(&g, 1), 0.1);
  // First step: m_hat = g, v_hat = g^2, update = lr * sign(g) (up to epsilon).
  CHECK(s.params.at("w")(0, 0) == doctest::Approx(0.9).epsilon(1e-7));
  CHECK(s.params.at("w")(0, 1) == doctest::Approx(-1.9).epsilon(1e-7));
  const double after_first = s.params.at("w")(0, 0);
  adam_step(s, std::span(&g, 1), 0.1);
  const double m = 0.9 * 0.05 + 0.1 * 0.5, v = 0.999 * 0.00025 + 0.001 * 0.25;
  const double step = 0.1 * (m / (1 - 0.81)) / (std::sqrt(v / (1 - 0.999 * 0.999)) + 1e-8);
  CHECK(s.params.at("w")(0, 0) == doctest::Approx(after_first - step).epsilon(1e-12));
}

TEST_CASE("training is deterministic per seed") {
  const ToyCorpus toy = toy_corpus();
  const TrainingConfig c = toy_config();
  const TrainingData data = make_training_data(toy.graph, toy.statements, toy.item_entity);
  ModelState a = init_params(c, toy_shape(toy, c), 17), b = init_params(c, toy_shape(toy, c), 17);
  const auto la = run_epochs(data, a, c, 5), lb = run_epochs(data, b, c, 5);
  for (std::size_t e = 0; e < 5; ++e) {
    CHECK(la[e].loss == lb[e].loss);
    CHECK(la[e].ranking == lb[e].ranking);
  }
  CHECK(a == b);
}

TEST_CASE("ranking loss falls over the first epochs on a small synthetic corpus") {
  TrainingConfig c;
  c.dim = 16;
  c.k = 4;
  c.batch_size = 64;
  c.learning_rate = 5e-3;
  GeneratorConfig g;
  std::vector<std::vector<double>> curves;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    g.seed = seed;
    c.seed = seed;
    const Synthetic syn(g, c);
    ModelState s = init_params(c, syn.shape, seed);
    std::vector<double> curve;
    for (const auto& m : run_epochs(syn.data, s, c, 10)) curve.push_back(m.ranking / static_cast<double>(m.batches));
    curves.push_back(curve);
  }
  std::vector<double> median;
  for (std::size_t e = 0; e < 10; ++e) {
    std::vector<double> at;
    for (const auto& curve : curves) at.push_back(curve[e]);
    std::sort(at.begin(), at.end());
    median.push_back(at[2]);
  }
  for (std::size_t e = 1; e < 10; ++e) {
    INFO("epoch " << e << ": " << median[e - 1] << " -> " << median[e]);
    CHECK(median[e] < median[e - 1]);
  }
}

TEST_CASE("checkpoints round-trip byte for byte") {
  const ToyCorpus toy = toy_corpus();
  TrainingConfig c = toy_config();
  c.phi = QualifierMode::rotate;
  c.tau = 0.1 + 0.2;  // not exactly representable in short decimal
  const TrainingData data = make_training_data(toy.graph, toy.statements, toy.item_entity);
  ModelState s = init_params(c, toy_shape(toy, c), 19);
  run_epochs(data, s, c, 2);
  s.best_valid = 1.0 / 3.0;
  s.best_epoch = 1;
  s.stale_evals = 1;

  const auto dir = scratch_dir("checkpoint");
  save_checkpoint(dir / "a", s, c);
  const LoadedCheckpoint loaded = load_checkpoint(dir / "a");
  CHECK(loaded.state == s);
  CHECK(loaded.config == c);
  save_checkpoint(dir / "b", loaded.state, loaded.config);
  CHECK(slurp(dir / "a" / "manifest.txt") == slurp(dir / "b" / "manifest.txt"));
  CHECK(slurp(dir / "a" / "tensors.bin") == slurp(dir / "b" / "tensors.bin"));
  CHECK_THROWS_AS(load_checkpoint(dir / "missing"), IoError);
}

TEST_CASE("resuming from a checkpoint continues the identical trajectory") {
  const ToyCorpus toy = toy_corpus();
  const TrainingConfig c = toy_config();
  const TrainingData data = make_training_data(toy.graph, toy.statements, toy.item_entity);
  ModelState straight = init_params(c, toy_shape(toy, c), 23);
  const auto all = run_epochs(data, straight, c, 6);

  ModelState first = init_params(c, toy_shape(toy, c), 23);
  run_epochs(data, first, c, 3);
  const auto dir = scratch_dir("resume_state");
  save_checkpoint(dir, first, c);
  ModelState resumed = load_checkpoint(dir).state;
  const auto rest = run_epochs(data, resumed, c, 3);
  for (std::size_t e = 0; e < 3; ++e) {
    CHECK(rest[e].loss == all[3 + e].loss);
    CHECK(rest[e].ranking == all[3 + e].ranking);
  }
  CHECK(resumed.params == straight.params);
}

TEST_CASE("no_ssl and full diverge only after the first update") {
  const ToyCorpus toy = toy_corpus();
  TrainingConfig full = toy_config();
  full.batch_size = 1024;  // one step per epoch
  TrainingConfig ablated = full;
  ablated.no_ssl = true;
  const TrainingData data = make_training_data(toy.graph, toy.statements, toy.item_entity);
  ModelState a = init_params(full, toy_shape(toy, full), 29), b = init_params(ablated, toy_shape(toy, ablated), 29);
  CHECK(a.params == b.params);
  const EpochMetrics a1 = train_epoch(data, a, full), b1 = train_epoch(data, b, ablated);
  CHECK(a1.ranking == b1.ranking);
  CHECK(a1.contrast_users == b1.contrast_users);
  CHECK(a1.loss != b1.loss);
  CHECK_FALSE(a.params == b.params);
  const EpochMetrics a2 = train_epoch(data, a, full), b2 = train_epoch(data, b, ablated);
  CHECK(a2.ranking != b2.ranking);
}

TEST_CASE("training failures are reported") {
  const ToyCorpus toy = toy_corpus();
  const TrainingConfig c = toy_config();
  ModelState s = init_params(c, toy_shape(toy, c), 31);
  const TrainingData empty = make_training_data(InteractionGraph(4, 5, {}), toy.statements, toy.item_entity);
  CHECK_THROWS_AS(train_epoch(empty, s, c), ContractError);

  const TrainingData data = make_training_data(toy.graph, toy.statements, toy.item_entity);
  s.params.at("user_emb")(0, 0) = std::nan("");
  try {
    train_epoch(data, s, c);
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("triples") != std::string::npos);
  }
  CHECK_THROWS_AS(make_training_data(toy.graph, toy.statements, std::vector<EntityId>(3)), ConfigError);
}

}  // TEST_SUITE
