// Copyright 2026 The hyperrec Authors
// SPDX-License-Identifier: Apache-2.0

#include "hyperrec/experiments.hpp"

#include <fstream>
#include <map>
#include <ostream>
#include <type_traits>
#include <sstream>

#include "hyperrec/error.hpp"

namespace hyperrec {

namespace {

namespace fs = std::filesystem;

constexpr const char* kManifest = "manifest.txt";
constexpr const char* kBestDir = "checkpoint";
constexpr const char* kLastDir = "last";
constexpr const char* kHistory = "history.tsv";
constexpr const char* kMetrics = "metrics.tsv";
constexpr const char* kGroups = "groups.tsv";

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

std::string history_header(std::size_t k) {
  const std::string ks = std::to_string(k);
  return "epoch\tL\tL_m\tL_c_u\tL_c_v\trecall@" + ks + "\tndcg@" + ks;
}

std::string history_line(const HistoryRow& row) {
  const double n = row.loss.batches ? static_cast<double>(row.loss.batches) : 1.0;
  std::ostringstream os;
  os << row.epoch << '\t' << format_double(row.loss.loss / n) << '\t'
     << format_double(row.loss.ranking / n) << '\t' << format_double(row.loss.contrast_users / n)
     << '\t' << format_double(row.loss.contrast_items / n) << '\t'
     << (row.recall ? format_double(*row.recall) : "NA") << '\t'
     << (row.ndcg ? format_double(*row.ndcg) : "NA");
  return os.str();
}

struct Manifest {
  std::map<std::string, std::string> fields;
  TrainingConfig config;

  const std::string& at(const std::string& key) const {
    auto it = fields.find(key);
    if (it == fields.end()) throw ParseError("run manifest lacks '" + key + "'");
    return it->second;
  }
};

void write_manifest(const fs::path& dir, const fs::path& dataset_dir, const Dataset& ds,
                    const TrainingConfig& config) {
  auto out = open_out(dir / kManifest);
  out << "version=" << kArtifactVersion << '\n';
  out << "dataset=" << fs::absolute(dataset_dir).lexically_normal().string() << '\n';
  out << "interactions_hash=" << ds.interactions_hash << '\n';
  out << "statements_hash=" << ds.statements_hash << '\n';
  out << "alignment_hash=" << ds.alignment_hash << '\n';
  out << "seed=" << config.seed << '\n';
  out << "users=" << ds.user_count() << '\n';
  out << "items=" << ds.item_count() << '\n';
  out << "entities=" << ds.entity_count() << '\n';
  out << "relations=" << ds.relation_count() << '\n';
  out << "files=" << kBestDir << "/," << kLastDir << "/," << kHistory << ',' << kMetrics << ','
      << kGroups << ",users.map,items.map,entities.map,relations.map\n";
  for (const auto& [k, v] : config.entries()) out << "config." << k << '=' << v << '\n';
}

Manifest read_manifest(const fs::path& dir) {
  std::ifstream in(dir / kManifest);
  if (!in) throw IoError("no run manifest at " + (dir / kManifest).string());
  Manifest m;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("run manifest: malformed line '" + line + "'");
    const std::string key = line.substr(0, eq);
    if (key.rfind("config.", 0) == 0) m.config.set(key.substr(7), line.substr(eq + 1));
    else m.fields[key] = line.substr(eq + 1);
  }
  return m;
}

void write_id_maps(const fs::path& dir, const Dataset& ds) {
  auto users = open_out(dir / "users.map");
  ds.users.write(users);
  auto items = open_out(dir / "items.map");
  ds.items.write(items);
  auto entities = open_out(dir / "entities.map");
  ds.entities.write(entities);
  auto relations = open_out(dir / "relations.map");
  ds.relations.write(relations);
}

void write_eval_files(const fs::path& dir, const EvalMetrics& m) {
  auto metrics = open_out(dir / kMetrics);
  write_metrics_tsv(metrics, m);
  auto groups = open_out(dir / kGroups);
  write_groups_tsv(groups, m.groups);
}

// Existing history lines of a resumed run, up to and including `epoch`.
std::vector<std::string> kept_history(const fs::path& path, std::size_t epoch) {
  std::vector<std::string> lines;
  std::ifstream in(path);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (header) {
      header = false;
      continue;
    }
    if (line.empty()) continue;
    if (std::stoull(line.substr(0, line.find('\t'))) <= epoch) lines.push_back(line);
  }
  return lines;
}

}  // namespace

ModelShape PreparedData::shape(const TrainingConfig& config) const {
  return ModelShape{dataset.user_count(), dataset.item_count(), dataset.entity_count(),
                    dataset.relation_count(), config.dim, config.layers};
}

std::unique_ptr<PreparedData> prepare_data(Dataset dataset, const TrainingConfig& config) {
  config.validate();
  auto p = std::make_unique<PreparedData>();
  p->dataset = std::move(dataset);
  p->split = split_interactions(p->dataset.interactions, config.seed, config.valid_fraction,
                                config.test_fraction);
  p->data = make_training_data(p->split.train, p->dataset.statements, p->dataset.item_entity);
  return p;
}

std::unique_ptr<PreparedData> prepare_data(const fs::path& dataset_dir,
                                           const TrainingConfig& config) {
  return prepare_data(load_dataset(dataset_dir), config);
}

ModelState fresh_state(const PreparedData& prepared, const TrainingConfig& config) {
  return init_params(config, prepared.shape(config), config.seed);
}

EvalMetrics evaluate_model(const PreparedData& prepared, const ParamStore& params,
                           const TrainingConfig& config, Holdout target) {
  const Representations reps = infer(prepared.data, params, config);
  const InteractionGraph* graph = &prepared.split.test;
  const InteractionGraph* mask = &prepared.split.train;
  if (target == Holdout::valid) graph = &prepared.split.valid;
  if (target == Holdout::train) {
    graph = &prepared.split.train;
    mask = nullptr;
  }
  const bool last = config.mad_source == MadSource::last_layer;
  EvalRequest req;
  req.users = &reps.users;
  req.items = &reps.items;
  req.mad_users = last ? &reps.last_users : &reps.users;
  req.mad_items = last ? &reps.last_items : &reps.items;
  req.train = &prepared.split.train;
  req.target = graph;
  req.mask = mask;
  req.k = config.top_k;
  req.groups = config.groups;
  return evaluate(req);
}

TrainOutcome train_model(const PreparedData& prepared, const TrainingConfig& config,
                         ModelState state, const EpochHook& hook) {
  config.validate();
  TrainOutcome out;
  out.best = state;
  while (state.epoch < config.epochs) {
    if (config.patience > 0 && state.stale_evals >= config.patience) {
      out.stopped_early = true;
      break;
    }
    HistoryRow row;
    row.loss = train_epoch(prepared.data, state, config);
    row.epoch = state.epoch;
    bool stop = false;
    if (state.epoch % config.eval_every == 0) {
      const EvalMetrics valid = evaluate_model(prepared, state.params, config, Holdout::valid);
      row.recall = valid.recall;
      row.ndcg = valid.ndcg;
      if (valid.recall > state.best_valid) {
        state.best_valid = valid.recall;
        state.best_epoch = state.epoch;
        state.stale_evals = 0;
        out.best = state;
      } else {
        ++state.stale_evals;
        stop = config.patience > 0 && state.stale_evals >= config.patience;
      }
    }
    out.history.push_back(row);
    if (hook) hook(state, row);
    if (stop) {
      out.stopped_early = true;
      break;
    }
  }
  out.last = std::move(state);
  return out;
}

void write_history_tsv(std::ostream& out, std::span<const HistoryRow> rows, std::size_t k) {
  out << history_header(k) << '\n';
  for (const auto& r : rows) out << history_line(r) << '\n';
}

EvalMetrics run_training(const TrainRequest& req) {
  const TrainingConfig& config = req.config;
  config.validate();
  auto prepared = prepare_data(req.dataset_dir, config);
  fs::create_directories(req.out_dir);

  ModelState state;
  std::vector<std::string> history;
  const bool resuming = req.resume && fs::exists(req.out_dir / kLastDir / "manifest.txt");
  if (resuming) {
    LoadedCheckpoint loaded = load_checkpoint(req.out_dir / kLastDir);
    TrainingConfig saved = loaded.config;
    saved.epochs = config.epochs;
    if (!(saved == config)) {
      throw ConfigError("resume: configuration differs from the interrupted run (only epochs may change)");
    }
    if (loaded.state.shape != prepared->shape(config)) {
      throw ConfigError("resume: dataset shape differs from the interrupted run");
    }
    state = std::move(loaded.state);
    history = kept_history(req.out_dir / kHistory, state.epoch);
  } else {
    fs::remove_all(req.out_dir / kBestDir);
    fs::remove_all(req.out_dir / kLastDir);
    state = fresh_state(*prepared, config);
    save_checkpoint(req.out_dir / kBestDir, state, config);
    save_checkpoint(req.out_dir / kLastDir, state, config);
  }
  write_manifest(req.out_dir, req.dataset_dir, prepared->dataset, config);
  write_id_maps(req.out_dir, prepared->dataset);

  auto flush_history = [&] {
    auto out = open_out(req.out_dir / kHistory);
    out << history_header(config.top_k) << '\n';
    for (const auto& line : history) out << line << '\n';
  };
  flush_history();

  train_model(*prepared, config, std::move(state), [&](const ModelState& s, const HistoryRow& row) {
    if (row.recall && s.best_epoch == s.epoch) save_checkpoint(req.out_dir / kBestDir, s, config);
    save_checkpoint(req.out_dir / kLastDir, s, config);
    history.push_back(history_line(row));
    flush_history();
  });

  const LoadedCheckpoint best = load_checkpoint(req.out_dir / kBestDir);
  const EvalMetrics metrics = evaluate_model(*prepared, best.state.params, config, Holdout::test);
  write_eval_files(req.out_dir, metrics);
  return metrics;
}

EvalMetrics run_evaluation(const fs::path& run_dir, const std::optional<fs::path>& out_dir) {
  if (!fs::exists(run_dir / kBestDir / "manifest.txt")) {
    throw IoError("no checkpoint in " + run_dir.string());
  }
  const Manifest manifest = read_manifest(run_dir);
  const LoadedCheckpoint best = load_checkpoint(run_dir / kBestDir);
  const TrainingConfig& config = best.config;
  Dataset ds = load_dataset(manifest.at("dataset"));
  if (ds.interactions_hash != manifest.at("interactions_hash") ||
      ds.statements_hash != manifest.at("statements_hash") ||
      ds.alignment_hash != manifest.at("alignment_hash")) {
    throw ConfigError("dataset at " + manifest.at("dataset") + " changed since training");
  }
  auto prepared = prepare_data(std::move(ds), config);
  if (best.state.shape != prepared->shape(config)) {
    throw ConfigError("checkpoint shape does not match the dataset");
  }
  const EvalMetrics metrics = evaluate_model(*prepared, best.state.params, config, Holdout::test);
  const fs::path target = out_dir.value_or(run_dir);
  fs::create_directories(target);
  write_eval_files(target, metrics);
  return metrics;
}

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::full: return "full";
    case Variant::no_sa: return "-SA";
    case Variant::no_dh: return "-DH";
    case Variant::no_ssl: return "-SSL";
  }
  return "?";
}

Variant parse_variant_name(std::string_view text) {
  if (text == "full") return Variant::full;
  if (text == "sa" || text == "-SA" || text == "no_sa") return Variant::no_sa;
  if (text == "dh" || text == "-DH" || text == "no_dh") return Variant::no_dh;
  if (text == "ssl" || text == "-SSL" || text == "no_ssl") return Variant::no_ssl;
  throw ConfigError("unknown ablation '" + std::string(text) + "' (expected sa, dh or ssl)");
}

TrainingConfig apply_variant(TrainingConfig config, Variant v) {
  config.no_sa = v == Variant::no_sa;
  config.no_dh = v == Variant::no_dh;
  config.no_ssl = v == Variant::no_ssl;
  return config;
}

VariantSummary summarize(Variant v, std::vector<EvalMetrics> per_seed) {
  VariantSummary s;
  s.variant = v;
  s.per_seed = std::move(per_seed);
  if (s.per_seed.empty()) return s;
  for (const auto& m : s.per_seed) {
    s.recall += m.recall;
    s.ndcg += m.ndcg;
    s.mad_users += m.mad_users;
    s.mad_items += m.mad_items;
    if (!m.groups.empty()) s.sparsest_recall += m.groups.front().recall;
  }
  const double n = static_cast<double>(s.per_seed.size());
  s.recall /= n;
  s.ndcg /= n;
  s.mad_users /= n;
  s.mad_items /= n;
  s.sparsest_recall /= n;
  return s;
}

std::vector<VariantSummary> run_ablation(const AblationRequest& req) {
  if (req.seeds == 0) throw ConfigError("ablate: at least one seed is required");
  if (req.variants.empty()) throw ConfigError("ablate: no variants selected");
  req.config.validate();
  const Dataset dataset = load_dataset(req.dataset_dir);
  std::vector<std::vector<EvalMetrics>> results(req.variants.size());
  for (std::size_t s = 0; s < req.seeds; ++s) {
    TrainingConfig base = req.config;
    base.seed = req.config.seed + s;
    auto prepared = prepare_data(dataset, base);
    for (std::size_t i = 0; i < req.variants.size(); ++i) {
      const TrainingConfig config = apply_variant(base, req.variants[i]);
      TrainOutcome outcome = train_model(*prepared, config, fresh_state(*prepared, config));
      EvalMetrics m = evaluate_model(*prepared, outcome.best.params, config, Holdout::test);
      const fs::path dir =
          req.out_dir / std::string(to_string(req.variants[i])) / ("seed_" + std::to_string(base.seed));
      fs::create_directories(dir);
      auto history = open_out(dir / kHistory);
      history << history_header(config.top_k) << '\n';
      for (const auto& r : outcome.history) history << history_line(r) << '\n';
      write_eval_files(dir, m);
      results[i].push_back(std::move(m));
    }
  }

  std::vector<VariantSummary> summaries;
  for (std::size_t i = 0; i < req.variants.size(); ++i) {
    summaries.push_back(summarize(req.variants[i], std::move(results[i])));
  }
  fs::create_directories(req.out_dir);
  auto table = open_out(req.out_dir / "table.tsv");
  table << "variant\tseeds\trecall@" << req.config.top_k << "\tndcg@" << req.config.top_k << '\n';
  auto mad_out = open_out(req.out_dir / "mad.tsv");
  mad_out << "variant\tmad_users\tmad_items\n";
  auto groups = open_out(req.out_dir / kGroups);
  groups << "variant\tgroup\trecall\n";
  for (const auto& s : summaries) {
    table << to_string(s.variant) << '\t' << s.per_seed.size() << '\t' << format_double(s.recall)
          << '\t' << format_double(s.ndcg) << '\n';
    mad_out << to_string(s.variant) << '\t' << format_double(s.mad_users) << '\t'
            << format_double(s.mad_items) << '\n';
    for (std::size_t g = 0; g < req.config.groups; ++g) {
      double sum = 0.0;
      for (const auto& m : s.per_seed) sum += m.groups.at(g).recall;
      groups << to_string(s.variant) << '\t' << g << '\t'
             << format_double(sum / static_cast<double>(s.per_seed.size())) << '\n';
    }
  }
  return summaries;
}

std::vector<std::string> grid_values(std::string_view param) {
  std::vector<std::string> out;
  auto add = [&](const auto& grid) {
    for (auto v : grid) {
      if constexpr (std::is_floating_point_v<decltype(v)>) out.push_back(format_double(v));
      else out.push_back(std::to_string(v));
    }
  };
  if (param == "tau") add(grids::kTau);
  else if (param == "layers") add(grids::kLayers);
  else if (param == "lambda1") add(grids::kLambda1);
  else if (param == "lambda2") add(grids::kLambda2);
  else if (param == "lr") add(grids::kLearningRate);
  else throw ConfigError("no search grid for '" + std::string(param) + "'");
  return out;
}

std::vector<SweepResult> run_sweep(const SweepRequest& req) {
  if (req.points.empty()) throw ConfigError("sweep: no points to run");
  std::vector<SweepResult> results;
  for (const auto& point : req.points) {
    TrainRequest run;
    run.dataset_dir = req.dataset_dir;
    run.out_dir = req.out_dir / (point.param + "=" + point.value);
    run.config = req.config;
    run.config.set(point.param, point.value);
    results.push_back({point, run_training(run)});
  }
  fs::create_directories(req.out_dir);
  auto out = open_out(req.out_dir / "sensitivity.tsv");
  out << "param\tvalue\trecall@" << req.config.top_k << "\tndcg@" << req.config.top_k << '\n';
  for (const auto& r : results) {
    out << r.point.param << '\t' << r.point.value << '\t' << format_double(r.metrics.recall) << '\t'
        << format_double(r.metrics.ndcg) << '\n';
  }
  return results;
}

}  // namespace hyperrec
