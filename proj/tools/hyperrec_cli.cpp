// Copyright 2026 The hyperrec Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end. Talks to the engine only through the C interface.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hyperrec/hyperrec.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitInput = 2;

// Input problems (paths, files, keys, arguments) exit 2; everything else 1.
int exit_code(hyperrec_status s) {
  switch (s) {
    case HYPERREC_OK: return kExitOk;
    case HYPERREC_ERR_ARGUMENT:
    case HYPERREC_ERR_IO:
    case HYPERREC_ERR_PARSE:
    case HYPERREC_ERR_CONFIG: return kExitInput;
    default: return kExitRuntime;
  }
}

struct Failure {
  hyperrec_status status;
};

void check(hyperrec_status s) {
  if (s != HYPERREC_OK) throw Failure{s};
}

struct ConfigDeleter {
  void operator()(hyperrec_config* c) const { hyperrec_config_destroy(c); }
};
struct GeneratorDeleter {
  void operator()(hyperrec_generator* g) const { hyperrec_generator_destroy(g); }
};
struct MetricsDeleter {
  void operator()(hyperrec_metrics* m) const { hyperrec_metrics_destroy(m); }
};
struct TableDeleter {
  void operator()(hyperrec_table* t) const { hyperrec_table_destroy(t); }
};
using ConfigPtr = std::unique_ptr<hyperrec_config, ConfigDeleter>;
using MetricsPtr = std::unique_ptr<hyperrec_metrics, MetricsDeleter>;
using TablePtr = std::unique_ptr<hyperrec_table, TableDeleter>;

// Flags shared by the training-type subcommands. Values stay text so the
// engine does the parsing and reports bad values by key.
struct Options {
  std::string config;
  std::string data;
  std::string out;
  std::string run;
  std::optional<std::string> seed;
  std::map<std::string, std::string> overrides;  // config key -> flag text
  std::vector<std::string> ablations;
  std::string over = "tau,layers";
  std::size_t seeds = 10;
  bool resume = false;
};

void add_overrides(CLI::App* cmd, Options& o) {
  static const std::pair<const char*, const char*> flags[] = {
      {"tau", "contrastive temperature"},  {"layers", "propagation layers"},
      {"k", "hyperedge size"},            {"lambda1", "contrastive weight"},
      {"lambda2", "L2 weight"},           {"lr", "learning rate"},
      {"epochs", "training epochs"},      {"dim", "embedding width"},
      {"batch-size", "batch size"},
  };
  for (const auto& [name, help] : flags) {
    std::string key = name;
    for (char& c : key) c = c == '-' ? '_' : c;
    cmd->add_option_function<std::string>(
        std::string("--") + name, [&o, key](const std::string& v) { o.overrides[key] = v; }, help);
  }
}

ConfigPtr build_config(const Options& o, const std::vector<std::string>& skip = {}) {
  hyperrec_config* raw = nullptr;
  check(o.config.empty() ? hyperrec_config_create(&raw) : hyperrec_config_load(o.config.c_str(), &raw));
  ConfigPtr cfg(raw);
  if (o.seed) check(hyperrec_config_set(cfg.get(), "seed", o.seed->c_str()));
  for (const auto& [key, value] : o.overrides) {
    if (std::find(skip.begin(), skip.end(), key) != skip.end()) continue;
    check(hyperrec_config_set(cfg.get(), key.c_str(), value.c_str()));
  }
  for (const auto& a : o.ablations) {
    if (a != "sa" && a != "dh" && a != "ssl") {
      std::fprintf(stderr, "error: --ablation expects sa, dh or ssl, got '%s'\n", a.c_str());
      throw Failure{HYPERREC_ERR_CONFIG};
    }
    check(hyperrec_config_set(cfg.get(), ("no_" + a).c_str(), "true"));
  }
  check(hyperrec_config_validate(cfg.get()));
  return cfg;
}

void print_metrics(const hyperrec_metrics* m) {
  for (const char* name : {"recall", "ndcg", "users", "mad_users", "mad_items"}) {
    double v = 0.0;
    check(hyperrec_metrics_get(m, name, &v));
    std::printf("%s\t%.6g\n", name, v);
  }
  std::size_t groups = 0;
  check(hyperrec_metrics_group_count(m, &groups));
  for (std::size_t g = 0; g < groups; ++g) {
    double v = 0.0;
    check(hyperrec_metrics_group_recall(m, g, &v));
    std::printf("group_%zu_recall\t%.6g\n", g, v);
  }
}

void print_table(const hyperrec_table* t) {
  std::printf("row");
  for (std::size_t c = 0; c < hyperrec_table_cols(t); ++c) std::printf("\t%s", hyperrec_table_column(t, c));
  std::printf("\n");
  for (std::size_t r = 0; r < hyperrec_table_rows(t); ++r) {
    std::printf("%s", hyperrec_table_label(t, r));
    for (std::size_t c = 0; c < hyperrec_table_cols(t); ++c) {
      double v = 0.0;
      check(hyperrec_table_value(t, r, c, &v));
      std::printf("\t%.6g", v);
    }
    std::printf("\n");
  }
}

int cmd_generate(const Options& o, const std::vector<std::string>& sets) {
  hyperrec_generator* raw = nullptr;
  check(o.config.empty() ? hyperrec_generator_create(&raw)
                         : hyperrec_generator_load(o.config.c_str(), &raw));
  std::unique_ptr<hyperrec_generator, GeneratorDeleter> gen(raw);
  if (o.seed) check(hyperrec_generator_set(gen.get(), "seed", o.seed->c_str()));
  for (const auto& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "error: --set expects key=value, got '%s'\n", kv.c_str());
      return kExitInput;
    }
    check(hyperrec_generator_set(gen.get(), kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()));
  }
  check(hyperrec_generate(gen.get(), o.out.c_str()));
  std::printf("wrote dataset to %s\n", o.out.c_str());
  return kExitOk;
}

int cmd_train(const Options& o) {
  ConfigPtr cfg = build_config(o);
  hyperrec_metrics* raw = nullptr;
  check(hyperrec_train(o.data.c_str(), o.out.c_str(), cfg.get(), o.resume ? 1 : 0, &raw));
  MetricsPtr m(raw);
  print_metrics(m.get());
  return kExitOk;
}

int cmd_eval(const Options& o) {
  hyperrec_metrics* raw = nullptr;
  check(hyperrec_evaluate(o.run.c_str(), o.out.empty() ? nullptr : o.out.c_str(), &raw));
  MetricsPtr m(raw);
  print_metrics(m.get());
  return kExitOk;
}

int cmd_ablate(Options o) {
  std::string variants;
  for (const auto& a : o.ablations) variants += (variants.empty() ? "" : ",") + a;
  o.ablations.clear();
  ConfigPtr cfg = build_config(o);
  hyperrec_table* raw = nullptr;
  check(hyperrec_ablate(o.data.c_str(), o.out.c_str(), cfg.get(),
                        variants.empty() ? nullptr : variants.c_str(), o.seeds, &raw));
  TablePtr t(raw);
  print_table(t.get());
  return kExitOk;
}

int cmd_sweep(const Options& o) {
  std::vector<std::string> params;
  std::string grid;
  std::size_t start = 0;
  while (start <= o.over.size()) {
    const auto end = o.over.find(',', start);
    const std::string p = o.over.substr(start, end == std::string::npos ? std::string::npos : end - start);
    if (!p.empty()) {
      params.push_back(p == "batch-size" ? "batch_size" : p);
      auto it = o.overrides.find(params.back());
      grid += (grid.empty() ? "" : ";") + params.back();
      if (it != o.overrides.end()) grid += "=" + it->second;
    }
    if (end == std::string::npos) break;
    start = end + 1;
  }
  ConfigPtr cfg = build_config(o, params);
  hyperrec_table* raw = nullptr;
  check(hyperrec_sweep(o.data.c_str(), o.out.c_str(), cfg.get(), grid.c_str(), &raw));
  TablePtr t(raw);
  print_table(t.get());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Knowledge-aware hypergraph recommender: data generation, training, evaluation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", hyperrec_version());
  Options o;
  std::vector<std::string> sets;

  auto* gen = app.add_subcommand("generate", "write a synthetic planted-cluster dataset");
  gen->add_option("--config", o.config, "generator config file (key=value)")->check(CLI::ExistingFile);
  gen->add_option("--seed", o.seed, "generator seed");
  gen->add_option("--set", sets, "extra generator key=value pairs");
  gen->add_option("--out", o.out, "dataset directory")->required();

  auto* train = app.add_subcommand("train", "train a model into a run directory");
  train->add_option("--data", o.data, "dataset directory")->required();
  train->add_option("--config", o.config, "training config file (key=value)")->check(CLI::ExistingFile);
  train->add_option("--seed", o.seed, "seed for split, init and sampling");
  train->add_option("--out", o.out, "run directory")->required();
  train->add_option("--ablation", o.ablations, "disable a component: sa, dh or ssl")->delimiter(',');
  train->add_flag("--resume", o.resume, "continue an interrupted run in --out");
  add_overrides(train, o);

  auto* eval = app.add_subcommand("eval", "re-evaluate a finished run on its test split");
  eval->add_option("--run", o.run, "run directory")->required();
  eval->add_option("--out", o.out, "where to write metrics.tsv and groups.tsv");

  auto* ablate = app.add_subcommand("ablate", "train the full model and its ablations over seeds");
  ablate->add_option("--data", o.data, "dataset directory")->required();
  ablate->add_option("--config", o.config, "training config file")->check(CLI::ExistingFile);
  ablate->add_option("--seed", o.seed, "first seed");
  ablate->add_option("--seeds", o.seeds, "number of seeds")->capture_default_str();
  ablate->add_option("--out", o.out, "output directory")->required();
  ablate->add_option("--ablation", o.ablations, "subset of sa, dh, ssl")->delimiter(',');
  add_overrides(ablate, o);

  auto* sweep = app.add_subcommand("sweep", "hyperparameter sensitivity over search grids");
  sweep->add_option("--data", o.data, "dataset directory")->required();
  sweep->add_option("--config", o.config, "training config file")->check(CLI::ExistingFile);
  sweep->add_option("--seed", o.seed, "seed");
  sweep->add_option("--out", o.out, "output directory")->required();
  sweep->add_option("--over", o.over, "comma list of swept keys")->capture_default_str();
  add_overrides(sweep, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*gen) return cmd_generate(o, sets);
    if (*train) return cmd_train(o);
    if (*eval) return cmd_eval(o);
    if (*ablate) return cmd_ablate(o);
    if (*sweep) return cmd_sweep(o);
  } catch (const Failure& f) {
    const char* detail = hyperrec_last_error();
    std::fprintf(stderr, "error (%s): %s\n", hyperrec_status_name(f.status),
                 detail && *detail ? detail : "see above");
    return exit_code(f.status);
  }
  return kExitRuntime;
}
