// Copyright 2026 The hyperrec Authors
// SPDX-License-Identifier: Apache-2.0

#include "hyperrec/hyperrec.h"

#include <cstring>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hyperrec/error.hpp"
#include "hyperrec/experiments.hpp"
#include "hyperrec/synthetic.hpp"

struct hyperrec_config {
  hyperrec::TrainingConfig value;
};

struct hyperrec_generator {
  hyperrec::GeneratorConfig value;
};

struct hyperrec_metrics {
  hyperrec::EvalMetrics value;
};

struct hyperrec_table {
  std::vector<std::string> labels;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> values;
};

namespace {

thread_local std::string last_error;

hyperrec_status fail(hyperrec_status status, std::string message) {
  last_error = std::move(message);
  return status;
}

// Runs `body`, translating exceptions into status codes.
template <class F>
hyperrec_status guarded(F&& body) {
  last_error.clear();
  try {
    body();
    return HYPERREC_OK;
  } catch (const hyperrec::IoError& e) {
    return fail(HYPERREC_ERR_IO, e.what());
  } catch (const hyperrec::ParseError& e) {
    return fail(HYPERREC_ERR_PARSE, e.what());
  } catch (const hyperrec::ConfigError& e) {
    return fail(HYPERREC_ERR_CONFIG, e.what());
  } catch (const hyperrec::NumericError& e) {
    return fail(HYPERREC_ERR_NUMERIC, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(HYPERREC_ERR_IO, e.what());
  } catch (const std::exception& e) {
    return fail(HYPERREC_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(HYPERREC_ERR_INTERNAL, "unknown failure");
  }
}

#define HYPERREC_REQUIRE(cond, what) \
  if (!(cond)) return fail(HYPERREC_ERR_ARGUMENT, what)

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find(sep, start);
    std::string part = text.substr(start, end == std::string::npos ? std::string::npos : end - start);
    if (!part.empty()) parts.push_back(std::move(part));
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return parts;
}

}  // namespace

extern "C" {

const char* hyperrec_version(void) { return hyperrec::kArtifactVersion.data(); }

const char* hyperrec_last_error(void) { return last_error.c_str(); }

const char* hyperrec_status_name(hyperrec_status status) {
  switch (status) {
    case HYPERREC_OK: return "ok";
    case HYPERREC_ERR_ARGUMENT: return "invalid argument";
    case HYPERREC_ERR_IO: return "io error";
    case HYPERREC_ERR_PARSE: return "parse error";
    case HYPERREC_ERR_CONFIG: return "config error";
    case HYPERREC_ERR_NUMERIC: return "numeric error";
    case HYPERREC_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

hyperrec_status hyperrec_config_create(hyperrec_config** out) {
  HYPERREC_REQUIRE(out, "config_create: out is null");
  return guarded([&] { *out = new hyperrec_config{}; });
}

hyperrec_status hyperrec_config_load(const char* path, hyperrec_config** out) {
  HYPERREC_REQUIRE(path && out, "config_load: null argument");
  return guarded([&] { *out = new hyperrec_config{hyperrec::load_config(path)}; });
}

hyperrec_status hyperrec_config_set(hyperrec_config* config, const char* key, const char* value) {
  HYPERREC_REQUIRE(config && key && value, "config_set: null argument");
  return guarded([&] { config->value.set(key, value); });
}

hyperrec_status hyperrec_config_get(const hyperrec_config* config, const char* key, char* buf,
                                    size_t capacity, size_t* needed) {
  HYPERREC_REQUIRE(config && key && needed, "config_get: null argument");
  return guarded([&] {
    const std::string v = config->value.get(key);
    *needed = v.size() + 1;
    if (buf && capacity >= v.size() + 1) std::memcpy(buf, v.c_str(), v.size() + 1);
  });
}

hyperrec_status hyperrec_config_validate(const hyperrec_config* config) {
  HYPERREC_REQUIRE(config, "config_validate: null config");
  return guarded([&] { config->value.validate(); });
}

void hyperrec_config_destroy(hyperrec_config* config) { delete config; }

hyperrec_status hyperrec_generator_create(hyperrec_generator** out) {
  HYPERREC_REQUIRE(out, "generator_create: out is null");
  return guarded([&] { *out = new hyperrec_generator{}; });
}

hyperrec_status hyperrec_generator_load(const char* path, hyperrec_generator** out) {
  HYPERREC_REQUIRE(path && out, "generator_load: null argument");
  return guarded([&] { *out = new hyperrec_generator{hyperrec::load_generator_config(path)}; });
}

hyperrec_status hyperrec_generator_set(hyperrec_generator* generator, const char* key,
                                       const char* value) {
  HYPERREC_REQUIRE(generator && key && value, "generator_set: null argument");
  return guarded([&] { generator->value.set(key, value); });
}

hyperrec_status hyperrec_generate(const hyperrec_generator* generator, const char* out_dir) {
  HYPERREC_REQUIRE(generator && out_dir, "generate: null argument");
  return guarded([&] {
    hyperrec::write_corpus(out_dir, hyperrec::generate_corpus(generator->value));
  });
}

void hyperrec_generator_destroy(hyperrec_generator* generator) { delete generator; }

hyperrec_status hyperrec_train(const char* dataset_dir, const char* run_dir,
                               const hyperrec_config* config, int resume,
                               hyperrec_metrics** metrics) {
  HYPERREC_REQUIRE(dataset_dir && run_dir && config, "train: null argument");
  return guarded([&] {
    hyperrec::TrainRequest req{dataset_dir, run_dir, config->value, resume != 0};
    auto m = hyperrec::run_training(req);
    if (metrics) *metrics = new hyperrec_metrics{std::move(m)};
  });
}

hyperrec_status hyperrec_evaluate(const char* run_dir, const char* out_dir,
                                  hyperrec_metrics** metrics) {
  HYPERREC_REQUIRE(run_dir, "evaluate: run_dir is null");
  return guarded([&] {
    std::optional<std::filesystem::path> target;
    if (out_dir) target = out_dir;
    auto m = hyperrec::run_evaluation(run_dir, target);
    if (metrics) *metrics = new hyperrec_metrics{std::move(m)};
  });
}

hyperrec_status hyperrec_metrics_get(const hyperrec_metrics* metrics, const char* name,
                                     double* value) {
  HYPERREC_REQUIRE(metrics && name && value, "metrics_get: null argument");
  const auto& m = metrics->value;
  const std::string n = name;
  if (n == "recall") *value = m.recall;
  else if (n == "ndcg") *value = m.ndcg;
  else if (n == "users") *value = static_cast<double>(m.users);
  else if (n == "mad_users") *value = m.mad_users;
  else if (n == "mad_items") *value = m.mad_items;
  else return fail(HYPERREC_ERR_ARGUMENT, "metrics_get: unknown metric '" + n + "'");
  return HYPERREC_OK;
}

hyperrec_status hyperrec_metrics_group_count(const hyperrec_metrics* metrics, size_t* count) {
  HYPERREC_REQUIRE(metrics && count, "metrics_group_count: null argument");
  *count = metrics->value.groups.size();
  return HYPERREC_OK;
}

hyperrec_status hyperrec_metrics_group_recall(const hyperrec_metrics* metrics, size_t group,
                                              double* value) {
  HYPERREC_REQUIRE(metrics && value, "metrics_group_recall: null argument");
  HYPERREC_REQUIRE(group < metrics->value.groups.size(), "metrics_group_recall: group out of range");
  *value = metrics->value.groups[group].recall;
  return HYPERREC_OK;
}

void hyperrec_metrics_destroy(hyperrec_metrics* metrics) { delete metrics; }

hyperrec_status hyperrec_ablate(const char* dataset_dir, const char* out_dir,
                                const hyperrec_config* config, const char* variants, size_t seeds,
                                hyperrec_table** table) {
  HYPERREC_REQUIRE(dataset_dir && out_dir && config, "ablate: null argument");
  return guarded([&] {
    hyperrec::AblationRequest req;
    req.dataset_dir = dataset_dir;
    req.out_dir = out_dir;
    req.config = config->value;
    req.seeds = seeds;
    if (variants) {
      req.variants = {hyperrec::Variant::full};
      for (const auto& name : split(variants, ',')) {
        const auto v = hyperrec::parse_variant_name(name);
        if (v != hyperrec::Variant::full) req.variants.push_back(v);
      }
    }
    const auto summaries = hyperrec::run_ablation(req);
    if (!table) return;
    auto t = std::make_unique<hyperrec_table>();
    t->columns = {"recall", "ndcg", "mad_users", "mad_items", "sparsest_recall"};
    for (const auto& s : summaries) {
      t->labels.emplace_back(hyperrec::to_string(s.variant));
      t->values.push_back({s.recall, s.ndcg, s.mad_users, s.mad_items, s.sparsest_recall});
    }
    *table = t.release();
  });
}

hyperrec_status hyperrec_sweep(const char* dataset_dir, const char* out_dir,
                               const hyperrec_config* config, const char* grid,
                               hyperrec_table** table) {
  HYPERREC_REQUIRE(dataset_dir && out_dir && config && grid, "sweep: null argument");
  return guarded([&] {
    hyperrec::SweepRequest req;
    req.dataset_dir = dataset_dir;
    req.out_dir = out_dir;
    req.config = config->value;
    for (const auto& entry : split(grid, ';')) {
      const auto eq = entry.find('=');
      const std::string param = entry.substr(0, eq);
      const auto values = eq == std::string::npos ? hyperrec::grid_values(param)
                                                  : split(entry.substr(eq + 1), ',');
      if (values.empty()) throw hyperrec::ConfigError("sweep: no values for '" + param + "'");
      for (const auto& v : values) req.points.push_back({param, v});
    }
    const auto results = hyperrec::run_sweep(req);
    if (!table) return;
    auto t = std::make_unique<hyperrec_table>();
    t->columns = {"recall", "ndcg"};
    for (const auto& r : results) {
      t->labels.push_back(r.point.param + "=" + r.point.value);
      t->values.push_back({r.metrics.recall, r.metrics.ndcg});
    }
    *table = t.release();
  });
}

size_t hyperrec_table_rows(const hyperrec_table* table) { return table ? table->labels.size() : 0; }

size_t hyperrec_table_cols(const hyperrec_table* table) { return table ? table->columns.size() : 0; }

const char* hyperrec_table_label(const hyperrec_table* table, size_t row) {
  return table && row < table->labels.size() ? table->labels[row].c_str() : nullptr;
}

const char* hyperrec_table_column(const hyperrec_table* table, size_t col) {
  return table && col < table->columns.size() ? table->columns[col].c_str() : nullptr;
}

hyperrec_status hyperrec_table_value(const hyperrec_table* table, size_t row, size_t col,
                                     double* value) {
  HYPERREC_REQUIRE(table && value, "table_value: null argument");
  HYPERREC_REQUIRE(row < table->labels.size() && col < table->columns.size(),
                   "table_value: index out of range");
  *value = table->values[row][col];
  return HYPERREC_OK;
}

void hyperrec_table_destroy(hyperrec_table* table) { delete table; }

}  // extern "C"
