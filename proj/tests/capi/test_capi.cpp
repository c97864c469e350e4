// Copyright 2026 The hyperrec Authors
// SPDX-License-Identifier: Apache-2.0

// Exercises the shared library through its C header only.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "hyperrec/hyperrec.h"

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("hyperrec_capi_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string read_all(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path make_dataset(const std::string& name) {
  hyperrec_generator* g = nullptr;
  REQUIRE(hyperrec_generator_create(&g) == HYPERREC_OK);
  REQUIRE(hyperrec_generator_set(g, "users", "16") == HYPERREC_OK);
  REQUIRE(hyperrec_generator_set(g, "items", "20") == HYPERREC_OK);
  REQUIRE(hyperrec_generator_set(g, "entities", "40") == HYPERREC_OK);
  REQUIRE(hyperrec_generator_set(g, "clusters", "2") == HYPERREC_OK);
  const fs::path dir = scratch(name);
  REQUIRE(hyperrec_generate(g, dir.c_str()) == HYPERREC_OK);
  hyperrec_generator_destroy(g);
  return dir;
}

hyperrec_config* small_config() {
  hyperrec_config* c = nullptr;
  REQUIRE(hyperrec_config_create(&c) == HYPERREC_OK);
  for (auto [k, v] : {std::pair{"dim", "8"}, {"k", "3"}, {"epochs", "2"}, {"batch_size", "64"}, {"lr", "0.01"}}) {
    REQUIRE(hyperrec_config_set(c, k, v) == HYPERREC_OK);
  }
  return c;
}

}  // namespace

TEST_CASE("version and status names") {
  CHECK(std::strlen(hyperrec_version()) > 0);
  CHECK(std::string(hyperrec_status_name(HYPERREC_OK)) != std::string(hyperrec_status_name(HYPERREC_ERR_IO)));
}

TEST_CASE("config handle set, get and errors") {
  hyperrec_config* c = nullptr;
  REQUIRE(hyperrec_config_create(&c) == HYPERREC_OK);
  CHECK(hyperrec_config_set(c, "tau", "0.25") == HYPERREC_OK);

  size_t needed = 0;
  CHECK(hyperrec_config_get(c, "tau", nullptr, 0, &needed) == HYPERREC_OK);
  CHECK(needed == 5);
  char buf[16];
  CHECK(hyperrec_config_get(c, "tau", buf, sizeof buf, &needed) == HYPERREC_OK);
  CHECK(std::string(buf) == "0.25");

  CHECK(hyperrec_config_set(c, "taux", "1") == HYPERREC_ERR_CONFIG);
  CHECK(std::string(hyperrec_last_error()).find("taux") != std::string::npos);
  CHECK(hyperrec_config_set(c, "tau", "0") == HYPERREC_OK);
  CHECK(hyperrec_config_validate(c) == HYPERREC_ERR_CONFIG);
  CHECK(hyperrec_config_set(nullptr, "tau", "1") == HYPERREC_ERR_ARGUMENT);
  CHECK(hyperrec_config_create(nullptr) == HYPERREC_ERR_ARGUMENT);
  hyperrec_config_destroy(c);
  hyperrec_config_destroy(nullptr);

  hyperrec_config* missing = nullptr;
  CHECK(hyperrec_config_load("/nonexistent/run.cfg", &missing) == HYPERREC_ERR_IO);
  CHECK(missing == nullptr);
}

TEST_CASE("generator errors map to status codes") {
  hyperrec_generator* g = nullptr;
  REQUIRE(hyperrec_generator_create(&g) == HYPERREC_OK);
  CHECK(hyperrec_generator_set(g, "nope", "1") == HYPERREC_ERR_CONFIG);
  CHECK(hyperrec_generator_set(g, "p_in", "0.01") == HYPERREC_OK);
  CHECK(hyperrec_generate(g, scratch("bad_gen").c_str()) == HYPERREC_ERR_CONFIG);
  hyperrec_generator_destroy(g);
}

TEST_CASE("train, evaluate and read metrics") {
  const fs::path data = make_dataset("train_data");
  const fs::path run = scratch("train_run");
  hyperrec_config* c = small_config();
  hyperrec_metrics* m = nullptr;
  REQUIRE(hyperrec_train(data.c_str(), run.c_str(), c, 0, &m) == HYPERREC_OK);
  double recall = -1.0, users = 0.0;
  CHECK(hyperrec_metrics_get(m, "recall", &recall) == HYPERREC_OK);
  CHECK(hyperrec_metrics_get(m, "users", &users) == HYPERREC_OK);
  CHECK(recall >= 0.0);
  CHECK(recall <= 1.0);
  CHECK(users > 0.0);
  CHECK(hyperrec_metrics_get(m, "bogus", &recall) == HYPERREC_ERR_ARGUMENT);
  size_t groups = 0;
  CHECK(hyperrec_metrics_group_count(m, &groups) == HYPERREC_OK);
  CHECK(groups == 4);
  double g0 = -1.0;
  CHECK(hyperrec_metrics_group_recall(m, 0, &g0) == HYPERREC_OK);
  CHECK(hyperrec_metrics_group_recall(m, groups, &g0) == HYPERREC_ERR_ARGUMENT);

  hyperrec_metrics* again = nullptr;
  const fs::path out = scratch("train_eval");
  REQUIRE(hyperrec_evaluate(run.c_str(), out.c_str(), &again) == HYPERREC_OK);
  double recall2 = -1.0;
  CHECK(hyperrec_metrics_get(again, "recall", &recall2) == HYPERREC_OK);
  CHECK(recall2 == recall);
  CHECK(read_all(out / "metrics.tsv") == read_all(run / "metrics.tsv"));

  CHECK(hyperrec_evaluate(scratch("no_run").c_str(), nullptr, nullptr) == HYPERREC_ERR_IO);
  CHECK(hyperrec_train((data / "absent").c_str(), run.c_str(), c, 0, nullptr) == HYPERREC_ERR_IO);
  hyperrec_metrics_destroy(m);
  hyperrec_metrics_destroy(again);
  hyperrec_config_destroy(c);
}

TEST_CASE("ablation and sweep tables") {
  const fs::path data = make_dataset("table_data");
  hyperrec_config* c = small_config();
  REQUIRE(hyperrec_config_set(c, "epochs", "1") == HYPERREC_OK);

  hyperrec_table* t = nullptr;
  REQUIRE(hyperrec_ablate(data.c_str(), scratch("ablate").c_str(), c, "ssl", 1, &t) == HYPERREC_OK);
  CHECK(hyperrec_table_rows(t) == 2);
  CHECK(hyperrec_table_cols(t) == 5);
  CHECK(std::string(hyperrec_table_label(t, 0)) == "full");
  CHECK(std::string(hyperrec_table_column(t, 0)) == "recall");
  CHECK(hyperrec_table_label(t, 9) == nullptr);
  double v = 0.0;
  CHECK(hyperrec_table_value(t, 1, 4, &v) == HYPERREC_OK);
  CHECK(hyperrec_table_value(t, 2, 0, &v) == HYPERREC_ERR_ARGUMENT);
  hyperrec_table_destroy(t);
  CHECK(hyperrec_ablate(data.c_str(), scratch("ablate_bad").c_str(), c, "xx", 1, nullptr) == HYPERREC_ERR_CONFIG);

  hyperrec_table* s = nullptr;
  REQUIRE(hyperrec_sweep(data.c_str(), scratch("sweep").c_str(), c, "layers=1,2", &s) == HYPERREC_OK);
  CHECK(hyperrec_table_rows(s) == 2);
  CHECK(std::string(hyperrec_table_label(s, 1)) == "layers=2");
  hyperrec_table_destroy(s);
  hyperrec_config_destroy(c);
}
