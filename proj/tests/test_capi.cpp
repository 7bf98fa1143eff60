//
// Copyright 2026 The augscore Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include <doctest.h>

#include <cstring>
#include <string>
#include <vector>

#include "augscore/augscore.h"
#include "test_util.hpp"

using testutil::Fixture;

extern "C" int augscore_header_c_check(void);

namespace {

const char* const kBinary[] = {"0", "1"};

augscore_dataset* LoadFixture() {
  augscore_dataset* d = nullptr;
  REQUIRE(augscore_dataset_load(Fixture("synthetic_imbalanced.jsonl").c_str(), kBinary, 2, "t",
                                &d) == AUGSCORE_OK);
  return d;
}

std::string SmallSweepConfig(const std::string& out_dir) {
  return std::string("{\"task\": \"capi\", \"dataset\": \"") + Fixture("synthetic_imbalanced.jsonl") +
         "\", \"label_space\": [\"0\", \"1\"], \"target_class\": \"1\","
         " \"split\": {\"val_per_class\": 13, \"test_per_class\": 30},"
         " \"proportions\": [0.0, 0.5, 1.0], \"repetitions\": 2,"
         " \"arms\": [\"llm_augment\", \"none\"], \"template\": \"" +
         Fixture("binary_template.json") +
         "\", \"base_seed\": 5, \"classifier\": {\"epochs\": 50},"
         " \"backend\": {\"kind\": \"mock\", \"seed\": 1}, \"output_dir\": \"" + out_dir + "\"}";
}

}  // namespace

TEST_CASE("header compiles as C") { CHECK(augscore_header_c_check() == 4); }

TEST_CASE("status strings and version") {
  CHECK(std::strlen(augscore_version()) > 0);
  CHECK(std::string(augscore_status_string(AUGSCORE_OK)) == "ok");
  CHECK(std::string(augscore_status_string(AUGSCORE_ERR_VALIDATION)) == "validation");
  CHECK(std::string(augscore_status_string(AUGSCORE_ERR_INTERNAL)) == "internal");
}

TEST_CASE("dataset handles") {
  augscore_dataset* d = LoadFixture();
  CHECK(augscore_dataset_size(d) == 266);
  CHECK(augscore_dataset_label_count(d) == 2);
  CHECK(std::string(augscore_dataset_label_name(d, 1)) == "1");
  size_t counts[2] = {0, 0};
  REQUIRE(augscore_dataset_histogram(d, counts, 2) == AUGSCORE_OK);
  CHECK(counts[0] == 193);
  CHECK(counts[1] == 73);
  CHECK(augscore_dataset_histogram(d, counts, 3) == AUGSCORE_ERR_INVALID_ARGUMENT);

  const char *id = nullptr, *text = nullptr, *label = nullptr;
  REQUIRE(augscore_dataset_item(d, 0, &id, &text, &label) == AUGSCORE_OK);
  CHECK(std::string(id) == "r001");
  CHECK(augscore_dataset_item(d, 9999, &id, &text, &label) == AUGSCORE_ERR_NOT_FOUND);

  augscore_dataset *train = nullptr, *val = nullptr, *test = nullptr;
  REQUIRE(augscore_dataset_partition(d, 13, 30, 1, &train, &val, &test) == AUGSCORE_OK);
  CHECK(augscore_dataset_size(train) == 180);
  CHECK(augscore_dataset_size(val) == 26);
  CHECK(augscore_dataset_size(test) == 60);
  CHECK(augscore_dataset_partition(d, 13, 70, 1, &train, &val, &test) == AUGSCORE_ERR_INFEASIBLE);
  augscore_dataset_free(train);
  augscore_dataset_free(val);
  augscore_dataset_free(test);
  augscore_dataset_free(d);

  augscore_dataset* missing = nullptr;
  CHECK(augscore_dataset_load("/nonexistent/x.jsonl", kBinary, 2, "t", &missing) == AUGSCORE_ERR_IO);
  CHECK(missing == nullptr);
  CHECK(std::strlen(augscore_last_error()) > 0);
  CHECK(augscore_dataset_load(nullptr, kBinary, 2, "t", &missing) == AUGSCORE_ERR_INVALID_ARGUMENT);
  augscore_dataset_free(nullptr);
}

TEST_CASE("templates and grouping") {
  augscore_template* tpl = nullptr;
  REQUIRE(augscore_template_load(Fixture("binary_template.json").c_str(), &tpl) == AUGSCORE_OK);
  CHECK(std::string(augscore_template_version(tpl)) == "binary-v1");
  augscore_strings* issues = nullptr;
  REQUIRE(augscore_template_validate(tpl, kBinary, 2, &issues) == AUGSCORE_OK);
  CHECK(augscore_strings_size(issues) == 0);
  augscore_strings_free(issues);
  const char* const other[] = {"x", "y"};
  REQUIRE(augscore_template_validate(tpl, other, 2, &issues) == AUGSCORE_OK);
  CHECK(augscore_strings_size(issues) == 1);
  CHECK(std::strlen(augscore_strings_at(issues, 0)) > 0);
  augscore_strings_free(issues);
  augscore_template_free(tpl);

  const char* names[] = {"E1", "E2", "E3", "E4", "E5", "E6", "E7"};
  int values[] = {1, 1, 0, 0, 0, 0, 0};
  const char* dci[] = {"E1", "E5", "E6", "E7"};
  const char* sep[] = {"E2", "E3", "E4"};
  char group = 0;
  REQUIRE(augscore_evaluate_grouping(names, values, 7, dci, 4, sep, 3, &group) == AUGSCORE_OK);
  CHECK(group == 'D');
  values[0] = 0;
  REQUIRE(augscore_evaluate_grouping(names, values, 7, dci, 4, sep, 3, &group) == AUGSCORE_OK);
  CHECK(group == 'C');
  CHECK(augscore_evaluate_grouping(names, values, 6, dci, 4, sep, 3, &group) != AUGSCORE_OK);
  CHECK(group == 0);
}

TEST_CASE("augment, train, predict, evaluate") {
  testutil::TempDir dir("capi");
  augscore_dataset* d = LoadFixture();
  augscore_dataset *train = nullptr, *val = nullptr, *test = nullptr;
  REQUIRE(augscore_dataset_partition(d, 13, 30, 1, &train, &val, &test) == AUGSCORE_OK);

  augscore_template* tpl = nullptr;
  REQUIRE(augscore_template_load(Fixture("binary_template.json").c_str(), &tpl) == AUGSCORE_OK);
  augscore_client* client = nullptr;
  REQUIRE(augscore_client_create_mock(3, &client) == AUGSCORE_OK);
  REQUIRE(augscore_client_configure(client, dir.File("cache").c_str(), 1, 4) == AUGSCORE_OK);
  augscore_augment_options options;
  augscore_augment_options_default(&options);
  CHECK(options.k_per_exemplar == 4);
  augscore_pool* pool = nullptr;
  REQUIRE(augscore_augment(train, "1", tpl, client, &options, &pool) == AUGSCORE_OK);
  CHECK(augscore_pool_size(pool) == 4 * 30);
  CHECK(augscore_pool_completeness(pool) == 1.0);
  CHECK(augscore_client_request_count(client) == 30);
  REQUIRE(augscore_pool_save(pool, dir.File("pool.jsonl").c_str()) == AUGSCORE_OK);
  CHECK(augscore_client_configure(client, nullptr, 1, 1) == AUGSCORE_ERR_INVALID_ARGUMENT);
  augscore_pool_free(pool);

  // A second client reads the disk cache and makes no backend calls.
  augscore_client* cached = nullptr;
  REQUIRE(augscore_client_create_mock(3, &cached) == AUGSCORE_OK);
  REQUIRE(augscore_client_configure(cached, dir.File("cache").c_str(), 1, 2) == AUGSCORE_OK);
  REQUIRE(augscore_augment(train, "1", tpl, cached, &options, &pool) == AUGSCORE_OK);
  CHECK(augscore_client_request_count(cached) == 0);
  augscore_pool_free(pool);
  augscore_client_free(cached);
  CHECK(augscore_augment(train, "0", tpl, client, &options, &pool) != AUGSCORE_OK);

  augscore_train_config cfg;
  augscore_train_config_default(&cfg);
  CHECK(cfg.epochs == 500);
  cfg.epochs = 100;
  augscore_model* model = nullptr;
  REQUIRE(augscore_model_train(train, val, &cfg, &model) == AUGSCORE_OK);
  CHECK(augscore_model_label_count(model) == 2);
  const char* texts[] = {"a", "b c"};
  double probs[4];
  size_t labels[2];
  REQUIRE(augscore_model_predict(model, texts, 2, probs, labels) == AUGSCORE_OK);
  CHECK(probs[0] + probs[1] == doctest::Approx(1.0));
  CHECK(labels[1] < 2);

  augscore_metrics m;
  REQUIRE(augscore_model_evaluate(model, test, "binary", "1", &m) == AUGSCORE_OK);
  CHECK(m.accuracy >= 0.0);
  CHECK(m.accuracy <= 1.0);
  CHECK(augscore_model_evaluate(model, test, "weighted", "1", &m) == AUGSCORE_ERR_INVALID_ARGUMENT);

  REQUIRE(augscore_model_save(model, dir.File("m.json").c_str()) == AUGSCORE_OK);
  augscore_model* loaded = nullptr;
  REQUIRE(augscore_model_load(dir.File("m.json").c_str(), &loaded) == AUGSCORE_OK);
  augscore_metrics m2;
  REQUIRE(augscore_model_evaluate(loaded, test, "binary", "1", &m2) == AUGSCORE_OK);
  CHECK(m2.f1 == m.f1);

  augscore_model_free(loaded);
  augscore_model_free(model);
  augscore_client_free(client);
  augscore_template_free(tpl);
  augscore_dataset_free(train);
  augscore_dataset_free(val);
  augscore_dataset_free(test);
  augscore_dataset_free(d);
}

TEST_CASE("sweep, aggregates, saturation and comparison") {
  testutil::TempDir dir("capi_sweep");
  const std::string out = dir.File("out");
  testutil::WriteText(dir.File("sweep.json"), SmallSweepConfig(out));

  augscore_sweep* sweep = nullptr;
  REQUIRE(augscore_sweep_run(dir.File("sweep.json").c_str(), nullptr, &sweep) == AUGSCORE_OK);
  CHECK(augscore_sweep_cell_count(sweep) == 2 * 3 * 2 * 2);
  CHECK(augscore_sweep_failed_cell_count(sweep) == 0);
  CHECK(std::string(augscore_sweep_output_dir(sweep)) == out);
  augscore_sweep_free(sweep);

  // The output directory is now non-empty.
  CHECK(augscore_sweep_run(dir.File("sweep.json").c_str(), nullptr, &sweep) == AUGSCORE_ERR_IO);
  augscore_sweep_options opts = {nullptr, 1, 0, 1, 11};
  REQUIRE(augscore_sweep_run(dir.File("sweep.json").c_str(), &opts, &sweep) == AUGSCORE_OK);
  augscore_sweep_free(sweep);

  augscore_aggregates* aggs = nullptr;
  REQUIRE(augscore_aggregates_load((out + "/aggregates.csv").c_str(), &aggs) == AUGSCORE_OK);
  augscore_saturation sat;
  REQUIRE(augscore_saturation_query(aggs, "llm_augment", "test", "f1", 0.5, 0.01, &sat) ==
          AUGSCORE_OK);
  CHECK(sat.kind != nullptr);
  CHECK(augscore_saturation_query(aggs, "smote", "test", "f1", 0.5, 0.01, &sat) ==
        AUGSCORE_ERR_NOT_FOUND);

  augscore_comparison* cmp = nullptr;
  REQUIRE(augscore_compare(aggs, "llm_augment", "none", "recall", &cmp) == AUGSCORE_OK);
  CHECK(augscore_comparison_size(cmp) == 6);
  augscore_comparison_row row;
  REQUIRE(augscore_comparison_row_at(cmp, 0, &row) == AUGSCORE_OK);
  CHECK(row.proportion == 0.0);
  CHECK(row.has_difference);
  CHECK(row.difference == doctest::Approx(row.mean_a - row.mean_b));
  CHECK(augscore_comparison_row_at(cmp, 6, &row) == AUGSCORE_ERR_NOT_FOUND);
  augscore_comparison_free(cmp);
  CHECK(augscore_compare(aggs, "llm_augment", "smote", "f1", &cmp) == AUGSCORE_ERR_NOT_FOUND);
  augscore_aggregates_free(aggs);

  const std::string again = dir.File("again");
  REQUIRE(augscore_report_from_cells((out + "/cells.csv").c_str(), again.c_str(), 0.5, 0.01, 0) ==
          AUGSCORE_OK);
  CHECK(testutil::ReadText(again + "/aggregates.csv") == testutil::ReadText(out + "/aggregates.csv"));

  CHECK(augscore_sweep_run(dir.File("missing.json").c_str(), nullptr, &sweep) == AUGSCORE_ERR_IO);
}

TEST_CASE("detect saturation through the C API") {
  const double grid[] = {0.0, 0.2, 0.8, 1.0};
  const double means[] = {0.607, 0.661, 0.728, 0.683};
  augscore_saturation sat;
  REQUIRE(augscore_detect_saturation(grid, means, 4, 0.5, 0.01, &sat) == AUGSCORE_OK);
  CHECK(sat.found == 1);
  CHECK(sat.proportion == doctest::Approx(0.8));
  CHECK(std::string(sat.kind) == "peak_then_decline");
  CHECK(augscore_detect_saturation(grid, means, 2, 0.5, 0.01, &sat) == AUGSCORE_ERR_INVALID_ARGUMENT);
}
