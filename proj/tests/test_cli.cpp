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

#include <sys/wait.h>

#include <cstdlib>
#include <string>

#include "test_util.hpp"

using testutil::Fixture;

namespace {

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string Quote(const std::string& s) {
  std::string q = "'";
  for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return q + "'";
}

RunResult Run(const std::string& args) {
  static testutil::TempDir capture("cli_io");
  const std::string out = capture.File("stdout"), err = capture.File("stderr");
  const std::string cmd = Quote(AUGSCORE_CLI_PATH) + " " + args + " >" + Quote(out) + " 2>" + Quote(err);
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = testutil::ReadText(out);
  r.err = testutil::ReadText(err);
  return r;
}

bool Contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("help and usage errors") {
  auto help = Run("--help");
  CHECK(help.code == 0);
  CHECK(Contains(help.out, "sweep"));
  CHECK(Run("sweep --help").code == 0);

  auto unknown = Run("frobnicate");
  CHECK(unknown.code == 2);
  CHECK(Contains(unknown.err, "augscore: usage:"));
  CHECK(Run("analyze " + Quote(Fixture("synthetic_imbalanced.jsonl")) + " --labels 0,1 --bogus").code == 2);
  CHECK(Run("sweep").code == 2);
  CHECK(Run("augment --data x --template y --out z --labels 0,1 --target 1 --backend carrier-pigeon").code == 2);
}

TEST_CASE("runtime errors exit 1 with a one-line message") {
  auto r = Run("analyze /nonexistent.jsonl --labels 0,1");
  CHECK(r.code == 1);
  CHECK(r.err.rfind("augscore: error[io]: ", 0) == 0);
  CHECK(r.err.find('\n') == r.err.size() - 1);
  auto bad_label = Run("analyze " + Quote(Fixture("synthetic_imbalanced.jsonl")) + " --labels 0,2");
  CHECK(bad_label.code == 1);
  CHECK(Contains(bad_label.err, "augscore: error["));
}

TEST_CASE("analyze and validate-prompt") {
  auto r = Run("analyze " + Quote(Fixture("synthetic_imbalanced.jsonl")) + " --labels 0,1");
  REQUIRE(r.code == 0);
  CHECK(Contains(r.out, "0\t193"));
  CHECK(Contains(r.out, "1\t73"));
  CHECK(Contains(r.out, "total\t266"));
  CHECK(Contains(r.out, "imbalance_ratio"));

  auto ok = Run("validate-prompt " + Quote(Fixture("binary_template.json")) + " --labels 0,1");
  CHECK(ok.code == 0);
  CHECK(ok.out == "ok\n");
  auto issues = Run("validate-prompt " + Quote(Fixture("quadruple_template.json")) + " --labels 0,1");
  CHECK(issues.code == 1);
  CHECK(Contains(issues.err, "error[validation]"));
}

TEST_CASE("augment, train and eval pipeline") {
  testutil::TempDir dir("cli_pipeline");
  const std::string data = Quote(Fixture("synthetic_imbalanced.jsonl"));
  auto aug = Run("augment --data " + data + " --template " + Quote(Fixture("binary_template.json")) +
                 " --out " + Quote(dir.File("pool.jsonl")) + " --labels 0,1 --target 1 --k 2" +
                 " --cache-dir " + Quote(dir.File("cache")));
  REQUIRE_MESSAGE(aug.code == 0, aug.err);
  CHECK(Contains(aug.out, "pool_size\t146"));
  CHECK(!testutil::ReadText(dir.File("pool.jsonl.manifest.json")).empty());

  auto train = Run("train --train " + data + " --val " + data + " --out " + Quote(dir.File("m.json")) +
                   " --labels 0,1 --epochs 50");
  REQUIRE_MESSAGE(train.code == 0, train.err);
  auto eval = Run("eval --model " + Quote(dir.File("m.json")) + " --data " + data +
                  " --labels 0,1 --positive 1 --probs-out " + Quote(dir.File("probs.jsonl")));
  REQUIRE_MESSAGE(eval.code == 0, eval.err);
  CHECK(Contains(eval.out, "accuracy\t"));
  CHECK(Contains(eval.out, "f1\t"));
  CHECK(Contains(testutil::ReadText(dir.File("probs.jsonl")), "{\"id\":\"r001\""));
}

TEST_CASE("sweep, saturation, report and compare") {
  testutil::TempDir dir("cli_sweep");
  const std::string config = std::string("{\"task\": \"cli\", \"dataset\": \"") +
                             Fixture("synthetic_imbalanced.jsonl") +
                             "\", \"label_space\": [\"0\", \"1\"], \"target_class\": \"1\","
                             " \"split\": {\"val_per_class\": 13, \"test_per_class\": 30},"
                             " \"proportions\": [0.0, 0.5, 1.0], \"repetitions\": 2,"
                             " \"arms\": [\"llm_augment\", \"gold_standard\"],"
                             " \"gold_standard_pool\": \"" + Fixture("gold_standard_pool.jsonl") +
                             "\", \"template\": \"" + Fixture("binary_template.json") +
                             "\", \"classifier\": {\"epochs\": 50},"
                             " \"backend\": {\"kind\": \"mock\"}}";
  testutil::WriteText(dir.File("sweep.json"), config);
  const std::string out = dir.File("out");

  auto sweep = Run("sweep --config " + Quote(dir.File("sweep.json")) + " --out " + Quote(out));
  REQUIRE_MESSAGE(sweep.code == 0, sweep.err);
  CHECK(Contains(sweep.out, "cells\t24"));
  for (const char* f : {"cells.csv", "aggregates.csv", "manifest.json", "saturation.json"}) {
    CHECK_MESSAGE(!testutil::ReadText(out + "/" + f).empty(), f);
  }
  const std::string first = testutil::ReadText(out + "/cells.csv");

  auto refused = Run("sweep --config " + Quote(dir.File("sweep.json")) + " --out " + Quote(out));
  CHECK(refused.code == 1);
  auto forced = Run("sweep --config " + Quote(dir.File("sweep.json")) + " --out " + Quote(out) + " --force");
  CHECK(forced.code == 0);
  CHECK(testutil::ReadText(out + "/cells.csv") == first);

  const std::string aggs = Quote(out + "/aggregates.csv");
  auto sat = Run("saturation --aggregates " + aggs + " --metric f1");
  CHECK(sat.code == 0);
  CHECK(Contains(sat.out, "metric\tf1"));
  CHECK(Run("saturation --aggregates " + aggs + " --metric f1 --arm smote").code == 1);

  auto cmp = Run("compare --aggregates " + aggs + " --arms llm_augment,gold_standard --metric recall");
  REQUIRE(cmp.code == 0);
  CHECK(cmp.out.rfind("proportion,split,llm_augment_mean,", 0) == 0);
  CHECK(Run("compare --aggregates " + aggs + " --arms llm_augment --metric recall").code != 0);

  auto report = Run("report --cells " + Quote(out + "/cells.csv") + " --out " + Quote(dir.File("rep")));
  REQUIRE(report.code == 0);
  CHECK(testutil::ReadText(dir.File("rep/aggregates.csv")) == testutil::ReadText(out + "/aggregates.csv"));
}

TEST_CASE("http backend needs a credential from the environment") {
  testutil::TempDir dir("cli_http");
  unsetenv("AUGSCORE_API_KEY");
  auto missing = Run("augment --data " + Quote(Fixture("synthetic_imbalanced.jsonl")) + " --template " +
                     Quote(Fixture("binary_template.json")) + " --out " + Quote(dir.File("p.jsonl")) +
                     " --labels 0,1 --target 1 --backend http --endpoint http://127.0.0.1:9/v1");
  CHECK(missing.code == 1);
  CHECK(Contains(missing.err, "AUGSCORE_API_KEY"));
  CHECK(Run("augment --data x --template y --out z --labels 0,1 --target 1 --api-key secret").code == 2);
}
