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

#include <algorithm>
#include <atomic>
#include <cmath>
#include <json.hpp>
#include <set>

#include "augscore/augment.hpp"
#include "augscore/error.hpp"
#include "test_util.hpp"

using namespace augscore;
using testutil::Fixture;

namespace {

PromptTemplate Template(const std::string& target = "1") {
  PromptTemplate t;
  t.sections[Section::kRole] = "You are a student.";
  t.sections[Section::kTask] = "Generate {{n_variants}} answers in group {{target_group}}.";
  t.sections[Section::kItemStatement] = "Item.";
  t.sections[Section::kScoringRubric] = "Rubric.";
  t.sections[Section::kExamplesToLearn] = "{{examples}}";
  t.sections[Section::kResponseCharacteristics] = "Short.";
  t.sections[Section::kExampleToAugment] = "{{exemplar}}";
  t.target_group = target;
  t.version = "v";
  return t;
}

Dataset Train(std::size_t n0, std::size_t n1) {
  std::vector<LabeledResponse> items;
  for (std::size_t i = 0; i < n0; ++i) {
    items.push_back({"n" + std::to_string(i), "the sun melts ice number " + std::to_string(i), "0", {},
                     Source::kOriginal, std::nullopt});
  }
  for (std::size_t i = 0; i < n1; ++i) {
    items.push_back({"m" + std::to_string(i), "particles gain energy case " + std::to_string(i), "1", {},
                     Source::kOriginal, std::nullopt});
  }
  return Dataset(items, {"0", "1"}, "t");
}

// Returns garbage for exemplars whose text contains `poison`.
struct FlakyBackend : Backend {
  std::string poison;
  std::atomic<int> calls{0};
  RawCompletion Complete(const GenerationRequest& req) override {
    ++calls;
    if (ExtractExemplar(req.prompt).find(poison) != std::string::npos) {
      return RawCompletion{"I cannot help with that.", BackendKind::kMock, ""};
    }
    return MockBackend(1).Complete(req);
  }
  BackendKind kind() const override { return BackendKind::kMock; }
};

}  // namespace

TEST_CASE("pool sizes follow k times minority exemplars") {
  for (std::size_t minority : {30u, 40u}) {
    LlmClient client(std::make_shared<MockBackend>(3), ClientOptions{"", true, true, 4});
    AugmentOptions options;
    auto pool = BuildAugmentPool(Train(50, minority), "1", Template(), client, options);
    CHECK(pool.items.size() == 4 * minority);
    CHECK(pool.exemplar_count == minority);
    CHECK(pool.completeness() == 1.0);
    std::set<std::string> ids;
    for (const auto& item : pool.items) {
      CHECK(item.label == "1");
      CHECK(item.source == Source::kAugmented);
      REQUIRE(item.parent_id.has_value());
      CHECK(item.parent_id->rfind("m", 0) == 0);
      ids.insert(item.id);
    }
    CHECK(ids.size() == pool.items.size());
  }
}

TEST_CASE("pool order and content do not depend on concurrency") {
  auto build = [](std::size_t in_flight) {
    LlmClient client(std::make_shared<MockBackend>(3), ClientOptions{"", true, true, in_flight});
    auto pool = BuildAugmentPool(Train(10, 12), "1", Template(), client, AugmentOptions{});
    return ToJsonl(Dataset(pool.items, {"0", "1"}));
  };
  CHECK(build(1) == build(6));
}

TEST_CASE("no target-class exemplars is an error") {
  LlmClient client(std::make_shared<MockBackend>(3));
  try {
    BuildAugmentPool(Train(10, 0), "1", Template(), client, AugmentOptions{});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInfeasible);
  }
  CHECK_THROWS_AS(BuildAugmentPool(Train(10, 3), "1", Template("0"), client, AugmentOptions{}), Error);
}

TEST_CASE("malformed generations are re-requested once, then recorded") {
  auto backend = std::make_shared<FlakyBackend>();
  backend->poison = "case 3";
  LlmClient client(backend, ClientOptions{"", true, true, 1});
  AugmentOptions options;
  options.completeness_floor = 0.5;
  auto pool = BuildAugmentPool(Train(10, 10), "1", Template(), client, options);
  CHECK(pool.items.size() == 36);
  REQUIRE(pool.failures.size() == 1);
  CHECK(pool.failures[0].exemplar_id == "m3");
  CHECK(pool.completeness() == doctest::Approx(0.9));
  CHECK(backend->calls == 11);

  auto strict = std::make_shared<FlakyBackend>();
  strict->poison = "case";
  LlmClient strict_client(strict);
  try {
    BuildAugmentPool(Train(10, 4), "1", Template(), strict_client, AugmentOptions{});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kGeneration);
  }
}

TEST_CASE("pool manifest and persistence") {
  testutil::TempDir dir("pool");
  LlmClient client(std::make_shared<MockBackend>(3));
  auto pool = BuildAugmentPool(Train(5, 3), "1", Template(), client, AugmentOptions{});
  SavePool(pool, {"0", "1"}, dir.File("pool.jsonl"));
  auto loaded = LoadDataset(dir.File("pool.jsonl"), FileFormat::kJsonl, {"0", "1"});
  CHECK(loaded.size() == 12);
  auto manifest = nlohmann::json::parse(testutil::ReadText(dir.File("pool.jsonl.manifest.json")));
  CHECK(manifest["template_version"] == "v");
  CHECK(manifest["k_per_exemplar"] == 4);
  CHECK(manifest["completeness"] == 1.0);
  CHECK(manifest["model_name"] == "gpt-4");
}

TEST_CASE("mix counts and nesting") {
  CHECK(MixCount(0.2, 120) == 24);
  CHECK(MixCount(1.0, 120) == 120);
  CHECK(MixCount(0.0, 120) == 0);
  CHECK(MixCount(0.5, 5) == 3);
  CHECK(MixCount(0.1, 5) == 1);
  CHECK_THROWS_AS(MixCount(1.2, 10), Error);
  CHECK_THROWS_AS(MixCount(-0.1, 10), Error);

  auto small = MixSelection(120, MixSpec{0.4, 9});
  auto large = MixSelection(120, MixSpec{0.6, 9});
  REQUIRE(small.size() == 48);
  REQUIRE(large.size() == 72);
  CHECK(std::equal(small.begin(), small.end(), large.begin()));
  auto full = MixSelection(120, MixSpec{1.0, 9});
  std::set<std::size_t> unique(full.begin(), full.end());
  CHECK(unique.size() == 120);
}

TEST_CASE("mixing appends to an unchanged train set") {
  auto train = Train(150, 30);
  LlmClient client(std::make_shared<MockBackend>(3));
  auto pool = BuildAugmentPool(train, "1", Template(), client, AugmentOptions{});
  auto mixed = MixTrainingSet(train, pool.items, MixSpec{0.2, 1});
  CHECK(mixed.size() == 204);
  for (std::size_t i = 0; i < train.size(); ++i) CHECK(mixed.items()[i].id == train.items()[i].id);
  CHECK(ToJsonl(MixTrainingSet(train, pool.items, MixSpec{0.0, 1})) == ToJsonl(train));
  auto all = MixTrainingSet(train, pool.items, MixSpec{1.0, 1});
  CHECK(ClassHistogram(all)[1].second == 150);
  CHECK(ClassHistogram(all)[0].second == 150);
}

TEST_CASE("smote examples") {
  std::vector<std::vector<double>> pts = {{0, 0}, {2, 4}, {10, 10}, {11, 11}};
  std::vector<Label> labels = {"1", "1", "0", "0"};
  auto out = SmoteOversample(pts, labels, "1", 1, 50, 4);
  REQUIRE(out.size() == 50);
  for (const auto& p : out) {
    const auto& x = pts[p.source];
    const auto& n = pts[p.neighbor];
    CHECK(p.source != p.neighbor);
    CHECK(p.lambda >= 0.0);
    CHECK(p.lambda < 1.0);
    for (std::size_t d = 0; d < 2; ++d) {
      CHECK(p.features[d] == doctest::Approx(x[d] + p.lambda * (n[d] - x[d])));
    }
  }
  // Midpoint example: (0,0) toward (2,4) at lambda 0.5.
  SmotePoint mid{{1, 2}, 0, 1, 0.5};
  CHECK(mid.features[0] == pts[0][0] + 0.5 * (pts[1][0] - pts[0][0]));
  CHECK(mid.features[1] == pts[0][1] + 0.5 * (pts[1][1] - pts[0][1]));
  CHECK(SmoteOversample(pts, labels, "1", 1, 0, 4).empty());
  CHECK_THROWS_AS(SmoteOversample(pts, labels, "1", 2, 5, 4), Error);
  std::vector<std::vector<double>> ragged = {{0, 0}, {1}, {2, 2}};
  CHECK_THROWS_AS(SmoteOversample(ragged, std::vector<Label>{"1", "1", "1"}, "1", 1, 3, 1), Error);
}

TEST_CASE("augmented quadruple samples keep the target group") {
  // Hand annotation: an element is present when its keyword survives.
  const std::map<std::string, std::string> keywords = {
      {"E1", "faster"}, {"E2", "collide"}, {"E3", "pressure"}, {"E4", "causes"},
      {"E5", "kinetic"}, {"E6", "number"}, {"E7", "walls"}};
  GroupingRule rule{{"E1", "E5", "E6", "E7"}, {"E2", "E3", "E4"}};
  auto annotate = [&](const std::string& text) {
    std::map<std::string, int> e;
    for (const auto& [name, word] : keywords) e[name] = text.find(word) != std::string::npos;
    return e;
  };
  std::vector<LabeledResponse> items = {
      {"d1", "Particles move faster and collide with the walls.", "D", {}, Source::kOriginal, {}},
      {"d2", "More kinetic energy, so pressure goes up.", "D", {}, Source::kOriginal, {}},
      {"a1", "It gets bigger.", "A", {}, Source::kOriginal, {}},
      {"b1", "The number of particles goes up.", "B", {}, Source::kOriginal, {}},
      {"c1", "Collisions cause pressure.", "C", {}, Source::kOriginal, {}},
  };
  for (const auto& item : items) {
    if (item.label == "D") CHECK(EvaluateGrouping(annotate(item.text), rule) == 'D');
  }
  auto tpl = LoadTemplate(Fixture("quadruple_template.json"));
  LlmClient client(std::make_shared<MockBackend>(2));
  auto pool = BuildAugmentPool(Dataset(items, {"A", "B", "C", "D"}), "D", tpl, client,
                               AugmentOptions{});
  REQUIRE(pool.items.size() == 8);
  for (const auto& item : pool.items) {
    CHECK_MESSAGE(EvaluateGrouping(annotate(item.text), rule) == 'D', item.text);
  }
}
