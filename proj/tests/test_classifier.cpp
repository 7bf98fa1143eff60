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
#include <cmath>
#include <numeric>

#include "augscore/classifier.hpp"
#include "augscore/error.hpp"
#include "augscore/hash.hpp"
#include "test_util.hpp"

using namespace augscore;

namespace {

double Norm(const SparseVector& v) {
  double s = 0.0;
  for (double x : v.value) s += x * x;
  return std::sqrt(s);
}

Dataset Separable() {
  std::vector<LabeledResponse> items;
  const char* a[] = {"honey sticky sweet", "honey thick slow", "sticky slow flow", "thick sweet honey"};
  const char* b[] = {"water fast thin", "thin runny water", "fast runny splash", "splash water thin"};
  for (int i = 0; i < 4; ++i) {
    items.push_back({"a" + std::to_string(i), a[i], "0", {}, Source::kOriginal, {}});
    items.push_back({"b" + std::to_string(i), b[i], "1", {}, Source::kOriginal, {}});
  }
  return Dataset(items, {"0", "1"});
}

}  // namespace

TEST_CASE("tokenize") {
  CHECK(Tokenize("Honey, and APPLE-pie 42!") ==
        std::vector<std::string>{"honey", "and", "apple", "pie", "42"});
  CHECK(Tokenize("  ").empty());
}

TEST_CASE("featurizer idf and vocabulary") {
  std::vector<std::string> corpus = {"a b", "b c"};
  auto f = Featurizer::Fit(corpus);
  CHECK(f.vocabulary() == std::vector<std::string>{"a", "b", "c"});
  CHECK(f.idf()[1] == doctest::Approx(1.0));
  CHECK(f.idf()[0] == doctest::Approx(std::log(1.5) + 1.0));
  CHECK(f.idf()[0] == doctest::Approx(1.4055).epsilon(1e-4));
  CHECK(f.idf()[2] == f.idf()[0]);

  auto bb = f.Apply("b b");
  CHECK(bb.index == std::vector<std::uint32_t>{1});
  CHECK(bb.value[0] == doctest::Approx(1.0));
  CHECK(f.Apply("zzz unseen").nnz() == 0);
  CHECK(Norm(f.Apply("a b c a")) == doctest::Approx(1.0).epsilon(1e-9));

  std::vector<std::string> same = {"x y", "x y", "x y"};
  auto g = Featurizer::Fit(same);
  CHECK(g.idf()[0] == g.idf()[1]);

  CHECK_THROWS_AS(Featurizer::Fit(std::vector<std::string>{}), Error);
  CHECK_THROWS_AS(Featurizer::Fit(corpus, 5), Error);
  auto filtered = Featurizer::Fit(corpus, 2);
  CHECK(filtered.vocabulary() == std::vector<std::string>{"b"});
}

TEST_CASE("gradient matches finite differences") {
  Rng rng(17);
  const std::size_t C = 3, V = 6, n = 10;
  std::vector<SparseVector> x;
  std::vector<std::size_t> y;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> dense(V);
    for (auto& d : dense) d = rng.Uniform01() < 0.5 ? 0.0 : rng.Uniform01();
    x.push_back(SparseVector::FromDense(dense));
    y.push_back(rng.Index(C));
  }
  std::vector<double> w(C * V), b(C);
  for (auto& v : w) v = rng.Uniform01() - 0.5;
  for (auto& v : b) v = rng.Uniform01() - 0.5;
  auto g = ComputeLossAndGradient(w, b, x, y, C, V, 0.1);
  const double h = 1e-5;
  for (std::size_t j = 0; j < w.size(); ++j) {
    auto wp = w, wm = w;
    wp[j] += h;
    wm[j] -= h;
    double num = (ComputeLossAndGradient(wp, b, x, y, C, V, 0.1).loss -
                  ComputeLossAndGradient(wm, b, x, y, C, V, 0.1).loss) / (2 * h);
    CHECK(g.grad_weights[j] == doctest::Approx(num).epsilon(1e-6));
  }
  for (std::size_t j = 0; j < b.size(); ++j) {
    auto bp = b, bm = b;
    bp[j] += h;
    bm[j] -= h;
    double num = (ComputeLossAndGradient(w, bp, x, y, C, V, 0.1).loss -
                  ComputeLossAndGradient(w, bm, x, y, C, V, 0.1).loss) / (2 * h);
    CHECK(g.grad_bias[j] == doctest::Approx(num).epsilon(1e-6));
  }
}

TEST_CASE("loss at zero weights is ln C") {
  std::vector<SparseVector> x = {SparseVector::FromDense(std::vector<double>{1, 0})};
  std::vector<std::size_t> y = {0};
  std::vector<double> w(4, 0.0), b(2, 0.0);
  CHECK(ComputeLossAndGradient(w, b, x, y, 2, 2, 0.5).loss == doctest::Approx(std::log(2.0)));
}

TEST_CASE("separable data reaches training accuracy 1 and is deterministic") {
  auto data = Separable();
  TrainConfig cfg;
  cfg.learning_rate = 1.0;
  cfg.epochs = 300;
  auto m = TrainReferenceModel(data, data, cfg);
  auto preds = m.Predict(data.Texts());
  for (std::size_t i = 0; i < data.size(); ++i) CHECK(preds[i].label == data.items()[i].label);
  auto again = TrainReferenceModel(data, data, cfg);
  CHECK(again.model.weights == m.model.weights);
  CHECK(again.model.bias == m.model.bias);
  CHECK(ModelToJson(again) == ModelToJson(m));

  for (const auto& p : preds) {
    CHECK(std::accumulate(p.probabilities.begin(), p.probabilities.end(), 0.0) ==
          doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("training is invariant to item order") {
  auto data = Separable();
  auto items = data.items();
  std::reverse(items.begin(), items.end());
  Dataset reversed(items, data.label_space());
  TrainConfig cfg;
  cfg.epochs = 60;
  auto a = TrainReferenceModel(data, data, cfg);
  auto b = TrainReferenceModel(reversed, reversed, cfg);
  CHECK(a.model.weights == b.model.weights);
}

TEST_CASE("loss history is non-increasing at a small learning rate") {
  auto data = Separable();
  TrainConfig cfg;
  cfg.learning_rate = 0.01;
  cfg.epochs = 100;
  auto m = TrainReferenceModel(data, data, cfg);
  REQUIRE(m.model.loss_history.size() == 101);
  for (std::size_t i = 1; i < m.model.loss_history.size(); ++i) {
    CHECK(m.model.loss_history[i] <= m.model.loss_history[i - 1]);
  }
}

TEST_CASE("heavy regularization drives weights to zero") {
  auto data = Separable();
  TrainConfig cfg;
  cfg.learning_rate = 1e-4;
  cfg.l2 = 1e4;
  cfg.epochs = 50;
  auto m = TrainReferenceModel(data, data, cfg);
  double norm = 0.0;
  for (double w : m.model.weights) norm += w * w;
  CHECK(norm < 1e-6);
}

TEST_CASE("tie rule and zero model") {
  CHECK(ArgmaxLowestTie(std::vector<double>{0.2, 0.5, 0.5}) == 1);
  CHECK(ArgmaxLowestTie(std::vector<double>{1, 1}) == 0);
  ClassifierModel zero;
  zero.label_space = {"0", "1", "2"};
  zero.dimension = 2;
  zero.weights.assign(6, 0.0);
  zero.bias.assign(3, 0.0);
  auto p = zero.Probabilities(SparseVector::FromDense(std::vector<double>{1, 1}));
  for (double v : p) CHECK(v == doctest::Approx(1.0 / 3));
  CHECK(ArgmaxLowestTie(p) == 0);
}

TEST_CASE("single positive weight decides the class") {
  std::vector<std::string> corpus = {"honey", "water"};
  Featurizer f = Featurizer::Fit(corpus);
  ClassifierModel m;
  m.label_space = {"0", "1"};
  m.dimension = f.dimension();
  m.weights.assign(2 * f.dimension(), 0.0);
  m.bias.assign(2, 0.0);
  m.weights[1 * f.dimension() + *f.IndexOf("honey")] = 2.0;
  ReferenceModel model{f, m};
  auto preds = model.Predict(std::vector<std::string>{"sweet honey", "water only", "nothing"});
  CHECK(preds[0].label == "1");
  CHECK(preds[1].label == "0");
  CHECK(preds[2].label == "0");
}

TEST_CASE("single-class training data is rejected") {
  std::vector<LabeledResponse> items = {{"a", "x y", "0", {}, Source::kOriginal, {}},
                                        {"b", "y z", "0", {}, Source::kOriginal, {}}};
  Dataset d(items, {"0", "1"});
  CHECK_THROWS_AS(TrainReferenceModel(d, d, TrainConfig{}), Error);
}

TEST_CASE("non-finite loss is reported") {
  auto data = Separable();
  TrainConfig cfg;
  cfg.learning_rate = 1e308;
  cfg.epochs = 5;
  try {
    TrainReferenceModel(data, data, cfg);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNumeric);
  }
}

TEST_CASE("model json round trip") {
  testutil::TempDir dir("model");
  auto data = Separable();
  TrainConfig cfg;
  cfg.epochs = 40;
  auto m = TrainReferenceModel(data, data, cfg);
  SaveModel(m, dir.File("m.json"));
  auto back = LoadModel(dir.File("m.json"));
  CHECK(ModelToJson(back) == ModelToJson(m));
  auto a = m.Predict(data.Texts());
  auto b = back.Predict(data.Texts());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].probabilities == b[i].probabilities);
  CHECK_THROWS_AS(ModelFromJson("{\"vocabulary\": 3}"), Error);
}

TEST_CASE("adapter contract") {
  auto data = Separable();
  TrainConfig cfg;
  cfg.learning_rate = 1.0;
  cfg.epochs = 100;
  auto trainer = ReferenceTrainer(cfg);
  auto scorer = trainer(data, data);
  auto probs = scorer->PredictProba(data.Texts());
  REQUIRE(probs.size() == data.size());
  for (const auto& row : probs) {
    CHECK(row.size() == 2);
    CHECK(row[0] + row[1] == doctest::Approx(1.0));
  }
  auto labels = PredictLabels(*scorer, data.Texts());
  CHECK(labels[0] == "0");
  CHECK(labels[1] == "1");
}
