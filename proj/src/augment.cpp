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

#include "augscore/augment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <numeric>
#include <optional>
#include <thread>

#include "augscore/error.hpp"
#include "augscore/hash.hpp"
#include "csv.hpp"

namespace augscore {

using json = nlohmann::ordered_json;

double AugmentationPool::completeness() const {
  const std::size_t requested = k_per_exemplar * exemplar_count;
  if (requested == 0) return 1.0;
  return static_cast<double>(items.size()) / static_cast<double>(requested);
}

namespace {

struct ExemplarResult {
  std::vector<std::string> variants;
  std::optional<std::string> error;
};

ExemplarResult AugmentOne(const LabeledResponse& exemplar, const PromptTemplate& tpl,
                          std::span<const LabeledResponse> learn, LlmClient& client,
                          const AugmentOptions& options) {
  GenerationRequest request = options.request;
  request.n_variants = options.k_per_exemplar;
  request.prompt = RenderPrompt(tpl, exemplar, learn, options.k_per_exemplar);

  ExemplarResult result;
  for (int attempt = 0; attempt < 2; ++attempt) {
    try {
      RawCompletion completion = client.Generate(request, /*bypass_cache=*/attempt > 0);
      result.variants = ParseVariants(completion.text, options.k_per_exemplar).variants;
      result.error.reset();
      return result;
    } catch (const Error& e) {
      result.error = e.what();
    }
  }
  return result;
}

}  // namespace

AugmentationPool BuildAugmentPool(const Dataset& train, const Label& target_class,
                                  const PromptTemplate& tpl, LlmClient& client,
                                  const AugmentOptions& options) {
  auto learn = SelectLearnExamples(train, target_class, options.n_learn_examples,
                                   options.learn_seed);
  return BuildAugmentPool(train, target_class, tpl, client, options, learn);
}

AugmentationPool BuildAugmentPool(const Dataset& train, const Label& target_class,
                                  const PromptTemplate& tpl, LlmClient& client,
                                  const AugmentOptions& options,
                                  std::span<const LabeledResponse> learn_examples) {
  if (options.k_per_exemplar < 1) {
    throw Error(ErrorCode::kInvalidArgument, "k_per_exemplar must be >= 1");
  }
  train.LabelIndex(target_class);
  const auto exemplars = train.OfClass(target_class);
  if (exemplars.empty()) {
    throw Error(ErrorCode::kInfeasible,
                "training data has no items of class '" + target_class + "' to augment");
  }
  auto issues = ValidateTemplate(tpl, &train.label_space());
  if (!issues.empty()) throw Error(ErrorCode::kValidation, "invalid template: " + issues[0]);
  if (tpl.target_group != target_class) {
    throw Error(ErrorCode::kValidation, "template targets '" + tpl.target_group +
                                            "' but the pool targets '" + target_class + "'");
  }

  std::vector<ExemplarResult> results(exemplars.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < exemplars.size(); i = next++) {
      try {
        results[i] = AugmentOne(exemplars[i], tpl, learn_examples, client, options);
      } catch (const std::exception& e) {
        results[i].error = e.what();
      }
    }
  };
  const std::size_t n_workers = std::min(client.max_in_flight(), exemplars.size());
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (std::size_t t = 0; t < n_workers; ++t) threads.emplace_back(worker);
    for (auto& th : threads) th.join();
  }

  AugmentationPool pool;
  pool.k_per_exemplar = options.k_per_exemplar;
  pool.target_class = target_class;
  pool.template_version = tpl.version;
  pool.model_name = options.request.model_name;
  pool.exemplar_count = exemplars.size();
  for (std::size_t i = 0; i < exemplars.size(); ++i) {
    if (results[i].error) {
      pool.failures.push_back({exemplars[i].id, *results[i].error});
      continue;
    }
    for (std::size_t k = 0; k < results[i].variants.size(); ++k) {
      LabeledResponse item;
      item.id = exemplars[i].id + "-aug" + std::to_string(k + 1);
      item.text = results[i].variants[k];
      item.label = target_class;
      item.source = Source::kAugmented;
      item.parent_id = exemplars[i].id;
      pool.items.push_back(std::move(item));
    }
  }
  if (pool.completeness() < options.completeness_floor) {
    std::string message = "augmentation pool completeness " +
                          csv::FormatDouble(pool.completeness()) + " below floor " +
                          csv::FormatDouble(options.completeness_floor);
    if (!pool.failures.empty()) message += "; first failure: " + pool.failures[0].message;
    throw Error(ErrorCode::kGeneration, message);
  }
  return pool;
}

std::string PoolManifestJson(const AugmentationPool& pool) {
  json m;
  m["template_version"] = pool.template_version;
  m["k_per_exemplar"] = pool.k_per_exemplar;
  m["completeness"] = pool.completeness();
  m["model_name"] = pool.model_name;
  m["target_class"] = pool.target_class;
  m["exemplars"] = pool.exemplar_count;
  m["items"] = pool.items.size();
  json failures = json::array();
  for (const auto& f : pool.failures) {
    failures.push_back({{"exemplar_id", f.exemplar_id}, {"message", f.message}});
  }
  m["failures"] = failures;
  return m.dump(2);
}

void SavePool(const AugmentationPool& pool, const LabelSpace& label_space,
              const std::string& path) {
  SaveJsonl(Dataset(pool.items, label_space), path);
  std::ofstream out(path + ".manifest.json", std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path + ".manifest.json");
  out << PoolManifestJson(pool) << "\n";
}

std::size_t MixCount(double proportion, std::size_t pool_size) {
  if (!(proportion >= 0.0 && proportion <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "proportion must be within [0, 1]");
  }
  // std::round rounds halves away from zero.
  return static_cast<std::size_t>(std::round(proportion * static_cast<double>(pool_size)));
}

std::vector<std::size_t> MixSelection(std::size_t pool_size, const MixSpec& spec) {
  const std::size_t count = MixCount(spec.proportion, pool_size);
  std::vector<std::size_t> order(pool_size);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(DeriveSeed(spec.seed, "mix"));
  rng.Shuffle(std::span<std::size_t>(order));
  order.resize(count);
  return order;
}

Dataset MixTrainingSet(const Dataset& train, std::span<const LabeledResponse> pool,
                       const MixSpec& spec) {
  auto items = train.items();
  for (std::size_t index : MixSelection(pool.size(), spec)) items.push_back(pool[index]);
  return Dataset(std::move(items), train.label_space(), train.task_id());
}

std::vector<SmotePoint> SmoteOversample(std::span<const std::vector<double>> points,
                                        std::span<const Label> labels,
                                        const Label& minority_class, std::size_t k_neighbors,
                                        std::size_t n_new, std::uint64_t seed) {
  if (points.size() != labels.size()) {
    throw Error(ErrorCode::kInvalidArgument, "points and labels differ in length");
  }
  if (k_neighbors < 1) throw Error(ErrorCode::kInvalidArgument, "k_neighbors must be >= 1");
  std::vector<std::size_t> minority;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (labels[i] == minority_class) minority.push_back(i);
  }
  if (minority.size() <= k_neighbors) {
    throw Error(ErrorCode::kInfeasible,
                "SMOTE needs more than " + std::to_string(k_neighbors) +
                    " minority points, have " + std::to_string(minority.size()));
  }
  const std::size_t dim = points[minority[0]].size();
  for (const auto& p : points) {
    if (p.size() != dim) throw Error(ErrorCode::kInvalidArgument, "feature dimension mismatch");
  }

  auto sq_distance = [&](std::size_t a, std::size_t b) {
    double d = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
      const double diff = points[a][j] - points[b][j];
      d += diff * diff;
    }
    return d;
  };

  // k nearest minority neighbours of each minority point.
  std::vector<std::vector<std::size_t>> neighbours(minority.size());
  for (std::size_t i = 0; i < minority.size(); ++i) {
    std::vector<std::pair<double, std::size_t>> candidates;
    for (std::size_t j = 0; j < minority.size(); ++j) {
      if (j != i) candidates.emplace_back(sq_distance(minority[i], minority[j]), minority[j]);
    }
    std::partial_sort(candidates.begin(), candidates.begin() + k_neighbors, candidates.end());
    for (std::size_t n = 0; n < k_neighbors; ++n) neighbours[i].push_back(candidates[n].second);
  }

  Rng rng(DeriveSeed(seed, "smote"));
  std::vector<SmotePoint> out;
  out.reserve(n_new);
  for (std::size_t s = 0; s < n_new; ++s) {
    const std::size_t i = rng.Index(minority.size());
    const std::size_t nn = neighbours[i][rng.Index(k_neighbors)];
    const double lambda = rng.Uniform01();
    SmotePoint p;
    p.source = minority[i];
    p.neighbor = nn;
    p.lambda = lambda;
    p.features.resize(dim);
    for (std::size_t j = 0; j < dim; ++j) {
      const double x = points[p.source][j];
      p.features[j] = x + lambda * (points[nn][j] - x);
    }
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace augscore
