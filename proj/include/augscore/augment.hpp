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

#ifndef AUGSCORE_AUGMENT_HPP_
#define AUGSCORE_AUGMENT_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "augscore/dataset.hpp"
#include "augscore/llm_client.hpp"
#include "augscore/prompt.hpp"

namespace augscore {

struct AugmentationFailure {
  std::string exemplar_id;
  std::string message;
};

// Generated minority-class responses, each linked to the training exemplar
// it was derived from.
struct AugmentationPool {
  std::vector<LabeledResponse> items;
  std::size_t k_per_exemplar = 0;
  Label target_class;
  std::string template_version;
  std::string model_name;
  std::size_t exemplar_count = 0;
  std::vector<AugmentationFailure> failures;

  // Produced items over requested items (k x exemplars); 1 when nothing was
  // requested.
  double completeness() const;
};

struct AugmentOptions {
  std::size_t k_per_exemplar = 4;
  std::size_t n_learn_examples = 5;
  std::uint64_t learn_seed = 0;
  double completeness_floor = 0.9;
  // Model name and decoding settings; prompt and n_variants are filled in.
  GenerationRequest request;
};

// For every target-class item of `train`: render, generate, parse k variants.
// A failed exemplar is re-requested once (bypassing the cache), then recorded
// and skipped. Throws kInfeasible without target exemplars and kGeneration
// when completeness falls below the floor.
AugmentationPool BuildAugmentPool(const Dataset& train, const Label& target_class,
                                  const PromptTemplate& tpl, LlmClient& client,
                                  const AugmentOptions& options);

// Same, with explicit examples to learn.
AugmentationPool BuildAugmentPool(const Dataset& train, const Label& target_class,
                                  const PromptTemplate& tpl, LlmClient& client,
                                  const AugmentOptions& options,
                                  std::span<const LabeledResponse> learn_examples);

// {template_version, k_per_exemplar, completeness, model_name, ...}
std::string PoolManifestJson(const AugmentationPool& pool);

// Writes `path` (JSONL rows) and `path + ".manifest.json"`.
void SavePool(const AugmentationPool& pool, const LabelSpace& label_space,
              const std::string& path);

struct MixSpec {
  double proportion = 0.0;
  std::uint64_t seed = 0;
};

// round(proportion * pool_size), halves away from zero.
std::size_t MixCount(double proportion, std::size_t pool_size);

// Pool indices to add: the first MixCount(...) entries of one seeded shuffle
// of the pool, so selections for p <= q are nested.
std::vector<std::size_t> MixSelection(std::size_t pool_size, const MixSpec& spec);

// train + selected pool items appended after the original rows.
Dataset MixTrainingSet(const Dataset& train, std::span<const LabeledResponse> pool,
                       const MixSpec& spec);

struct SmotePoint {
  std::vector<double> features;
  std::size_t source = 0;    // index into the input points
  std::size_t neighbor = 0;  // index into the input points
  double lambda = 0.0;
};

// Synthetic minority points x + lambda * (neighbor - x), neighbor drawn
// uniformly from the k nearest minority points (Euclidean, ties by index),
// lambda uniform on [0, 1).
std::vector<SmotePoint> SmoteOversample(std::span<const std::vector<double>> points,
                                        std::span<const Label> labels,
                                        const Label& minority_class, std::size_t k_neighbors,
                                        std::size_t n_new, std::uint64_t seed);

}  // namespace augscore

#endif  // AUGSCORE_AUGMENT_HPP_
