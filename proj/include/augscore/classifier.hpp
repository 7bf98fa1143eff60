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

#ifndef AUGSCORE_CLASSIFIER_HPP_
#define AUGSCORE_CLASSIFIER_HPP_

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "augscore/dataset.hpp"

namespace augscore {

struct SparseVector {
  std::vector<std::uint32_t> index;  // strictly increasing
  std::vector<double> value;

  std::size_t nnz() const { return index.size(); }
  std::vector<double> ToDense(std::size_t dimension) const;
  static SparseVector FromDense(std::span<const double> dense);
  bool operator==(const SparseVector&) const = default;
};

// Lowercased runs of ASCII alphanumerics; no stemming or stop-word removal.
std::vector<std::string> Tokenize(std::string_view text);

// Token counts weighted by idf(t) = ln((1 + N) / (1 + df(t))) + 1, then
// L2-normalised. Vocabulary is lexicographic over tokens with
// df >= min_doc_freq.
class Featurizer {
 public:
  Featurizer(std::vector<std::string> vocabulary, std::vector<double> idf,
             std::size_t min_doc_freq);

  static Featurizer Fit(std::span<const std::string> corpus, std::size_t min_doc_freq = 1);

  // All-out-of-vocabulary text gives the zero vector.
  SparseVector Apply(std::string_view text) const;
  std::vector<SparseVector> ApplyAll(std::span<const std::string> texts) const;

  std::optional<std::size_t> IndexOf(const std::string& token) const;
  const std::vector<std::string>& vocabulary() const { return vocabulary_; }
  const std::vector<double>& idf() const { return idf_; }
  std::size_t min_doc_freq() const { return min_doc_freq_; }
  std::size_t dimension() const { return vocabulary_.size(); }

 private:
  std::vector<std::string> vocabulary_;
  std::vector<double> idf_;
  std::size_t min_doc_freq_;
  std::unordered_map<std::string, std::size_t> lookup_;
};

struct TrainConfig {
  double learning_rate = 0.1;
  std::size_t epochs = 500;
  double l2 = 1e-4;
  std::size_t snapshot_interval = 50;
};

// Multinomial logistic regression over dense C x V weights (row-major).
struct ClassifierModel {
  LabelSpace label_space;
  std::size_t dimension = 0;
  std::vector<double> weights;
  std::vector<double> bias;
  TrainConfig config;
  // Objective value at the start of each epoch plus the final value.
  std::vector<double> loss_history;
  std::size_t selected_epoch = 0;
  double selected_val_f1 = 0.0;

  std::size_t classes() const { return label_space.size(); }
  std::vector<double> Probabilities(const SparseVector& x) const;
};

struct LossAndGradient {
  double loss = 0.0;
  std::vector<double> grad_weights;  // C x V row-major
  std::vector<double> grad_bias;
};

// Mean cross-entropy of softmax(Wx + b) plus (l2 / 2) * ||W||^2.
LossAndGradient ComputeLossAndGradient(std::span<const double> weights,
                                       std::span<const double> bias,
                                       std::span<const SparseVector> features,
                                       std::span<const std::size_t> labels,
                                       std::size_t classes, std::size_t dimension,
                                       double l2);

// Full-batch gradient descent from zero weights. Every snapshot_interval
// epochs (and at the last one) validation macro-F1 is measured; the best
// snapshot is returned. Throws kInvalidArgument with fewer than two distinct
// training labels and kNumeric on a non-finite objective.
ClassifierModel TrainClassifier(std::span<const SparseVector> features,
                                std::span<const std::size_t> labels,
                                std::span<const SparseVector> val_features,
                                std::span<const std::size_t> val_labels,
                                const LabelSpace& label_space, std::size_t dimension,
                                const TrainConfig& config);

// Index of the largest value; ties go to the lowest index.
std::size_t ArgmaxLowestTie(std::span<const double> values);

struct Prediction {
  Label label;
  std::size_t label_index = 0;
  std::vector<double> probabilities;
};

// The fitted featurizer and the model trained on its features.
struct ReferenceModel {
  Featurizer featurizer;
  ClassifierModel model;

  std::vector<Prediction> Predict(std::span<const std::string> texts) const;
};

ReferenceModel TrainReferenceModel(const Dataset& train, const Dataset& val,
                                   const TrainConfig& config, std::size_t min_doc_freq = 1);

std::string ModelToJson(const ReferenceModel& model);
ReferenceModel ModelFromJson(const std::string& json_text);
void SaveModel(const ReferenceModel& model, const std::string& path);
ReferenceModel LoadModel(const std::string& path);

// Contract for any scoring model: texts in, per-class probabilities out
// (rows sum to 1, columns in label-space order).
class ProbabilisticScorer {
 public:
  virtual ~ProbabilisticScorer() = default;
  virtual const LabelSpace& label_space() const = 0;
  virtual std::vector<std::vector<double>> PredictProba(
      std::span<const std::string> texts) const = 0;
};

// Argmax labels (lowest-index tie rule) from any scorer.
std::vector<Label> PredictLabels(const ProbabilisticScorer& scorer,
                                 std::span<const std::string> texts);

class ReferenceScorer : public ProbabilisticScorer {
 public:
  explicit ReferenceScorer(ReferenceModel model) : model_(std::move(model)) {}
  const LabelSpace& label_space() const override { return model_.model.label_space; }
  std::vector<std::vector<double>> PredictProba(
      std::span<const std::string> texts) const override;
  const ReferenceModel& model() const { return model_; }

 private:
  ReferenceModel model_;
};

using ScorerTrainer =
    std::function<std::unique_ptr<ProbabilisticScorer>(const Dataset& train, const Dataset& val)>;

ScorerTrainer ReferenceTrainer(TrainConfig config, std::size_t min_doc_freq = 1);

}  // namespace augscore

#endif  // AUGSCORE_CLASSIFIER_HPP_
