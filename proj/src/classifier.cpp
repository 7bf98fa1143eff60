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

#include "augscore/classifier.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <map>
#include <numeric>
#include <set>

#include "augscore/error.hpp"
#include "augscore/metrics.hpp"
#include "csv.hpp"

namespace augscore {

using json = nlohmann::ordered_json;

std::vector<double> SparseVector::ToDense(std::size_t dimension) const {
  std::vector<double> dense(dimension, 0.0);
  for (std::size_t k = 0; k < index.size(); ++k) dense[index[k]] = value[k];
  return dense;
}

SparseVector SparseVector::FromDense(std::span<const double> dense) {
  SparseVector v;
  for (std::size_t j = 0; j < dense.size(); ++j) {
    if (dense[j] != 0.0) {
      v.index.push_back(static_cast<std::uint32_t>(j));
      v.value.push_back(dense[j]);
    }
  }
  return v;
}

std::vector<std::string> Tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (c < 0x80 && std::isalnum(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

Featurizer::Featurizer(std::vector<std::string> vocabulary, std::vector<double> idf,
                       std::size_t min_doc_freq)
    : vocabulary_(std::move(vocabulary)), idf_(std::move(idf)), min_doc_freq_(min_doc_freq) {
  if (vocabulary_.size() != idf_.size()) {
    throw Error(ErrorCode::kInvalidArgument, "vocabulary and idf differ in length");
  }
  for (std::size_t i = 0; i < vocabulary_.size(); ++i) {
    if (!(idf_[i] > 0.0)) throw Error(ErrorCode::kInvalidArgument, "idf values must be > 0");
    if (!lookup_.emplace(vocabulary_[i], i).second) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate vocabulary token " + vocabulary_[i]);
    }
  }
}

Featurizer Featurizer::Fit(std::span<const std::string> corpus, std::size_t min_doc_freq) {
  if (corpus.empty()) throw Error(ErrorCode::kInvalidArgument, "cannot fit on an empty corpus");
  std::map<std::string, std::size_t> doc_freq;
  for (const auto& doc : corpus) {
    auto tokens = Tokenize(doc);
    std::set<std::string> unique(tokens.begin(), tokens.end());
    for (const auto& t : unique) ++doc_freq[t];
  }
  const double n = static_cast<double>(corpus.size());
  std::vector<std::string> vocabulary;
  std::vector<double> idf;
  for (const auto& [token, df] : doc_freq) {  // std::map: lexicographic
    if (df < min_doc_freq) continue;
    vocabulary.push_back(token);
    idf.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(df))) + 1.0);
  }
  if (vocabulary.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "vocabulary is empty after min_doc_freq filtering");
  }
  return Featurizer(std::move(vocabulary), std::move(idf), min_doc_freq);
}

std::optional<std::size_t> Featurizer::IndexOf(const std::string& token) const {
  auto it = lookup_.find(token);
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

SparseVector Featurizer::Apply(std::string_view text) const {
  std::map<std::size_t, double> counts;
  for (const auto& token : Tokenize(text)) {
    auto it = lookup_.find(token);
    if (it != lookup_.end()) counts[it->second] += 1.0;
  }
  SparseVector v;
  double norm_sq = 0.0;
  for (const auto& [j, count] : counts) {
    const double w = count * idf_[j];
    v.index.push_back(static_cast<std::uint32_t>(j));
    v.value.push_back(w);
    norm_sq += w * w;
  }
  if (norm_sq > 0.0) {
    const double norm = std::sqrt(norm_sq);
    for (double& w : v.value) w /= norm;
  }
  return v;
}

std::vector<SparseVector> Featurizer::ApplyAll(std::span<const std::string> texts) const {
  std::vector<SparseVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(Apply(t));
  return out;
}

namespace {

void Scores(std::span<const double> weights, std::span<const double> bias,
            const SparseVector& x, std::size_t classes, std::size_t dimension,
            std::vector<double>& out) {
  out.assign(bias.begin(), bias.end());
  for (std::size_t c = 0; c < classes; ++c) {
    const double* row = weights.data() + c * dimension;
    double s = 0.0;
    for (std::size_t k = 0; k < x.index.size(); ++k) s += row[x.index[k]] * x.value[k];
    out[c] += s;
  }
}

// In-place softmax; returns log-sum-exp of the input scores.
double SoftmaxInPlace(std::vector<double>& scores) {
  const double max = *std::max_element(scores.begin(), scores.end());
  double sum = 0.0;
  for (double& s : scores) {
    s = std::exp(s - max);
    sum += s;
  }
  for (double& s : scores) s /= sum;
  return max + std::log(sum);
}

}  // namespace

std::vector<double> ClassifierModel::Probabilities(const SparseVector& x) const {
  std::vector<double> scores;
  Scores(weights, bias, x, classes(), dimension, scores);
  SoftmaxInPlace(scores);
  return scores;
}

LossAndGradient ComputeLossAndGradient(std::span<const double> weights,
                                       std::span<const double> bias,
                                       std::span<const SparseVector> features,
                                       std::span<const std::size_t> labels,
                                       std::size_t classes, std::size_t dimension,
                                       double l2) {
  LossAndGradient out;
  out.grad_weights.assign(classes * dimension, 0.0);
  out.grad_bias.assign(classes, 0.0);
  std::vector<double> scores;
  double loss = 0.0;
  for (std::size_t i = 0; i < features.size(); ++i) {
    const auto& x = features[i];
    Scores(weights, bias, x, classes, dimension, scores);
    const double true_score = scores[labels[i]];
    const double lse = SoftmaxInPlace(scores);
    loss += lse - true_score;
    for (std::size_t c = 0; c < classes; ++c) {
      const double g = scores[c] - (c == labels[i] ? 1.0 : 0.0);
      out.grad_bias[c] += g;
      double* row = out.grad_weights.data() + c * dimension;
      for (std::size_t k = 0; k < x.index.size(); ++k) row[x.index[k]] += g * x.value[k];
    }
  }
  const double inv_n = features.empty() ? 0.0 : 1.0 / static_cast<double>(features.size());
  loss *= inv_n;
  for (double& g : out.grad_bias) g *= inv_n;
  double w_sq = 0.0;
  for (std::size_t j = 0; j < out.grad_weights.size(); ++j) {
    out.grad_weights[j] = out.grad_weights[j] * inv_n + l2 * weights[j];
    w_sq += weights[j] * weights[j];
  }
  out.loss = loss + 0.5 * l2 * w_sq;
  return out;
}

std::size_t ArgmaxLowestTie(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

namespace {

bool SparseLess(const SparseVector& a, const SparseVector& b) {
  const std::size_t n = std::min(a.nnz(), b.nnz());
  for (std::size_t k = 0; k < n; ++k) {
    if (a.index[k] != b.index[k]) return a.index[k] < b.index[k];
    if (a.value[k] != b.value[k]) return a.value[k] < b.value[k];
  }
  return a.nnz() < b.nnz();
}

double ValidationMacroF1(const ClassifierModel& model, std::span<const SparseVector> features,
                         std::span<const std::size_t> labels) {
  ConfusionMatrix cm(model.label_space);
  for (std::size_t i = 0; i < features.size(); ++i) {
    cm.Add(labels[i], ArgmaxLowestTie(model.Probabilities(features[i])));
  }
  return ComputeMetrics(cm, Scoring{Averaging::kMacro, {}}).f1;
}

}  // namespace

ClassifierModel TrainClassifier(std::span<const SparseVector> features,
                                std::span<const std::size_t> labels,
                                std::span<const SparseVector> val_features,
                                std::span<const std::size_t> val_labels,
                                const LabelSpace& label_space, std::size_t dimension,
                                const TrainConfig& config) {
  const std::size_t classes = label_space.size();
  if (features.size() != labels.size() || val_features.size() != val_labels.size()) {
    throw Error(ErrorCode::kInvalidArgument, "features and labels differ in length");
  }
  if (!(config.learning_rate > 0.0) || config.l2 < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "learning rate must be > 0 and l2 >= 0");
  }
  std::set<std::size_t> distinct;
  for (auto y : labels) {
    if (y >= classes) throw Error(ErrorCode::kInvalidArgument, "label index out of range");
    distinct.insert(y);
  }
  for (auto y : val_labels) {
    if (y >= classes) throw Error(ErrorCode::kInvalidArgument, "label index out of range");
  }
  if (distinct.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "training data needs at least two distinct labels");
  }
  auto check_dims = [&](std::span<const SparseVector> xs) {
    for (const auto& x : xs) {
      if (x.index.size() != x.value.size() ||
          (!x.index.empty() && x.index.back() >= dimension)) {
        throw Error(ErrorCode::kInvalidArgument, "feature index outside the model dimension");
      }
    }
  };
  check_dims(features);
  check_dims(val_features);

  // Canonical item order makes the result independent of input order.
  std::vector<std::size_t> order(features.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (labels[a] != labels[b]) return labels[a] < labels[b];
    return SparseLess(features[a], features[b]);
  });
  std::vector<SparseVector> xs;
  std::vector<std::size_t> ys;
  xs.reserve(order.size());
  for (auto i : order) {
    xs.push_back(features[i]);
    ys.push_back(labels[i]);
  }

  ClassifierModel model;
  model.label_space = label_space;
  model.dimension = dimension;
  model.config = config;
  model.weights.assign(classes * dimension, 0.0);
  model.bias.assign(classes, 0.0);

  std::optional<ClassifierModel> best;
  const bool have_val = !val_features.empty();
  const std::size_t interval = std::max<std::size_t>(1, config.snapshot_interval);

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    auto lg = ComputeLossAndGradient(model.weights, model.bias, xs, ys, classes, dimension,
                                     config.l2);
    if (!std::isfinite(lg.loss)) {
      throw Error(ErrorCode::kNumeric, "training loss became non-finite at epoch " +
                                           std::to_string(epoch) +
                                           "; lower the learning rate");
    }
    model.loss_history.push_back(lg.loss);
    for (std::size_t j = 0; j < model.weights.size(); ++j) {
      model.weights[j] -= config.learning_rate * lg.grad_weights[j];
    }
    for (std::size_t c = 0; c < classes; ++c) {
      model.bias[c] -= config.learning_rate * lg.grad_bias[c];
    }
    if (have_val && (epoch % interval == 0 || epoch == config.epochs)) {
      const double f1 = ValidationMacroF1(model, val_features, val_labels);
      if (!best || f1 > best->selected_val_f1) {
        model.selected_epoch = epoch;
        model.selected_val_f1 = f1;
        best = model;
      }
    }
  }
  const double final_loss =
      ComputeLossAndGradient(model.weights, model.bias, xs, ys, classes, dimension, config.l2)
          .loss;
  if (!std::isfinite(final_loss)) {
    throw Error(ErrorCode::kNumeric, "training loss became non-finite; lower the learning rate");
  }
  model.loss_history.push_back(final_loss);

  if (best) {
    auto history = std::move(model.loss_history);
    model = std::move(*best);
    model.loss_history = std::move(history);
  } else {
    model.selected_epoch = config.epochs;
  }
  return model;
}

std::vector<Prediction> ReferenceModel::Predict(std::span<const std::string> texts) const {
  if (featurizer.dimension() != model.dimension) {
    throw Error(ErrorCode::kInvalidArgument, "featurizer and model dimensions differ");
  }
  std::vector<Prediction> out;
  out.reserve(texts.size());
  for (const auto& text : texts) {
    Prediction p;
    p.probabilities = model.Probabilities(featurizer.Apply(text));
    p.label_index = ArgmaxLowestTie(p.probabilities);
    p.label = model.label_space[p.label_index];
    out.push_back(std::move(p));
  }
  return out;
}

ReferenceModel TrainReferenceModel(const Dataset& train, const Dataset& val,
                                   const TrainConfig& config, std::size_t min_doc_freq) {
  if (train.empty()) throw Error(ErrorCode::kInvalidArgument, "training set is empty");
  const auto texts = train.Texts();
  Featurizer featurizer = Featurizer::Fit(texts, min_doc_freq);
  auto x = featurizer.ApplyAll(texts);
  std::vector<std::size_t> y;
  for (const auto& item : train.items()) y.push_back(train.LabelIndex(item.label));
  const auto val_texts = val.Texts();
  auto vx = featurizer.ApplyAll(val_texts);
  std::vector<std::size_t> vy;
  for (const auto& item : val.items()) vy.push_back(train.LabelIndex(item.label));
  ClassifierModel model = TrainClassifier(x, y, vx, vy, train.label_space(),
                                          featurizer.dimension(), config);
  return ReferenceModel{std::move(featurizer), std::move(model)};
}

std::string ModelToJson(const ReferenceModel& m) {
  json obj;
  obj["vocabulary"] = m.featurizer.vocabulary();
  obj["idf"] = m.featurizer.idf();
  json rows = json::array();
  for (std::size_t c = 0; c < m.model.classes(); ++c) {
    rows.push_back(std::vector<double>(
        m.model.weights.begin() + static_cast<std::ptrdiff_t>(c * m.model.dimension),
        m.model.weights.begin() + static_cast<std::ptrdiff_t>((c + 1) * m.model.dimension)));
  }
  obj["weights"] = rows;
  obj["bias"] = m.model.bias;
  obj["label_space"] = m.model.label_space;
  obj["train_config"] = {{"learning_rate", m.model.config.learning_rate},
                         {"epochs", m.model.config.epochs},
                         {"l2", m.model.config.l2},
                         {"snapshot_interval", m.model.config.snapshot_interval}};
  obj["featurizer_params"] = {{"min_doc_freq", m.featurizer.min_doc_freq()}};
  obj["selected_epoch"] = m.model.selected_epoch;
  return obj.dump();
}

ReferenceModel ModelFromJson(const std::string& json_text) {
  try {
    json obj = json::parse(json_text);
    Featurizer featurizer(obj.at("vocabulary").get<std::vector<std::string>>(),
                          obj.at("idf").get<std::vector<double>>(),
                          obj.at("featurizer_params").at("min_doc_freq").get<std::size_t>());
    ClassifierModel model;
    model.label_space = obj.at("label_space").get<LabelSpace>();
    model.dimension = featurizer.dimension();
    for (const auto& row : obj.at("weights")) {
      auto r = row.get<std::vector<double>>();
      if (r.size() != model.dimension) {
        throw Error(ErrorCode::kParse, "weight row length does not match vocabulary");
      }
      model.weights.insert(model.weights.end(), r.begin(), r.end());
    }
    model.bias = obj.at("bias").get<std::vector<double>>();
    if (model.bias.size() != model.classes() ||
        model.weights.size() != model.classes() * model.dimension) {
      throw Error(ErrorCode::kParse, "model matrix dimensions do not match label space");
    }
    const auto& tc = obj.at("train_config");
    model.config.learning_rate = tc.at("learning_rate").get<double>();
    model.config.epochs = tc.at("epochs").get<std::size_t>();
    model.config.l2 = tc.at("l2").get<double>();
    model.config.snapshot_interval = tc.at("snapshot_interval").get<std::size_t>();
    model.selected_epoch = obj.value("selected_epoch", std::size_t{0});
    return ReferenceModel{std::move(featurizer), std::move(model)};
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("malformed model file: ") + e.what());
  }
}

void SaveModel(const ReferenceModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out << ModelToJson(model) << "\n";
}

ReferenceModel LoadModel(const std::string& path) { return ModelFromJson(csv::ReadFile(path)); }

std::vector<std::vector<double>> ReferenceScorer::PredictProba(
    std::span<const std::string> texts) const {
  std::vector<std::vector<double>> out;
  for (auto& p : model_.Predict(texts)) out.push_back(std::move(p.probabilities));
  return out;
}

std::vector<Label> PredictLabels(const ProbabilisticScorer& scorer,
                                 std::span<const std::string> texts) {
  std::vector<Label> out;
  for (const auto& row : scorer.PredictProba(texts)) {
    out.push_back(scorer.label_space()[ArgmaxLowestTie(row)]);
  }
  return out;
}

ScorerTrainer ReferenceTrainer(TrainConfig config, std::size_t min_doc_freq) {
  return [config, min_doc_freq](const Dataset& train, const Dataset& val) {
    return std::make_unique<ReferenceScorer>(
        TrainReferenceModel(train, val, config, min_doc_freq));
  };
}

}  // namespace augscore
