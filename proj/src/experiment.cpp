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

#include "augscore/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <json.hpp>
#include <map>
#include <set>
#include <thread>

#include "augscore/error.hpp"
#include "augscore/hash.hpp"
#include "csv.hpp"

namespace augscore {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

const char* ArmName(Arm arm) {
  switch (arm) {
    case Arm::kLlmAugment: return "llm_augment";
    case Arm::kGoldStandard: return "gold_standard";
    case Arm::kSmote: return "smote";
    case Arm::kNone: return "none";
  }
  return "none";
}

Arm ParseArm(const std::string& name) {
  if (name == "llm_augment") return Arm::kLlmAugment;
  if (name == "gold_standard") return Arm::kGoldStandard;
  if (name == "smote") return Arm::kSmote;
  if (name == "none") return Arm::kNone;
  throw Error(ErrorCode::kNotFound, "unknown arm '" + name + "'");
}

const char* SplitName(SplitKind split) { return split == SplitKind::kVal ? "val" : "test"; }

// --- config -----------------------------------------------------------------

void SweepConfig::Validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::kValidation, m); };
  if (dataset_path.empty()) fail("config: dataset path is required");
  if (label_space.size() < 2) fail("config: label_space needs at least two classes");
  auto in_space = [&](const Label& l) {
    return std::find(label_space.begin(), label_space.end(), l) != label_space.end();
  };
  if (!in_space(target_class)) fail("config: target_class '" + target_class + "' not in label_space");
  if (!positive_class.empty() && !in_space(positive_class)) {
    fail("config: positive_class '" + positive_class + "' not in label_space");
  }
  if (proportions.empty()) fail("config: proportion grid is empty");
  for (std::size_t i = 0; i < proportions.size(); ++i) {
    if (!(proportions[i] >= 0.0 && proportions[i] <= 1.0)) {
      fail("config: proportions must lie within [0, 1]");
    }
    if (i > 0 && !(proportions[i] > proportions[i - 1])) {
      fail("config: proportions must be sorted and unique");
    }
  }
  if (repetitions < 1) fail("config: repetitions must be >= 1");
  if (arms.empty()) fail("config: at least one arm is required");
  std::set<Arm> unique(arms.begin(), arms.end());
  if (unique.size() != arms.size()) fail("config: duplicate arm");
  if (unique.count(Arm::kLlmAugment) && template_path.empty()) {
    fail("config: llm_augment arm needs a template path");
  }
  if (unique.count(Arm::kGoldStandard) && gold_standard_path.empty()) {
    fail("config: gold_standard arm needs a gold-standard pool path");
  }
  if (k_per_exemplar < 1) fail("config: k_per_exemplar must be >= 1");
  if (n_learn_examples < 1) fail("config: learn_examples must be >= 1");
  if (averaging != "auto" && averaging != "binary" && averaging != "macro") {
    fail("config: averaging must be auto, binary or macro");
  }
  if (backend.kind != "mock" && backend.kind != "http") fail("config: backend kind must be mock or http");
  if (backend.kind == "http" && backend.endpoint.empty()) fail("config: http backend needs an endpoint");
  if (!(saturation_theta > 0.0 && saturation_theta <= 1.0)) fail("config: saturation theta must be in (0, 1]");
  if (saturation_delta < 0.0) fail("config: saturation delta must be >= 0");
  if (!(completeness_floor >= 0.0 && completeness_floor <= 1.0)) {
    fail("config: completeness_floor must be within [0, 1]");
  }
}

Scoring SweepConfig::ScoringRule() const {
  Scoring s;
  const Label positive = positive_class.empty() ? target_class : positive_class;
  if (averaging == "macro" || (averaging == "auto" && label_space.size() != 2)) {
    s.averaging = Averaging::kMacro;
  } else {
    s.averaging = Averaging::kBinaryPositive;
    s.positive = positive;
  }
  return s;
}

namespace {

std::string LabelString(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  throw Error(ErrorCode::kParse, "config: labels must be strings or integers");
}

std::string Resolve(const std::string& base_dir, const std::string& path) {
  if (path.empty() || base_dir.empty() || fs::path(path).is_absolute()) return path;
  return (fs::path(base_dir) / path).lexically_normal().string();
}

void RejectUnknownKeys(const json& obj, std::initializer_list<const char*> known,
                       const std::string& where) {
  for (const auto& [key, _] : obj.items()) {
    if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; })) {
      throw Error(ErrorCode::kParse, where + ": unknown key '" + key + "'");
    }
  }
}

}  // namespace

SweepConfig ParseSweepConfig(const std::string& json_text, const std::string& base_dir) {
  json obj;
  try {
    obj = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse, std::string("config is not valid JSON: ") + e.what());
  }
  if (!obj.is_object()) throw Error(ErrorCode::kParse, "config must be a JSON object");
  RejectUnknownKeys(obj,
                    {"task", "dataset", "label_space", "target_class", "split", "proportions",
                     "repetitions", "arms", "gold_standard_pool", "template", "k_per_exemplar",
                     "learn_examples", "base_seed", "backend", "output_dir", "cache_dir", "cache",
                     "fresh", "classifier", "averaging", "positive_class", "completeness_floor",
                     "smote_k", "saturation", "workers"},
                    "config");
  SweepConfig c;
  try {
    c.task = obj.value("task", c.task);
    c.dataset_path = Resolve(base_dir, obj.value("dataset", std::string()));
    for (const auto& l : obj.value("label_space", json::array())) c.label_space.push_back(LabelString(l));
    if (obj.contains("target_class")) c.target_class = LabelString(obj["target_class"]);
    if (obj.contains("split")) {
      const auto& s = obj["split"];
      RejectUnknownKeys(s, {"val_per_class", "test_per_class"}, "config.split");
      c.val_per_class = s.value("val_per_class", std::size_t{0});
      c.test_per_class = s.value("test_per_class", std::size_t{0});
    }
    if (obj.contains("proportions")) c.proportions = obj["proportions"].get<std::vector<double>>();
    c.repetitions = obj.value("repetitions", c.repetitions);
    if (obj.contains("arms")) {
      c.arms.clear();
      for (const auto& a : obj["arms"]) c.arms.push_back(ParseArm(a.get<std::string>()));
    }
    c.gold_standard_path = Resolve(base_dir, obj.value("gold_standard_pool", std::string()));
    c.template_path = Resolve(base_dir, obj.value("template", std::string()));
    c.k_per_exemplar = obj.value("k_per_exemplar", c.k_per_exemplar);
    c.n_learn_examples = obj.value("learn_examples", c.n_learn_examples);
    c.base_seed = obj.value("base_seed", c.base_seed);
    if (obj.contains("backend")) {
      const auto& b = obj["backend"];
      RejectUnknownKeys(b,
                        {"kind", "endpoint", "model", "timeout_seconds", "max_in_flight",
                         "max_attempts", "temperature", "top_p", "seed"},
                        "config.backend");
      c.backend.kind = b.value("kind", c.backend.kind);
      c.backend.endpoint = b.value("endpoint", c.backend.endpoint);
      c.backend.model_name = b.value("model", c.backend.model_name);
      c.backend.timeout_seconds = b.value("timeout_seconds", c.backend.timeout_seconds);
      c.backend.max_in_flight = b.value("max_in_flight", c.backend.max_in_flight);
      c.backend.max_attempts = b.value("max_attempts", c.backend.max_attempts);
      c.backend.temperature = b.value("temperature", c.backend.temperature);
      c.backend.top_p = b.value("top_p", c.backend.top_p);
      c.backend.seed = b.value("seed", c.backend.seed);
    }
    c.output_dir = Resolve(base_dir, obj.value("output_dir", std::string()));
    c.cache_dir = Resolve(base_dir, obj.value("cache_dir", std::string()));
    c.use_cache = obj.value("cache", c.use_cache);
    c.fresh = obj.value("fresh", c.fresh);
    if (obj.contains("classifier")) {
      const auto& t = obj["classifier"];
      RejectUnknownKeys(t, {"learning_rate", "epochs", "l2", "snapshot_interval", "min_doc_freq"},
                        "config.classifier");
      c.train.learning_rate = t.value("learning_rate", c.train.learning_rate);
      c.train.epochs = t.value("epochs", c.train.epochs);
      c.train.l2 = t.value("l2", c.train.l2);
      c.train.snapshot_interval = t.value("snapshot_interval", c.train.snapshot_interval);
      c.min_doc_freq = t.value("min_doc_freq", c.min_doc_freq);
    }
    c.averaging = obj.value("averaging", c.averaging);
    if (obj.contains("positive_class")) c.positive_class = LabelString(obj["positive_class"]);
    c.completeness_floor = obj.value("completeness_floor", c.completeness_floor);
    c.smote_k = obj.value("smote_k", c.smote_k);
    if (obj.contains("saturation")) {
      const auto& s = obj["saturation"];
      RejectUnknownKeys(s, {"theta", "delta"}, "config.saturation");
      c.saturation_theta = s.value("theta", c.saturation_theta);
      c.saturation_delta = s.value("delta", c.saturation_delta);
    }
    c.workers = obj.value("workers", c.workers);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("config: ") + e.what());
  }
  return c;
}

SweepConfig LoadSweepConfig(const std::string& path) {
  const std::string base = fs::path(path).parent_path().string();
  return ParseSweepConfig(csv::ReadFile(path), base);
}

std::string ConfigHash(const SweepConfig& c) {
  json h;
  h["task"] = c.task;
  h["dataset"] = c.dataset_path;
  h["label_space"] = c.label_space;
  h["target_class"] = c.target_class;
  h["split"] = {c.val_per_class, c.test_per_class};
  h["proportions"] = c.proportions;
  h["repetitions"] = c.repetitions;
  std::vector<std::string> arms;
  for (Arm a : c.arms) arms.push_back(ArmName(a));
  h["arms"] = arms;
  h["gold"] = c.gold_standard_path;
  h["template"] = c.template_path;
  h["k"] = c.k_per_exemplar;
  h["learn"] = c.n_learn_examples;
  h["base_seed"] = c.base_seed;
  h["backend"] = {c.backend.kind,        c.backend.endpoint,     c.backend.model_name,
                  c.backend.max_attempts, c.backend.temperature, c.backend.top_p,
                  c.backend.seed};
  h["train"] = {c.train.learning_rate, c.train.epochs, c.train.l2, c.train.snapshot_interval,
                c.min_doc_freq};
  h["averaging"] = c.averaging;
  h["positive"] = c.positive_class;
  h["floor"] = c.completeness_floor;
  h["smote_k"] = c.smote_k;
  h["saturation"] = {c.saturation_theta, c.saturation_delta};
  return Sha256Hex(h.dump());
}

// --- repetitions ------------------------------------------------------------

RepetitionSeeds SeedsForRepetition(std::uint64_t base_seed, std::size_t repetition) {
  const std::uint64_t base = base_seed + repetition;
  return RepetitionSeeds{DeriveSeed(base, "split"), DeriveSeed(base, "learn"),
                         DeriveSeed(base, "mix"), DeriveSeed(base, "gold"),
                         DeriveSeed(base, "smote")};
}

SweepInputs LoadSweepInputs(const SweepConfig& config) {
  SweepInputs in{LoadDataset(config.dataset_path, FormatFromPath(config.dataset_path),
                             config.label_space, config.task),
                 std::nullopt, std::nullopt};
  for (const auto& item : in.data.items()) {
    if (item.source != Source::kOriginal) {
      throw Error(ErrorCode::kValidation,
                  "dataset item '" + item.id + "' is not original data; val/test must be original");
    }
  }
  const bool llm = std::find(config.arms.begin(), config.arms.end(), Arm::kLlmAugment) !=
                   config.arms.end();
  const bool gold = std::find(config.arms.begin(), config.arms.end(), Arm::kGoldStandard) !=
                    config.arms.end();
  if (llm) {
    in.prompt_template = LoadTemplate(config.template_path);
    auto issues = ValidateTemplate(*in.prompt_template, &config.label_space);
    if (!issues.empty()) throw Error(ErrorCode::kValidation, "template: " + issues[0]);
  }
  if (gold) {
    Dataset g = LoadDataset(config.gold_standard_path, FormatFromPath(config.gold_standard_path),
                            config.label_space, config.task);
    std::vector<LabeledResponse> items = g.items();
    std::set<std::string> data_ids;
    for (const auto& item : in.data.items()) data_ids.insert(item.id);
    for (auto& item : items) {
      if (data_ids.count(item.id)) {
        throw Error(ErrorCode::kValidation,
                    "gold-standard id '" + item.id + "' also appears in the dataset");
      }
      item.source = Source::kGoldStandard;
    }
    in.gold = Dataset(std::move(items), config.label_space, config.task);
  }
  return in;
}

RepetitionContext PrepareRepetition(const SweepConfig& config, const SweepInputs& inputs,
                                    LlmClient* client, std::size_t repetition) {
  RepetitionContext ctx;
  ctx.repetition = repetition;
  ctx.seeds = SeedsForRepetition(config.base_seed, repetition);
  ctx.partition = PartitionDataset(
      inputs.data, SplitPlan{config.val_per_class, config.test_per_class, ctx.seeds.split});

  const auto minority = ctx.partition.train.OfClass(config.target_class).size();
  ctx.reference_pool_size = config.k_per_exemplar * minority;

  if (inputs.prompt_template) {
    if (client == nullptr) throw Error(ErrorCode::kInvalidArgument, "llm_augment arm needs a client");
    AugmentOptions options;
    options.k_per_exemplar = config.k_per_exemplar;
    options.n_learn_examples = config.n_learn_examples;
    options.learn_seed = ctx.seeds.learn;
    options.completeness_floor = config.completeness_floor;
    options.request.model_name = config.backend.model_name;
    options.request.temperature = config.backend.temperature;
    options.request.top_p = config.backend.top_p;
    options.request.max_attempts = config.backend.max_attempts;
    ctx.llm_pool = BuildAugmentPool(ctx.partition.train, config.target_class,
                                    *inputs.prompt_template, *client, options);
    ctx.reference_pool_size = ctx.llm_pool->items.size();
  }
  if (inputs.gold) {
    std::vector<LabeledResponse> gold = inputs.gold->items();
    if (gold.size() < ctx.reference_pool_size) {
      throw Error(ErrorCode::kInfeasible,
                  "gold-standard pool has " + std::to_string(gold.size()) +
                      " items, repetition " + std::to_string(repetition) + " needs " +
                      std::to_string(ctx.reference_pool_size));
    }
    Rng rng(ctx.seeds.gold);
    rng.Shuffle(std::span<LabeledResponse>(gold));
    gold.resize(ctx.reference_pool_size);
    ctx.gold_pool = std::move(gold);
  }
  return ctx;
}

namespace {

MetricReport Score(const SweepConfig& config, const std::vector<Label>& truth,
                   const std::vector<Label>& predicted) {
  return ComputeMetrics(BuildConfusionMatrix(truth, predicted, config.label_space),
                        config.ScoringRule());
}

std::vector<Label> Truth(const Dataset& d) {
  std::vector<Label> out;
  for (const auto& item : d.items()) out.push_back(item.label);
  return out;
}

// SMOTE works on reference-classifier features, so this arm trains the
// reference model directly.
std::pair<std::vector<Label>, std::vector<Label>> RunSmoteArm(const SweepConfig& config,
                                                              const RepetitionContext& ctx,
                                                              std::size_t n_new) {
  const Dataset& train = ctx.partition.train;
  const auto texts = train.Texts();
  Featurizer featurizer = Featurizer::Fit(texts, config.min_doc_freq);
  auto x = featurizer.ApplyAll(texts);
  std::vector<std::size_t> y;
  std::vector<Label> labels;
  for (const auto& item : train.items()) {
    y.push_back(train.LabelIndex(item.label));
    labels.push_back(item.label);
  }
  if (n_new > 0) {
    std::vector<std::vector<double>> dense;
    for (const auto& v : x) dense.push_back(v.ToDense(featurizer.dimension()));
    auto synthetic = SmoteOversample(dense, labels, config.target_class, config.smote_k, n_new,
                                     ctx.seeds.smote);
    const std::size_t target = train.LabelIndex(config.target_class);
    for (const auto& p : synthetic) {
      x.push_back(SparseVector::FromDense(p.features));
      y.push_back(target);
    }
  }
  const Dataset& val = ctx.partition.val;
  auto vx = featurizer.ApplyAll(val.Texts());
  std::vector<std::size_t> vy;
  for (const auto& item : val.items()) vy.push_back(train.LabelIndex(item.label));
  ReferenceModel model{featurizer, TrainClassifier(x, y, vx, vy, train.label_space(),
                                                   featurizer.dimension(), config.train)};
  auto predict = [&](const Dataset& d) {
    std::vector<Label> out;
    for (auto& p : model.Predict(d.Texts())) out.push_back(p.label);
    return out;
  };
  return {predict(val), predict(ctx.partition.test)};
}

}  // namespace

std::pair<Cell, Cell> EvaluateCell(const SweepConfig& config, const RepetitionContext& ctx,
                                   Arm arm, double proportion, const ScorerTrainer& trainer) {
  Cell val_cell;
  val_cell.arm = arm;
  val_cell.proportion = proportion;
  val_cell.repetition = ctx.repetition;
  val_cell.split = SplitKind::kVal;
  Cell test_cell = val_cell;
  test_cell.split = SplitKind::kTest;

  try {
    const MixSpec spec{proportion, ctx.seeds.mix};
    std::vector<Label> val_pred, test_pred;
    std::size_t added = 0;
    std::size_t train_size = ctx.partition.train.size();
    if (arm == Arm::kSmote) {
      added = MixCount(proportion, ctx.reference_pool_size);
      std::tie(val_pred, test_pred) = RunSmoteArm(config, ctx, added);
      train_size += added;
    } else {
      Dataset mixed = ctx.partition.train;
      if (arm == Arm::kLlmAugment) {
        if (!ctx.llm_pool) throw Error(ErrorCode::kInvalidArgument, "no LLM pool for this repetition");
        mixed = MixTrainingSet(ctx.partition.train, ctx.llm_pool->items, spec);
      } else if (arm == Arm::kGoldStandard) {
        mixed = MixTrainingSet(ctx.partition.train, ctx.gold_pool, spec);
      }
      added = mixed.size() - ctx.partition.train.size();
      train_size = mixed.size();
      const ScorerTrainer& train_fn =
          trainer ? trainer : ReferenceTrainer(config.train, config.min_doc_freq);
      auto scorer = train_fn(mixed, ctx.partition.val);
      val_pred = PredictLabels(*scorer, ctx.partition.val.Texts());
      test_pred = PredictLabels(*scorer, ctx.partition.test.Texts());
    }
    val_cell.added_items = test_cell.added_items = added;
    val_cell.train_size = test_cell.train_size = train_size;
    val_cell.report = Score(config, Truth(ctx.partition.val), val_pred);
    test_cell.report = Score(config, Truth(ctx.partition.test), test_pred);
  } catch (const std::exception& e) {
    val_cell.error = test_cell.error = e.what();
    val_cell.report.reset();
    test_cell.report.reset();
  }
  return {std::move(val_cell), std::move(test_cell)};
}

namespace {

std::shared_ptr<Backend> MakeBackend(const BackendConfig& b) {
  if (b.kind == "mock") return std::make_shared<MockBackend>(b.seed);
  auto key = ApiKeyFromEnv();
  if (!key) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string("HTTP backend credential missing (set ") + kApiKeyEnv + ")");
  }
  return std::make_shared<HttpBackend>(HttpConfig{b.endpoint, *key, b.timeout_seconds},
                                       MakeHttpTransport());
}

}  // namespace

SweepResult RunSweep(const SweepConfig& config, const SweepOptions& options) {
  config.Validate();
  const SweepInputs inputs = LoadSweepInputs(config);

  std::unique_ptr<LlmClient> client;
  if (inputs.prompt_template) {
    ClientOptions copts;
    copts.cache_enabled = config.use_cache;
    copts.read_cache = !config.fresh;
    copts.max_in_flight = config.backend.max_in_flight;
    if (config.use_cache) {
      copts.cache_dir = !config.cache_dir.empty()
                            ? config.cache_dir
                            : (config.output_dir.empty()
                                   ? std::string()
                                   : (fs::path(config.output_dir) / "cache").string());
    }
    client = std::make_unique<LlmClient>(
        options.backend ? options.backend : MakeBackend(config.backend), copts);
  }

  SweepResult result;
  result.task = config.task;
  result.config_hash = ConfigHash(config);
  result.base_seed = config.base_seed;
  result.proportions = config.proportions;
  for (Arm a : {Arm::kLlmAugment, Arm::kGoldStandard, Arm::kSmote, Arm::kNone}) {
    if (std::find(config.arms.begin(), config.arms.end(), a) != config.arms.end()) {
      result.arms.push_back(a);
    }
  }
  result.template_version = inputs.prompt_template ? inputs.prompt_template->version : "";
  result.backend_kind = inputs.prompt_template ? config.backend.kind : "";
  result.model_name = inputs.prompt_template ? config.backend.model_name : "";
  result.saturation_theta = config.saturation_theta;
  result.saturation_delta = config.saturation_delta;

  if (options.write_pools && !config.output_dir.empty() && inputs.prompt_template) {
    fs::create_directories(fs::path(config.output_dir) / "pools");
  }

  for (std::size_t r = 0; r < config.repetitions; ++r) {
    RepetitionContext ctx = PrepareRepetition(config, inputs, client.get(), r);
    RepetitionRecord record;
    record.repetition = r;
    record.seeds = ctx.seeds;
    record.train_size = ctx.partition.train.size();
    record.val_size = ctx.partition.val.size();
    record.test_size = ctx.partition.test.size();
    record.reference_pool_size = ctx.reference_pool_size;
    if (ctx.llm_pool) {
      record.pool_manifest = PoolManifestJson(*ctx.llm_pool);
      if (options.write_pools && !config.output_dir.empty()) {
        SavePool(*ctx.llm_pool, config.label_space,
                 (fs::path(config.output_dir) / "pools" /
                  ("llm_augment_rep" + std::to_string(r) + ".jsonl"))
                     .string());
      }
    }
    result.repetitions.push_back(std::move(record));

    struct Task {
      Arm arm;
      double proportion;
    };
    std::vector<Task> tasks;
    for (Arm arm : result.arms) {
      for (double p : config.proportions) tasks.push_back({arm, p});
    }
    std::vector<std::pair<Cell, Cell>> outputs(tasks.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t i = next++; i < tasks.size(); i = next++) {
        outputs[i] = EvaluateCell(config, ctx, tasks[i].arm, tasks[i].proportion, options.trainer);
      }
    };
    const std::size_t n_workers = std::clamp<std::size_t>(config.workers, 1, tasks.size());
    if (n_workers == 1) {
      worker();
    } else {
      std::vector<std::thread> threads;
      for (std::size_t t = 0; t < n_workers; ++t) threads.emplace_back(worker);
      for (auto& th : threads) th.join();
    }
    for (auto& [v, t] : outputs) {
      result.cells.push_back(std::move(v));
      result.cells.push_back(std::move(t));
    }
  }

  std::stable_sort(result.cells.begin(), result.cells.end(), [](const Cell& a, const Cell& b) {
    if (a.arm != b.arm) return a.arm < b.arm;
    if (a.proportion != b.proportion) return a.proportion < b.proportion;
    if (a.repetition != b.repetition) return a.repetition < b.repetition;
    return a.split < b.split;
  });
  const auto rows = CellRows(result);
  result.aggregates = AggregateCellRows(rows);
  return result;
}

std::vector<CellRow> CellRows(const SweepResult& result) {
  std::vector<CellRow> rows;
  for (const auto& cell : result.cells) {
    CellRow base;
    base.task = result.task;
    base.arm = ArmName(cell.arm);
    base.proportion = cell.proportion;
    base.repetition = cell.repetition;
    base.split = SplitName(cell.split);
    if (!cell.report) {
      CellRow row = base;
      row.metric = "error";
      row.value = std::nan("");
      std::string message = cell.error;
      std::replace(message.begin(), message.end(), '\n', ' ');
      row.flags = "error: " + message;
      rows.push_back(std::move(row));
      continue;
    }
    for (const char* metric : kMetricNames) {
      CellRow row = base;
      row.metric = metric;
      row.value = cell.report->Get(metric);
      row.flags = cell.report->undefined.count(metric) ? "undefined" : "";
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::vector<AggregateRow> AggregateCellRows(std::span<const CellRow> rows) {
  using Key = std::tuple<std::string, std::string, double, std::string, std::string>;
  std::vector<Key> order;
  std::map<Key, std::vector<double>> values;
  for (const auto& row : rows) {
    if (row.metric == "error") continue;
    Key key{row.task, row.arm, row.proportion, row.split, row.metric};
    auto [it, inserted] = values.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.push_back(row.value);
  }
  std::vector<AggregateRow> out;
  for (const auto& key : order) {
    const auto summary = Summarize(values[key]);
    AggregateRow a;
    std::tie(a.task, a.arm, a.proportion, a.split, a.metric) = key;
    a.mean = summary.mean;
    a.sd = summary.sd;
    a.n = summary.n;
    out.push_back(std::move(a));
  }
  return out;
}

// --- saturation -------------------------------------------------------------

const char* SaturationKindName(SaturationKind kind) {
  switch (kind) {
    case SaturationKind::kSlopeBreak: return "slope_break";
    case SaturationKind::kPeakThenDecline: return "peak_then_decline";
    case SaturationKind::kNone: return "none";
  }
  return "none";
}

SaturationPoint DetectSaturation(std::span<const double> grid, std::span<const double> means,
                                 const SaturationParams& params, const std::string& metric) {
  if (grid.size() != means.size()) {
    throw Error(ErrorCode::kInvalidArgument, "grid and means differ in length");
  }
  if (grid.size() < 3) {
    throw Error(ErrorCode::kInvalidArgument, "saturation detection needs at least 3 points");
  }
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) {
      throw Error(ErrorCode::kInvalidArgument, "proportion grid must be strictly increasing");
    }
  }
  const double span = grid.back() - grid.front();
  std::vector<double> slopes;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const double dx = (grid[i + 1] - grid[i]) / span;
    slopes.push_back((means[i + 1] - means[i]) / dx);
  }

  SaturationPoint out;
  out.metric = metric;
  bool rising = false;
  for (std::size_t i = 0; i < slopes.size(); ++i) {
    if (slopes[i] > 0.0) {
      rising = true;
    } else if (slopes[i] < 0.0 && rising) {
      std::size_t peak = 0;
      for (std::size_t j = 1; j <= i; ++j) {
        if (means[j] > means[peak]) peak = j;
      }
      out.kind = SaturationKind::kPeakThenDecline;
      out.proportion = grid[peak];
      return out;
    }
  }
  for (std::size_t i = 0; i + 1 < slopes.size(); ++i) {
    if (slopes[i] > params.delta && slopes[i + 1] <= params.theta * slopes[i]) {
      out.kind = SaturationKind::kSlopeBreak;
      out.proportion = grid[i + 2];
      return out;
    }
  }
  return out;
}

// --- comparison -------------------------------------------------------------

std::vector<ComparisonRow> CompareArms(std::span<const AggregateRow> aggregates,
                                       const std::string& arm_a, const std::string& arm_b,
                                       const std::string& metric) {
  if (std::find(std::begin(kMetricNames), std::end(kMetricNames), metric) ==
      std::end(kMetricNames)) {
    throw Error(ErrorCode::kNotFound, "unknown metric '" + metric + "'");
  }
  for (const auto& arm : {arm_a, arm_b}) {
    bool present = std::any_of(aggregates.begin(), aggregates.end(),
                               [&](const AggregateRow& r) { return r.arm == arm; });
    if (!present) throw Error(ErrorCode::kNotFound, "arm '" + arm + "' not present in results");
  }
  auto split_rank = [](const std::string& s) { return s == "val" ? 0 : s == "test" ? 1 : 2; };
  using Key = std::tuple<double, int, std::string>;
  std::map<Key, ComparisonRow> rows;
  for (const auto& r : aggregates) {
    if (r.metric != metric || (r.arm != arm_a && r.arm != arm_b)) continue;
    auto& row = rows[Key{r.proportion, split_rank(r.split), r.split}];
    row.proportion = r.proportion;
    row.split = r.split;
    MetricSummary s{r.mean, r.sd, r.n, r.n == 1};
    if (r.arm == arm_a) row.a = s;
    if (r.arm == arm_b) row.b = s;
  }
  std::vector<ComparisonRow> out;
  for (auto& [_, row] : rows) {
    if (row.a && row.b) row.difference = row.a->mean - row.b->mean;
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace augscore
