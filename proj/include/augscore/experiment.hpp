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

#ifndef AUGSCORE_EXPERIMENT_HPP_
#define AUGSCORE_EXPERIMENT_HPP_

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "augscore/augment.hpp"
#include "augscore/classifier.hpp"
#include "augscore/dataset.hpp"
#include "augscore/llm_client.hpp"
#include "augscore/metrics.hpp"
#include "augscore/prompt.hpp"

namespace augscore {

inline constexpr const char* kVersion = "0.3.0";

// Canonical order is the enum order; cells and reports follow it.
enum class Arm { kLlmAugment, kGoldStandard, kSmote, kNone };
const char* ArmName(Arm arm);
Arm ParseArm(const std::string& name);

enum class SplitKind { kVal, kTest };
const char* SplitName(SplitKind split);

struct BackendConfig {
  std::string kind = "mock";  // "mock" | "http"
  std::string endpoint;
  std::string model_name = "gpt-4";
  double timeout_seconds = 60.0;
  std::size_t max_in_flight = 4;
  std::size_t max_attempts = 5;
  double temperature = 0.0;
  double top_p = 0.01;
  std::uint64_t seed = 0;  // mock only
};

struct SweepConfig {
  std::string task = "task";
  std::string dataset_path;
  LabelSpace label_space;
  Label target_class;
  std::size_t val_per_class = 0;
  std::size_t test_per_class = 0;
  std::vector<double> proportions = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  std::size_t repetitions = 5;
  std::vector<Arm> arms = {Arm::kLlmAugment, Arm::kGoldStandard};
  std::string gold_standard_path;
  std::string template_path;
  std::size_t k_per_exemplar = 4;
  std::size_t n_learn_examples = 5;
  std::uint64_t base_seed = 0;
  BackendConfig backend;
  std::string output_dir;
  // Defaults to <output_dir>/cache when empty.
  std::string cache_dir;
  bool use_cache = true;
  // Ignore existing cache entries (regenerate).
  bool fresh = false;
  TrainConfig train;
  std::size_t min_doc_freq = 1;
  // "auto": binary on the positive class for two-class tasks, macro otherwise.
  std::string averaging = "auto";
  Label positive_class;  // defaults to target_class
  double completeness_floor = 0.9;
  std::size_t smote_k = 5;
  double saturation_theta = 0.5;
  double saturation_delta = 0.01;
  std::size_t workers = 1;

  // Throws kValidation on the first problem found.
  void Validate() const;
  Scoring ScoringRule() const;
};

// Relative paths are resolved against `base_dir`.
SweepConfig ParseSweepConfig(const std::string& json_text, const std::string& base_dir);
SweepConfig LoadSweepConfig(const std::string& path);

// Digest of every result-affecting field (output and cache locations are
// excluded).
std::string ConfigHash(const SweepConfig& config);

struct Cell {
  Arm arm = Arm::kNone;
  double proportion = 0.0;
  std::size_t repetition = 0;
  SplitKind split = SplitKind::kVal;
  std::optional<MetricReport> report;
  std::string error;  // set when the cell failed
  std::size_t added_items = 0;
  std::size_t train_size = 0;
};

// One metric value in long format, as written to cells.csv.
struct CellRow {
  std::string task;
  std::string arm;
  double proportion = 0.0;
  std::size_t repetition = 0;
  std::string split;
  std::string metric;
  double value = 0.0;
  std::string flags;
};

struct AggregateRow {
  std::string task;
  std::string arm;
  double proportion = 0.0;
  std::string split;
  std::string metric;
  double mean = 0.0;
  double sd = 0.0;
  std::size_t n = 0;
};

struct RepetitionSeeds {
  std::uint64_t split = 0, learn = 0, mix = 0, gold = 0, smote = 0;
};
RepetitionSeeds SeedsForRepetition(std::uint64_t base_seed, std::size_t repetition);

struct RepetitionRecord {
  std::size_t repetition = 0;
  RepetitionSeeds seeds;
  std::size_t train_size = 0, val_size = 0, test_size = 0;
  std::size_t reference_pool_size = 0;
  std::optional<std::string> pool_manifest;  // JSON
};

struct SweepResult {
  std::string task;
  std::string config_hash;
  std::uint64_t base_seed = 0;
  std::vector<double> proportions;
  std::vector<Arm> arms;
  std::vector<Cell> cells;  // sorted by arm, proportion, repetition, split
  std::vector<AggregateRow> aggregates;
  std::vector<RepetitionRecord> repetitions;
  std::string template_version;
  std::string backend_kind;
  std::string model_name;
  double saturation_theta = 0.5;
  double saturation_delta = 0.01;
};

// Everything one repetition's cells need.
struct RepetitionContext {
  std::size_t repetition = 0;
  RepetitionSeeds seeds;
  Partition partition;
  std::optional<AugmentationPool> llm_pool;
  std::vector<LabeledResponse> gold_pool;
  // Items each augmenting arm may add at proportion 1.
  std::size_t reference_pool_size = 0;
};

struct SweepInputs {
  Dataset data;
  std::optional<PromptTemplate> prompt_template;
  std::optional<Dataset> gold;
};

SweepInputs LoadSweepInputs(const SweepConfig& config);

// Partition, pool generation and gold-standard sampling for repetition `r`.
RepetitionContext PrepareRepetition(const SweepConfig& config, const SweepInputs& inputs,
                                    LlmClient* client, std::size_t repetition);

// Trains one (arm, proportion) model and scores it on val and test. Errors
// are captured in the returned cells, never thrown.
std::pair<Cell, Cell> EvaluateCell(const SweepConfig& config, const RepetitionContext& context,
                                   Arm arm, double proportion, const ScorerTrainer& trainer);

struct SweepOptions {
  // Replaces the backend described by config.backend.
  std::shared_ptr<Backend> backend;
  // Replaces the reference classifier (not used by the smote arm).
  ScorerTrainer trainer;
  // Write pools/ under config.output_dir.
  bool write_pools = false;
};

SweepResult RunSweep(const SweepConfig& config, const SweepOptions& options = {});

std::vector<CellRow> CellRows(const SweepResult& result);

// Mean / sample sd per (task, arm, proportion, split, metric) in order of
// first appearance; error rows are skipped.
std::vector<AggregateRow> AggregateCellRows(std::span<const CellRow> rows);

// --- saturation -------------------------------------------------------------

enum class SaturationKind { kSlopeBreak, kPeakThenDecline, kNone };
const char* SaturationKindName(SaturationKind kind);

struct SaturationPoint {
  std::optional<double> proportion;
  SaturationKind kind = SaturationKind::kNone;
  std::string metric;
};

struct SaturationParams {
  double theta = 0.5;
  double delta = 0.01;
};

// Slopes are taken on the proportion axis rescaled to [0, 1]. A decline after
// a rising run reports the running maximum (peak_then_decline); otherwise the
// first slope that drops to <= theta of a preceding slope > delta reports the
// end of the flattened segment (slope_break).
SaturationPoint DetectSaturation(std::span<const double> grid, std::span<const double> means,
                                 const SaturationParams& params = {},
                                 const std::string& metric = "");

// --- arm comparison ---------------------------------------------------------

struct ComparisonRow {
  double proportion = 0.0;
  std::string split;
  std::optional<MetricSummary> a;
  std::optional<MetricSummary> b;
  std::optional<double> difference;  // mean(a) - mean(b)
};

std::vector<ComparisonRow> CompareArms(std::span<const AggregateRow> aggregates,
                                       const std::string& arm_a, const std::string& arm_b,
                                       const std::string& metric);

}  // namespace augscore

#endif  // AUGSCORE_EXPERIMENT_HPP_
