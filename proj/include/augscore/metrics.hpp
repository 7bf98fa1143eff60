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

#ifndef AUGSCORE_METRICS_HPP_
#define AUGSCORE_METRICS_HPP_

#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "augscore/dataset.hpp"

namespace augscore {

// Rows are actual classes, columns predicted, both in label-space order.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(LabelSpace label_space);

  const LabelSpace& label_space() const { return label_space_; }
  std::size_t classes() const { return label_space_.size(); }
  std::size_t at(std::size_t actual, std::size_t predicted) const {
    return counts_[actual * classes() + predicted];
  }
  void Add(std::size_t actual, std::size_t predicted, std::size_t n = 1) {
    counts_[actual * classes() + predicted] += n;
  }
  std::size_t total() const;

  // One-vs-rest view for class `positive`.
  struct Binary {
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  };
  Binary BinaryView(std::size_t positive) const;

 private:
  LabelSpace label_space_;
  std::vector<std::size_t> counts_;
};

ConfusionMatrix BuildConfusionMatrix(std::span<const Label> truth,
                                     std::span<const Label> predicted,
                                     const LabelSpace& label_space);

enum class Averaging { kBinaryPositive, kMacro };
const char* AveragingName(Averaging averaging);

inline constexpr const char* kMetricNames[] = {"accuracy", "precision", "recall", "f1"};

struct MetricReport {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  // Metrics (by name) whose denominator was zero for at least one class.
  std::set<std::string> undefined;
  Averaging averaging = Averaging::kBinaryPositive;
  // Macro mode: per-class one-vs-rest values in label-space order.
  std::vector<double> per_class_precision, per_class_recall, per_class_f1;

  // Looks up one of kMetricNames; throws kNotFound otherwise.
  double Get(const std::string& metric) const;
};

struct Scoring {
  Averaging averaging = Averaging::kBinaryPositive;
  Label positive;  // used for kBinaryPositive
};

// Zero denominators give 0 and a flag, never an exception. Throws
// kInvalidArgument on an empty matrix.
MetricReport ComputeMetrics(const ConfusionMatrix& cm, const Scoring& scoring);

struct MetricSummary {
  double mean = 0.0;
  double sd = 0.0;  // sample (n - 1) standard deviation
  std::size_t n = 0;
  bool sd_undefined = false;  // n == 1
};

MetricSummary Summarize(std::span<const double> values);

struct AggregateReport {
  MetricSummary accuracy, precision, recall, f1;
  const MetricSummary& Get(const std::string& metric) const;
};

// Throws on an empty list or mixed averaging modes.
AggregateReport AggregateReports(std::span<const MetricReport> reports);

}  // namespace augscore

#endif  // AUGSCORE_METRICS_HPP_
