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

#include "augscore/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "augscore/error.hpp"

namespace augscore {

ConfusionMatrix::ConfusionMatrix(LabelSpace label_space)
    : label_space_(std::move(label_space)),
      counts_(label_space_.size() * label_space_.size(), 0) {
  if (label_space_.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "confusion matrix needs a label space");
  }
}

std::size_t ConfusionMatrix::total() const {
  return std::accumulate(counts_.begin(), counts_.end(), std::size_t{0});
}

ConfusionMatrix::Binary ConfusionMatrix::BinaryView(std::size_t positive) const {
  Binary b;
  for (std::size_t a = 0; a < classes(); ++a) {
    for (std::size_t p = 0; p < classes(); ++p) {
      const std::size_t n = at(a, p);
      if (a == positive && p == positive) {
        b.tp += n;
      } else if (a == positive) {
        b.fn += n;
      } else if (p == positive) {
        b.fp += n;
      } else {
        b.tn += n;
      }
    }
  }
  return b;
}

ConfusionMatrix BuildConfusionMatrix(std::span<const Label> truth,
                                     std::span<const Label> predicted,
                                     const LabelSpace& label_space) {
  if (truth.size() != predicted.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "truth has " + std::to_string(truth.size()) + " labels, predictions " +
                    std::to_string(predicted.size()));
  }
  auto index = [&](const Label& l) {
    auto it = std::find(label_space.begin(), label_space.end(), l);
    if (it == label_space.end()) {
      throw Error(ErrorCode::kNotFound, "label '" + l + "' not in label space");
    }
    return static_cast<std::size_t>(it - label_space.begin());
  };
  ConfusionMatrix cm(label_space);
  for (std::size_t i = 0; i < truth.size(); ++i) cm.Add(index(truth[i]), index(predicted[i]));
  return cm;
}

const char* AveragingName(Averaging averaging) {
  return averaging == Averaging::kMacro ? "macro" : "binary";
}

double MetricReport::Get(const std::string& metric) const {
  if (metric == "accuracy") return accuracy;
  if (metric == "precision") return precision;
  if (metric == "recall") return recall;
  if (metric == "f1") return f1;
  throw Error(ErrorCode::kNotFound, "unknown metric '" + metric + "'");
}

namespace {

struct BinaryMetrics {
  double precision, recall, f1;
  bool precision_undefined, recall_undefined, f1_undefined;
};

double Ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

BinaryMetrics FromCounts(const ConfusionMatrix::Binary& b) {
  BinaryMetrics m;
  m.precision = Ratio(b.tp, b.tp + b.fp);
  m.recall = Ratio(b.tp, b.tp + b.fn);
  m.f1 = Ratio(2 * b.tp, 2 * b.tp + b.fp + b.fn);
  m.precision_undefined = b.tp + b.fp == 0;
  m.recall_undefined = b.tp + b.fn == 0;
  m.f1_undefined = 2 * b.tp + b.fp + b.fn == 0;
  return m;
}

}  // namespace

MetricReport ComputeMetrics(const ConfusionMatrix& cm, const Scoring& scoring) {
  const std::size_t total = cm.total();
  if (total == 0) throw Error(ErrorCode::kInvalidArgument, "confusion matrix is empty");
  MetricReport r;
  r.averaging = scoring.averaging;
  if (scoring.averaging == Averaging::kBinaryPositive) {
    auto it = std::find(cm.label_space().begin(), cm.label_space().end(), scoring.positive);
    if (it == cm.label_space().end()) {
      throw Error(ErrorCode::kNotFound,
                  "positive class '" + scoring.positive + "' not in label space");
    }
    const auto b = cm.BinaryView(static_cast<std::size_t>(it - cm.label_space().begin()));
    const auto m = FromCounts(b);
    r.accuracy = Ratio(b.tp + b.tn, total);
    r.precision = m.precision;
    r.recall = m.recall;
    r.f1 = m.f1;
    if (m.precision_undefined) r.undefined.insert("precision");
    if (m.recall_undefined) r.undefined.insert("recall");
    if (m.f1_undefined) r.undefined.insert("f1");
    return r;
  }

  std::size_t correct = 0;
  for (std::size_t c = 0; c < cm.classes(); ++c) correct += cm.at(c, c);
  r.accuracy = Ratio(correct, total);
  double p_sum = 0.0, r_sum = 0.0, f_sum = 0.0;
  for (std::size_t c = 0; c < cm.classes(); ++c) {
    const auto m = FromCounts(cm.BinaryView(c));
    r.per_class_precision.push_back(m.precision);
    r.per_class_recall.push_back(m.recall);
    r.per_class_f1.push_back(m.f1);
    p_sum += m.precision;
    r_sum += m.recall;
    f_sum += m.f1;
    if (m.precision_undefined) r.undefined.insert("precision");
    if (m.recall_undefined) r.undefined.insert("recall");
    if (m.f1_undefined) r.undefined.insert("f1");
  }
  const double n = static_cast<double>(cm.classes());
  r.precision = p_sum / n;
  r.recall = r_sum / n;
  r.f1 = f_sum / n;
  return r;
}

MetricSummary Summarize(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::kInvalidArgument, "nothing to summarize");
  MetricSummary s;
  s.n = values.size();
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(s.n);
  if (s.n == 1) {
    s.sd = 0.0;
    s.sd_undefined = true;
    return s;
  }
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.sd = std::sqrt(ss / static_cast<double>(s.n - 1));
  return s;
}

const MetricSummary& AggregateReport::Get(const std::string& metric) const {
  if (metric == "accuracy") return accuracy;
  if (metric == "precision") return precision;
  if (metric == "recall") return recall;
  if (metric == "f1") return f1;
  throw Error(ErrorCode::kNotFound, "unknown metric '" + metric + "'");
}

AggregateReport AggregateReports(std::span<const MetricReport> reports) {
  if (reports.empty()) throw Error(ErrorCode::kInvalidArgument, "no reports to aggregate");
  for (const auto& r : reports) {
    if (r.averaging != reports[0].averaging) {
      throw Error(ErrorCode::kInvalidArgument, "reports mix averaging modes");
    }
  }
  auto column = [&](double MetricReport::*field) {
    std::vector<double> v;
    for (const auto& r : reports) v.push_back(r.*field);
    return Summarize(v);
  };
  AggregateReport a;
  a.accuracy = column(&MetricReport::accuracy);
  a.precision = column(&MetricReport::precision);
  a.recall = column(&MetricReport::recall);
  a.f1 = column(&MetricReport::f1);
  return a;
}

}  // namespace augscore
