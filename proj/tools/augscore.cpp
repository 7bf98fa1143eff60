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

// Command-line front end over the augscore C API.

#include <CLI11.hpp>
#include <algorithm>
#include <cstdint>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "augscore/augscore.h"

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct RuntimeFailure {
  augscore_status status;
  std::string message;
};

void Check(augscore_status status) {
  if (status != AUGSCORE_OK) throw RuntimeFailure{status, augscore_last_error()};
}

std::string Num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::vector<std::string> SplitList(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::vector<const char*> CStrings(const std::vector<std::string>& v) {
  std::vector<const char*> out;
  for (const auto& s : v) out.push_back(s.c_str());
  return out;
}

template <typename T, void (*Free)(T*)>
struct Handle {
  T* ptr = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() {
    if (ptr) Free(ptr);
  }
  T** out() { return &ptr; }
  T* get() const { return ptr; }
};

using Dataset = Handle<augscore_dataset, augscore_dataset_free>;
using Template = Handle<augscore_template, augscore_template_free>;
using Client = Handle<augscore_client, augscore_client_free>;
using Pool = Handle<augscore_pool, augscore_pool_free>;
using Model = Handle<augscore_model, augscore_model_free>;
using Sweep = Handle<augscore_sweep, augscore_sweep_free>;
using Aggregates = Handle<augscore_aggregates, augscore_aggregates_free>;
using Comparison = Handle<augscore_comparison, augscore_comparison_free>;
using Strings = Handle<augscore_strings, augscore_strings_free>;

void LoadData(const std::string& path, const std::string& labels, const std::string& task,
              Dataset& out) {
  const auto names = SplitList(labels);
  const auto cnames = CStrings(names);
  Check(augscore_dataset_load(path.c_str(), cnames.data(), cnames.size(), task.c_str(), out.out()));
}

// --- commands ---------------------------------------------------------------

struct AnalyzeArgs {
  std::string data, labels, task = "task";
};

void RunAnalyze(const AnalyzeArgs& a) {
  Dataset d;
  LoadData(a.data, a.labels, a.task, d);
  const size_t n = augscore_dataset_label_count(d.get());
  std::vector<size_t> counts(n);
  Check(augscore_dataset_histogram(d.get(), counts.data(), n));
  std::cout << "label\tcount\n";
  size_t lo = SIZE_MAX, hi = 0;
  for (size_t i = 0; i < n; ++i) {
    std::cout << augscore_dataset_label_name(d.get(), i) << "\t" << counts[i] << "\n";
    lo = std::min(lo, counts[i]);
    hi = std::max(hi, counts[i]);
  }
  std::cout << "total\t" << augscore_dataset_size(d.get()) << "\n";
  std::cout << "imbalance_ratio\t"
            << (lo == 0 ? std::string("inf") : Num(static_cast<double>(hi) / static_cast<double>(lo)))
            << "\n";
}

struct ValidateArgs {
  std::string tpl, labels;
};

void RunValidatePrompt(const ValidateArgs& a) {
  Template t;
  Check(augscore_template_load(a.tpl.c_str(), t.out()));
  const auto names = a.labels.empty() ? std::vector<std::string>{} : SplitList(a.labels);
  const auto cnames = CStrings(names);
  Strings issues;
  Check(augscore_template_validate(t.get(), cnames.data(), cnames.size(), issues.out()));
  const size_t n = augscore_strings_size(issues.get());
  for (size_t i = 0; i < n; ++i) std::cout << augscore_strings_at(issues.get(), i) << "\n";
  if (n > 0) {
    throw RuntimeFailure{AUGSCORE_ERR_VALIDATION,
                         "template has " + std::to_string(n) + " issue(s)"};
  }
  std::cout << "ok\n";
}

struct AugmentArgs {
  std::string data, tpl, out, labels, target, task = "task";
  std::string backend = "mock", endpoint, model = "gpt-4", cache_dir;
  size_t k = 4, learn = 5, max_in_flight = 4;
  uint64_t seed = 0;
  double timeout = 60.0, floor = 0.9;
  bool fresh = false;
};

void RunAugment(const AugmentArgs& a) {
  Dataset d;
  LoadData(a.data, a.labels, a.task, d);
  Template t;
  Check(augscore_template_load(a.tpl.c_str(), t.out()));
  Client c;
  if (a.backend == "mock") {
    Check(augscore_client_create_mock(a.seed, c.out()));
  } else {
    Check(augscore_client_create_http(a.endpoint.c_str(), a.timeout, c.out()));
  }
  Check(augscore_client_configure(c.get(), a.cache_dir.c_str(), a.fresh ? 0 : 1, a.max_in_flight));
  augscore_augment_options o;
  augscore_augment_options_default(&o);
  o.k_per_exemplar = a.k;
  o.n_learn_examples = a.learn;
  o.seed = a.seed;
  o.completeness_floor = a.floor;
  o.model_name = a.model.c_str();
  Pool p;
  Check(augscore_augment(d.get(), a.target.c_str(), t.get(), c.get(), &o, p.out()));
  Check(augscore_pool_save(p.get(), a.out.c_str()));
  std::cout << "pool_size\t" << augscore_pool_size(p.get()) << "\n"
            << "completeness\t" << Num(augscore_pool_completeness(p.get())) << "\n"
            << "requests\t" << augscore_client_request_count(c.get()) << "\n";
}

struct TrainArgs {
  std::string train, val, out, labels, task = "task";
  augscore_train_config cfg{};
};

void RunTrain(const TrainArgs& a) {
  Dataset tr, va;
  LoadData(a.train, a.labels, a.task, tr);
  LoadData(a.val, a.labels, a.task, va);
  Model m;
  Check(augscore_model_train(tr.get(), va.get(), &a.cfg, m.out()));
  Check(augscore_model_save(m.get(), a.out.c_str()));
  std::cout << "model\t" << a.out << "\n";
}

struct EvalArgs {
  std::string model, data, labels, task = "task", averaging = "binary", positive, probs_out;
};

void RunEval(const EvalArgs& a) {
  Model m;
  Check(augscore_model_load(a.model.c_str(), m.out()));
  Dataset d;
  LoadData(a.data, a.labels, a.task, d);
  augscore_metrics r;
  Check(augscore_model_evaluate(m.get(), d.get(), a.averaging.c_str(),
                                a.positive.empty() ? nullptr : a.positive.c_str(), &r));
  auto flag = [&](unsigned bit) { return (r.undefined & bit) ? "\tundefined" : ""; };
  std::cout << "accuracy\t" << Num(r.accuracy) << "\n"
            << "precision\t" << Num(r.precision) << flag(AUGSCORE_UNDEFINED_PRECISION) << "\n"
            << "recall\t" << Num(r.recall) << flag(AUGSCORE_UNDEFINED_RECALL) << "\n"
            << "f1\t" << Num(r.f1) << flag(AUGSCORE_UNDEFINED_F1) << "\n";
  if (a.probs_out.empty()) return;
  const size_t n = augscore_dataset_size(d.get());
  const size_t c = augscore_model_label_count(m.get());
  std::vector<const char*> texts(n), ids(n);
  for (size_t i = 0; i < n; ++i) {
    Check(augscore_dataset_item(d.get(), i, &ids[i], &texts[i], nullptr));
  }
  std::vector<double> probs(n * c);
  Check(augscore_model_predict(m.get(), texts.data(), n, probs.data(), nullptr));
  std::ofstream out(a.probs_out, std::ios::binary | std::ios::trunc);
  if (!out) throw RuntimeFailure{AUGSCORE_ERR_IO, "cannot write " + a.probs_out};
  for (size_t i = 0; i < n; ++i) {
    std::string id;
    for (const char* p = ids[i]; *p; ++p) {
      const auto ch = static_cast<unsigned char>(*p);
      if (ch < 0x20) {
        char esc[8];
        std::snprintf(esc, sizeof(esc), "\\u%04x", ch);
        id += esc;
        continue;
      }
      if (ch == '"' || ch == '\\') id.push_back('\\');
      id.push_back(*p);
    }
    out << "{\"id\":\"" << id << "\",\"probs\":[";
    for (size_t j = 0; j < c; ++j) out << (j ? "," : "") << Num(probs[i * c + j]);
    out << "]}\n";
  }
}

struct SweepArgs {
  std::string config, out;
  bool force = false, fresh = false;
  uint64_t seed = 0;
  bool has_seed = false;
};

void RunSweep(const SweepArgs& a) {
  augscore_sweep_options o{};
  o.output_dir = a.out.empty() ? nullptr : a.out.c_str();
  o.force = a.force;
  o.fresh = a.fresh;
  o.has_seed = a.has_seed;
  o.seed = a.seed;
  Sweep s;
  Check(augscore_sweep_run(a.config.c_str(), &o, s.out()));
  std::cout << "cells\t" << augscore_sweep_cell_count(s.get()) << "\n"
            << "failed_cells\t" << augscore_sweep_failed_cell_count(s.get()) << "\n"
            << "output\t" << augscore_sweep_output_dir(s.get()) << "\n";
}

struct SaturationArgs {
  std::string aggregates, metric, arm = "llm_augment", split = "test";
  double theta = 0.5, delta = 0.01;
};

void RunSaturation(const SaturationArgs& a) {
  Aggregates agg;
  Check(augscore_aggregates_load(a.aggregates.c_str(), agg.out()));
  augscore_saturation s;
  Check(augscore_saturation_query(agg.get(), a.arm.c_str(), a.split.c_str(), a.metric.c_str(),
                                  a.theta, a.delta, &s));
  std::cout << "arm\t" << a.arm << "\nsplit\t" << a.split << "\nmetric\t" << a.metric << "\n"
            << "kind\t" << s.kind << "\n"
            << "proportion\t" << (s.found ? Num(s.proportion) : std::string("none")) << "\n";
}

struct ReportArgs {
  std::string cells, out;
  bool force = false;
  double theta = 0.5, delta = 0.01;
};

void RunReport(const ReportArgs& a) {
  Check(augscore_report_from_cells(a.cells.c_str(), a.out.c_str(), a.theta, a.delta, a.force));
  std::cout << "output\t" << a.out << "\n";
}

struct CompareArgs {
  std::string aggregates, arms, metric;
};

void RunCompare(const CompareArgs& a) {
  const auto arms = SplitList(a.arms);
  if (arms.size() != 2) throw CLI::ValidationError("--arms", "expected two arms as a,b");
  Aggregates agg;
  Check(augscore_aggregates_load(a.aggregates.c_str(), agg.out()));
  Comparison cmp;
  Check(augscore_compare(agg.get(), arms[0].c_str(), arms[1].c_str(), a.metric.c_str(), cmp.out()));
  auto opt = [](int has, double v) { return has ? Num(v) : std::string(); };
  std::cout << "proportion,split," << arms[0] << "_mean," << arms[0] << "_sd," << arms[1]
            << "_mean," << arms[1] << "_sd,difference\n";
  for (size_t i = 0; i < augscore_comparison_size(cmp.get()); ++i) {
    augscore_comparison_row r;
    Check(augscore_comparison_row_at(cmp.get(), i, &r));
    std::cout << Num(r.proportion) << "," << r.split << "," << opt(r.has_a, r.mean_a) << ","
              << opt(r.has_a, r.sd_a) << "," << opt(r.has_b, r.mean_b) << ","
              << opt(r.has_b, r.sd_b) << "," << opt(r.has_difference, r.difference) << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Augmentation experiments for imbalanced response scoring"};
  app.name("augscore");
  app.set_version_flag("--version", augscore_version());
  app.require_subcommand(1);

  AnalyzeArgs analyze;
  auto* c_analyze = app.add_subcommand("analyze", "Print the class histogram and imbalance ratio");
  c_analyze->add_option("data", analyze.data, "Dataset (.jsonl or .csv)")->required();
  c_analyze->add_option("--labels", analyze.labels, "Comma-separated label space")->required();
  c_analyze->add_option("--task", analyze.task, "Task id");

  ValidateArgs validate;
  auto* c_validate = app.add_subcommand("validate-prompt", "Check a prompt template");
  c_validate->add_option("template", validate.tpl, "Template JSON")->required();
  c_validate->add_option("--labels", validate.labels, "Comma-separated label space");

  AugmentArgs augment;
  auto* c_augment = app.add_subcommand("augment", "Generate an augmentation pool");
  c_augment->add_option("--data", augment.data, "Training data")->required();
  c_augment->add_option("--template", augment.tpl, "Template JSON")->required();
  c_augment->add_option("--out", augment.out, "Pool output (.jsonl)")->required();
  c_augment->add_option("--labels", augment.labels, "Comma-separated label space")->required();
  c_augment->add_option("--target", augment.target, "Class to augment")->required();
  c_augment->add_option("--task", augment.task, "Task id");
  c_augment->add_option("--k", augment.k, "Variants per exemplar")->capture_default_str();
  c_augment->add_option("--learn", augment.learn, "Examples to learn")->capture_default_str();
  c_augment->add_option("--backend", augment.backend, "mock or http")
      ->check(CLI::IsMember({"mock", "http"}))
      ->capture_default_str();
  c_augment->add_option("--endpoint", augment.endpoint, "Chat-completions URL (http backend)");
  c_augment->add_option("--model", augment.model, "Model name")->capture_default_str();
  c_augment->add_option("--timeout", augment.timeout, "Request timeout in seconds");
  c_augment->add_option("--max-in-flight", augment.max_in_flight, "Concurrent requests")
      ->check(CLI::PositiveNumber);
  c_augment->add_option("--cache-dir", augment.cache_dir, "Completion cache directory");
  c_augment->add_flag("--fresh", augment.fresh, "Ignore cached completions");
  c_augment->add_option("--completeness-floor", augment.floor, "Minimum pool completeness");
  c_augment->add_option("--seed", augment.seed, "Seed");

  TrainArgs train;
  augscore_train_config_default(&train.cfg);
  auto* c_train = app.add_subcommand("train", "Train the reference classifier");
  c_train->add_option("--train", train.train, "Training data")->required();
  c_train->add_option("--val", train.val, "Validation data")->required();
  c_train->add_option("--out", train.out, "Model output (.json)")->required();
  c_train->add_option("--labels", train.labels, "Comma-separated label space")->required();
  c_train->add_option("--task", train.task, "Task id");
  c_train->add_option("--lr", train.cfg.learning_rate, "Learning rate")->capture_default_str();
  c_train->add_option("--epochs", train.cfg.epochs, "Epochs")->capture_default_str();
  c_train->add_option("--l2", train.cfg.l2, "L2 strength")->capture_default_str();
  c_train->add_option("--snapshot-interval", train.cfg.snapshot_interval, "Epochs between snapshots")
      ->capture_default_str();
  c_train->add_option("--min-df", train.cfg.min_doc_freq, "Minimum document frequency")
      ->capture_default_str();

  EvalArgs eval;
  auto* c_eval = app.add_subcommand("eval", "Score a dataset with a trained model");
  c_eval->add_option("--model", eval.model, "Model JSON")->required();
  c_eval->add_option("--data", eval.data, "Dataset")->required();
  c_eval->add_option("--labels", eval.labels, "Comma-separated label space")->required();
  c_eval->add_option("--task", eval.task, "Task id");
  c_eval->add_option("--averaging", eval.averaging, "binary or macro")
      ->check(CLI::IsMember({"binary", "macro"}))
      ->capture_default_str();
  c_eval->add_option("--positive", eval.positive, "Positive class for binary averaging");
  c_eval->add_option("--probs-out", eval.probs_out, "Write per-item probabilities (JSONL)");

  SweepArgs sweep;
  auto* c_sweep = app.add_subcommand("sweep", "Run the full experiment protocol");
  c_sweep->add_option("--config", sweep.config, "Sweep config JSON")->required();
  c_sweep->add_option("--out", sweep.out, "Output directory (overrides the config)");
  c_sweep->add_flag("--force", sweep.force, "Write into a non-empty output directory");
  c_sweep->add_flag("--fresh", sweep.fresh, "Ignore cached completions");
  auto* sweep_seed = c_sweep->add_option("--seed", sweep.seed, "Base seed (overrides the config)");

  SaturationArgs saturation;
  auto* c_saturation = app.add_subcommand("saturation", "Detect the saturation point");
  c_saturation->add_option("--aggregates", saturation.aggregates, "aggregates.csv")->required();
  c_saturation->add_option("--metric", saturation.metric, "Metric name")->required();
  c_saturation->add_option("--arm", saturation.arm, "Arm")->capture_default_str();
  c_saturation->add_option("--split", saturation.split, "val or test")
      ->check(CLI::IsMember({"val", "test"}))
      ->capture_default_str();
  c_saturation->add_option("--theta", saturation.theta, "Slope ratio threshold")->capture_default_str();
  c_saturation->add_option("--delta", saturation.delta, "Minimum rising slope")->capture_default_str();

  ReportArgs report;
  auto* c_report = app.add_subcommand("report", "Rebuild aggregates from cells.csv");
  c_report->add_option("--cells", report.cells, "cells.csv")->required();
  c_report->add_option("--out", report.out, "Output directory")->required();
  c_report->add_flag("--force", report.force, "Write into a non-empty output directory");
  c_report->add_option("--theta", report.theta, "Slope ratio threshold")->capture_default_str();
  c_report->add_option("--delta", report.delta, "Minimum rising slope")->capture_default_str();

  CompareArgs compare;
  auto* c_compare = app.add_subcommand("compare", "Tabulate mean differences between two arms");
  c_compare->add_option("--aggregates", compare.aggregates, "aggregates.csv")->required();
  c_compare->add_option("--arms", compare.arms, "Two arms as a,b")->required();
  c_compare->add_option("--metric", compare.metric, "Metric name")->required();

  try {
    app.parse(argc, argv);
    sweep.has_seed = sweep_seed->count() > 0;
    if (c_analyze->parsed()) RunAnalyze(analyze);
    if (c_validate->parsed()) RunValidatePrompt(validate);
    if (c_augment->parsed()) {
      if (augment.backend == "http" && augment.endpoint.empty()) {
        throw CLI::RequiredError("--endpoint (http backend)");
      }
      RunAugment(augment);
    }
    if (c_train->parsed()) RunTrain(train);
    if (c_eval->parsed()) RunEval(eval);
    if (c_sweep->parsed()) RunSweep(sweep);
    if (c_saturation->parsed()) RunSaturation(saturation);
    if (c_report->parsed()) RunReport(report);
    if (c_compare->parsed()) RunCompare(compare);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "augscore: usage: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  } catch (const RuntimeFailure& f) {
    std::string message = f.message;
    for (char& ch : message) {
      if (ch == '\n' || ch == '\r') ch = ' ';
    }
    std::cerr << "augscore: error[" << augscore_status_string(f.status) << "]: " << message << "\n";
    return kExitRuntime;
  }
  return 0;
}
