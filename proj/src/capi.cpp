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

#include "augscore/augscore.h"

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "augscore/augment.hpp"
#include "augscore/classifier.hpp"
#include "augscore/dataset.hpp"
#include "augscore/error.hpp"
#include "augscore/experiment.hpp"
#include "augscore/llm_client.hpp"
#include "augscore/metrics.hpp"
#include "augscore/prompt.hpp"
#include "augscore/report.hpp"

using namespace augscore;

struct augscore_dataset {
  Dataset data;
};
struct augscore_template {
  PromptTemplate tpl;
};
struct augscore_client {
  std::shared_ptr<Backend> backend;
  ClientOptions options;
  std::unique_ptr<LlmClient> client;

  LlmClient& Get() {
    if (!client) client = std::make_unique<LlmClient>(backend, options);
    return *client;
  }
};
struct augscore_pool {
  AugmentationPool pool;
  LabelSpace label_space;
};
struct augscore_model {
  ReferenceModel model;
};
struct augscore_sweep {
  SweepResult result;
  std::string output_dir;
};
struct augscore_aggregates {
  std::vector<AggregateRow> rows;
};
struct augscore_comparison {
  std::vector<ComparisonRow> rows;
};
struct augscore_strings {
  std::vector<std::string> items;
};

namespace {

thread_local std::string g_last_error;

template <typename F>
augscore_status Guard(F&& body) {
  try {
    body();
    g_last_error.clear();
    return AUGSCORE_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return static_cast<augscore_status>(static_cast<int>(e.code()));
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return AUGSCORE_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return AUGSCORE_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return AUGSCORE_ERR_INTERNAL;
  }
}

void Require(bool condition, const char* message) {
  if (!condition) throw Error(ErrorCode::kInvalidArgument, message);
}

std::string Str(const char* s) { return s ? std::string(s) : std::string(); }

LabelSpace Labels(const char* const* labels, size_t n) {
  LabelSpace out;
  for (size_t i = 0; i < n; ++i) {
    Require(labels[i] != nullptr, "label is NULL");
    out.emplace_back(labels[i]);
  }
  return out;
}

std::set<std::string> NameSet(const char* const* names, size_t n) {
  std::set<std::string> out;
  for (size_t i = 0; i < n; ++i) {
    Require(names[i] != nullptr, "element name is NULL");
    out.emplace(names[i]);
  }
  return out;
}

void FillSaturation(const SaturationPoint& p, augscore_saturation* out) {
  out->found = p.proportion.has_value() ? 1 : 0;
  out->proportion = p.proportion.value_or(std::nan(""));
  out->kind = SaturationKindName(p.kind);
}

}  // namespace

extern "C" {

const char* augscore_version(void) { return kVersion; }
const char* augscore_last_error(void) { return g_last_error.c_str(); }

const char* augscore_status_string(augscore_status status) {
  switch (status) {
    case AUGSCORE_OK: return "ok";
    case AUGSCORE_ERR_INTERNAL: return "internal";
    default: break;
  }
  const int code = static_cast<int>(status);
  if (code >= 1 && code <= 8) return ErrorCodeName(static_cast<ErrorCode>(code));
  return "unknown";
}

size_t augscore_strings_size(const augscore_strings* list) { return list ? list->items.size() : 0; }
const char* augscore_strings_at(const augscore_strings* list, size_t index) {
  if (!list || index >= list->items.size()) return nullptr;
  return list->items[index].c_str();
}
void augscore_strings_free(augscore_strings* list) { delete list; }

// --- datasets ---------------------------------------------------------------

augscore_status augscore_dataset_load(const char* path, const char* const* labels,
                                      size_t n_labels, const char* task_id,
                                      augscore_dataset** out) {
  return Guard([&] {
    Require(path && out && (labels || n_labels == 0), "NULL argument");
    auto p = std::string(path);
    *out = new augscore_dataset{
        LoadDataset(p, FormatFromPath(p), Labels(labels, n_labels), Str(task_id))};
  });
}

void augscore_dataset_free(augscore_dataset* dataset) { delete dataset; }
size_t augscore_dataset_size(const augscore_dataset* d) { return d ? d->data.size() : 0; }
size_t augscore_dataset_label_count(const augscore_dataset* d) {
  return d ? d->data.label_space().size() : 0;
}
const char* augscore_dataset_label_name(const augscore_dataset* d, size_t index) {
  if (!d || index >= d->data.label_space().size()) return nullptr;
  return d->data.label_space()[index].c_str();
}

augscore_status augscore_dataset_histogram(const augscore_dataset* d, size_t* counts, size_t n) {
  return Guard([&] {
    Require(d && counts, "NULL argument");
    Require(n == d->data.label_space().size(), "counts length differs from label count");
    const auto hist = ClassHistogram(d->data);
    for (size_t i = 0; i < n; ++i) counts[i] = hist[i].second;
  });
}

augscore_status augscore_dataset_item(const augscore_dataset* d, size_t index, const char** id,
                                      const char** text, const char** label) {
  return Guard([&] {
    Require(d != nullptr, "NULL dataset");
    if (index >= d->data.size()) throw Error(ErrorCode::kNotFound, "item index out of range");
    const auto& item = d->data.items()[index];
    if (id) *id = item.id.c_str();
    if (text) *text = item.text.c_str();
    if (label) *label = item.label.c_str();
  });
}

augscore_status augscore_dataset_partition(const augscore_dataset* d, size_t val_per_class,
                                           size_t test_per_class, uint64_t seed,
                                           augscore_dataset** train, augscore_dataset** val,
                                           augscore_dataset** test) {
  return Guard([&] {
    Require(d && train && val && test, "NULL argument");
    auto p = PartitionDataset(d->data, SplitPlan{val_per_class, test_per_class, seed});
    auto tr = std::make_unique<augscore_dataset>(augscore_dataset{std::move(p.train)});
    auto va = std::make_unique<augscore_dataset>(augscore_dataset{std::move(p.val)});
    auto te = std::make_unique<augscore_dataset>(augscore_dataset{std::move(p.test)});
    *train = tr.release();
    *val = va.release();
    *test = te.release();
  });
}

augscore_status augscore_dataset_save(const augscore_dataset* d, const char* path) {
  return Guard([&] {
    Require(d && path, "NULL argument");
    SaveJsonl(d->data, path);
  });
}

// --- templates --------------------------------------------------------------

augscore_status augscore_template_load(const char* path, augscore_template** out) {
  return Guard([&] {
    Require(path && out, "NULL argument");
    *out = new augscore_template{LoadTemplate(path)};
  });
}

void augscore_template_free(augscore_template* tpl) { delete tpl; }

augscore_status augscore_template_validate(const augscore_template* tpl,
                                           const char* const* labels, size_t n_labels,
                                           augscore_strings** issues) {
  return Guard([&] {
    Require(tpl && issues && (labels || n_labels == 0), "NULL argument");
    const LabelSpace space = Labels(labels, n_labels);
    *issues = new augscore_strings{ValidateTemplate(tpl->tpl, n_labels > 0 ? &space : nullptr)};
  });
}

const char* augscore_template_version(const augscore_template* tpl) {
  return tpl ? tpl->tpl.version.c_str() : nullptr;
}

augscore_status augscore_evaluate_grouping(const char* const* element_names,
                                           const int* element_values, size_t n_elements,
                                           const char* const* dci, size_t n_dci,
                                           const char* const* sep_ccc, size_t n_sep_ccc,
                                           char* group) {
  return Guard([&] {
    Require(group && (n_elements == 0 || (element_names && element_values)) &&
                (dci || n_dci == 0) && (sep_ccc || n_sep_ccc == 0),
            "NULL argument");
    *group = 0;
    std::map<std::string, int> elements;
    for (size_t i = 0; i < n_elements; ++i) {
      Require(element_names[i] != nullptr, "element name is NULL");
      elements[element_names[i]] = element_values[i];
    }
    *group = EvaluateGrouping(elements, GroupingRule{NameSet(dci, n_dci),
                                                     NameSet(sep_ccc, n_sep_ccc)});
  });
}

// --- clients ----------------------------------------------------------------

augscore_status augscore_client_create_mock(uint64_t seed, augscore_client** out) {
  return Guard([&] {
    Require(out != nullptr, "NULL argument");
    *out = new augscore_client{std::make_shared<MockBackend>(seed), ClientOptions{}, nullptr};
  });
}

augscore_status augscore_client_create_http(const char* endpoint, double timeout_seconds,
                                            augscore_client** out) {
  return Guard([&] {
    Require(endpoint && out, "NULL argument");
    auto key = ApiKeyFromEnv();
    if (!key) {
      throw Error(ErrorCode::kInvalidArgument,
                  std::string("HTTP backend credential missing (set ") + kApiKeyEnv + ")");
    }
    auto backend = std::make_shared<HttpBackend>(HttpConfig{endpoint, *key, timeout_seconds},
                                                 MakeHttpTransport());
    *out = new augscore_client{std::move(backend), ClientOptions{}, nullptr};
  });
}

augscore_status augscore_client_configure(augscore_client* c, const char* cache_dir,
                                          int read_cache, size_t max_in_flight) {
  return Guard([&] {
    Require(c != nullptr, "NULL client");
    Require(max_in_flight >= 1, "max_in_flight must be >= 1");
    if (c->client) {
      throw Error(ErrorCode::kInvalidArgument, "client already issued requests");
    }
    c->options.cache_dir = Str(cache_dir);
    c->options.read_cache = read_cache != 0;
    c->options.max_in_flight = max_in_flight;
  });
}

size_t augscore_client_request_count(const augscore_client* c) {
  return c && c->client ? c->client->request_count() : 0;
}

void augscore_client_free(augscore_client* c) { delete c; }

// --- augmentation -----------------------------------------------------------

void augscore_augment_options_default(augscore_augment_options* o) {
  if (!o) return;
  const AugmentOptions d;
  o->k_per_exemplar = d.k_per_exemplar;
  o->n_learn_examples = d.n_learn_examples;
  o->seed = d.learn_seed;
  o->completeness_floor = d.completeness_floor;
  o->model_name = nullptr;
  o->temperature = d.request.temperature;
  o->top_p = d.request.top_p;
  o->max_attempts = d.request.max_attempts;
}

augscore_status augscore_augment(const augscore_dataset* train, const char* target_class,
                                 const augscore_template* tpl, augscore_client* client,
                                 const augscore_augment_options* o, augscore_pool** out) {
  return Guard([&] {
    Require(train && target_class && tpl && client && out, "NULL argument");
    AugmentOptions options;
    if (o) {
      options.k_per_exemplar = o->k_per_exemplar;
      options.n_learn_examples = o->n_learn_examples;
      options.learn_seed = o->seed;
      options.completeness_floor = o->completeness_floor;
      if (o->model_name) options.request.model_name = o->model_name;
      options.request.temperature = o->temperature;
      options.request.top_p = o->top_p;
      options.request.max_attempts = o->max_attempts;
    }
    auto pool = BuildAugmentPool(train->data, target_class, tpl->tpl, client->Get(), options);
    *out = new augscore_pool{std::move(pool), train->data.label_space()};
  });
}

size_t augscore_pool_size(const augscore_pool* p) { return p ? p->pool.items.size() : 0; }
double augscore_pool_completeness(const augscore_pool* p) {
  return p ? p->pool.completeness() : 0.0;
}

augscore_status augscore_pool_save(const augscore_pool* p, const char* path) {
  return Guard([&] {
    Require(p && path, "NULL argument");
    SavePool(p->pool, p->label_space, path);
  });
}

void augscore_pool_free(augscore_pool* p) { delete p; }

// --- models -----------------------------------------------------------------

void augscore_train_config_default(augscore_train_config* c) {
  if (!c) return;
  const TrainConfig d;
  c->learning_rate = d.learning_rate;
  c->epochs = d.epochs;
  c->l2 = d.l2;
  c->snapshot_interval = d.snapshot_interval;
  c->min_doc_freq = 1;
}

augscore_status augscore_model_train(const augscore_dataset* train, const augscore_dataset* val,
                                     const augscore_train_config* c, augscore_model** out) {
  return Guard([&] {
    Require(train && val && out, "NULL argument");
    augscore_train_config cfg;
    augscore_train_config_default(&cfg);
    if (c) cfg = *c;
    TrainConfig tc{cfg.learning_rate, cfg.epochs, cfg.l2, cfg.snapshot_interval};
    *out = new augscore_model{TrainReferenceModel(train->data, val->data, tc, cfg.min_doc_freq)};
  });
}

augscore_status augscore_model_save(const augscore_model* m, const char* path) {
  return Guard([&] {
    Require(m && path, "NULL argument");
    SaveModel(m->model, path);
  });
}

augscore_status augscore_model_load(const char* path, augscore_model** out) {
  return Guard([&] {
    Require(path && out, "NULL argument");
    *out = new augscore_model{LoadModel(path)};
  });
}

void augscore_model_free(augscore_model* m) { delete m; }

size_t augscore_model_label_count(const augscore_model* m) {
  return m ? m->model.model.label_space.size() : 0;
}
const char* augscore_model_label_name(const augscore_model* m, size_t index) {
  if (!m || index >= m->model.model.label_space.size()) return nullptr;
  return m->model.model.label_space[index].c_str();
}

augscore_status augscore_model_predict(const augscore_model* m, const char* const* texts,
                                       size_t n_texts, double* probs, size_t* labels) {
  return Guard([&] {
    Require(m && (texts || n_texts == 0), "NULL argument");
    std::vector<std::string> input;
    for (size_t i = 0; i < n_texts; ++i) {
      Require(texts[i] != nullptr, "text is NULL");
      input.emplace_back(texts[i]);
    }
    const auto preds = m->model.Predict(input);
    const size_t c = m->model.model.label_space.size();
    for (size_t i = 0; i < preds.size(); ++i) {
      if (probs) std::copy(preds[i].probabilities.begin(), preds[i].probabilities.end(), probs + i * c);
      if (labels) labels[i] = preds[i].label_index;
    }
  });
}

augscore_status augscore_model_evaluate(const augscore_model* m, const augscore_dataset* d,
                                        const char* averaging, const char* positive_class,
                                        augscore_metrics* out) {
  return Guard([&] {
    Require(m && d && averaging && out, "NULL argument");
    Scoring scoring;
    const std::string mode(averaging);
    if (mode == "macro") {
      scoring.averaging = Averaging::kMacro;
    } else if (mode == "binary") {
      Require(positive_class != nullptr, "binary averaging needs a positive class");
      scoring.averaging = Averaging::kBinaryPositive;
      scoring.positive = positive_class;
    } else {
      throw Error(ErrorCode::kInvalidArgument, "averaging must be binary or macro");
    }
    std::vector<Label> truth, predicted;
    for (const auto& item : d->data.items()) truth.push_back(item.label);
    for (auto& p : m->model.Predict(d->data.Texts())) predicted.push_back(p.label);
    const auto r = ComputeMetrics(
        BuildConfusionMatrix(truth, predicted, m->model.model.label_space), scoring);
    out->accuracy = r.accuracy;
    out->precision = r.precision;
    out->recall = r.recall;
    out->f1 = r.f1;
    out->undefined = (r.undefined.count("precision") ? unsigned{AUGSCORE_UNDEFINED_PRECISION} : 0u) |
                     (r.undefined.count("recall") ? unsigned{AUGSCORE_UNDEFINED_RECALL} : 0u) |
                     (r.undefined.count("f1") ? unsigned{AUGSCORE_UNDEFINED_F1} : 0u);
  });
}

// --- sweeps -----------------------------------------------------------------

augscore_status augscore_sweep_run(const char* config_path, const augscore_sweep_options* o,
                                   augscore_sweep** out) {
  return Guard([&] {
    Require(config_path && out, "NULL argument");
    SweepConfig cfg = LoadSweepConfig(config_path);
    const bool force = o && o->force;
    if (o && o->output_dir) cfg.output_dir = o->output_dir;
    if (o && o->fresh) cfg.fresh = true;
    if (o && o->has_seed) cfg.base_seed = o->seed;
    if (cfg.output_dir.empty()) {
      throw Error(ErrorCode::kValidation, "config: output_dir is required");
    }
    cfg.Validate();
    if (!force && !DirectoryIsEmpty(cfg.output_dir)) {
      throw Error(ErrorCode::kIo,
                  "output directory '" + cfg.output_dir + "' is not empty (use --force)");
    }
    SweepOptions options;
    options.write_pools = true;
    auto sweep = std::make_unique<augscore_sweep>();
    sweep->result = RunSweep(cfg, options);
    sweep->output_dir = cfg.output_dir;
    EmitReport(sweep->result, cfg.output_dir, ReportFormats{}, true);
    *out = sweep.release();
  });
}

size_t augscore_sweep_cell_count(const augscore_sweep* s) { return s ? s->result.cells.size() : 0; }

size_t augscore_sweep_failed_cell_count(const augscore_sweep* s) {
  if (!s) return 0;
  size_t n = 0;
  for (const auto& c : s->result.cells) n += c.report ? 0 : 1;
  return n;
}

const char* augscore_sweep_output_dir(const augscore_sweep* s) {
  return s ? s->output_dir.c_str() : nullptr;
}

void augscore_sweep_free(augscore_sweep* s) { delete s; }

// --- analysis ---------------------------------------------------------------

augscore_status augscore_aggregates_load(const char* path, augscore_aggregates** out) {
  return Guard([&] {
    Require(path && out, "NULL argument");
    *out = new augscore_aggregates{LoadAggregatesCsv(path)};
  });
}

void augscore_aggregates_free(augscore_aggregates* a) { delete a; }

augscore_status augscore_saturation_query(const augscore_aggregates* a, const char* arm,
                                          const char* split, const char* metric, double theta,
                                          double delta, augscore_saturation* out) {
  return Guard([&] {
    Require(a && arm && split && metric && out, "NULL argument");
    FillSaturation(
        SaturationFromAggregates(a->rows, arm, split, metric, SaturationParams{theta, delta}),
        out);
  });
}

augscore_status augscore_detect_saturation(const double* grid, const double* means, size_t n,
                                           double theta, double delta,
                                           augscore_saturation* out) {
  return Guard([&] {
    Require(grid && means && out, "NULL argument");
    FillSaturation(DetectSaturation(std::span<const double>(grid, n),
                                    std::span<const double>(means, n),
                                    SaturationParams{theta, delta}),
                   out);
  });
}

augscore_status augscore_compare(const augscore_aggregates* a, const char* arm_a,
                                 const char* arm_b, const char* metric,
                                 augscore_comparison** out) {
  return Guard([&] {
    Require(a && arm_a && arm_b && metric && out, "NULL argument");
    *out = new augscore_comparison{CompareArms(a->rows, arm_a, arm_b, metric)};
  });
}

size_t augscore_comparison_size(const augscore_comparison* c) { return c ? c->rows.size() : 0; }

augscore_status augscore_comparison_row_at(const augscore_comparison* c, size_t index,
                                           augscore_comparison_row* row) {
  return Guard([&] {
    Require(c && row, "NULL argument");
    if (index >= c->rows.size()) throw Error(ErrorCode::kNotFound, "row index out of range");
    const auto& r = c->rows[index];
    row->proportion = r.proportion;
    row->split = r.split.c_str();
    row->has_a = r.a.has_value();
    row->mean_a = r.a ? r.a->mean : std::nan("");
    row->sd_a = r.a ? r.a->sd : std::nan("");
    row->has_b = r.b.has_value();
    row->mean_b = r.b ? r.b->mean : std::nan("");
    row->sd_b = r.b ? r.b->sd : std::nan("");
    row->has_difference = r.difference.has_value();
    row->difference = r.difference.value_or(std::nan(""));
  });
}

void augscore_comparison_free(augscore_comparison* c) { delete c; }

augscore_status augscore_report_from_cells(const char* cells_path, const char* output_dir,
                                           double theta, double delta, int force) {
  return Guard([&] {
    Require(cells_path && output_dir, "NULL argument");
    ReportFromCells(cells_path, output_dir, SaturationParams{theta, delta}, force != 0);
  });
}

}  // extern "C"
