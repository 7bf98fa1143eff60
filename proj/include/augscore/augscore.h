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

#ifndef AUGSCORE_AUGSCORE_H_
#define AUGSCORE_AUGSCORE_H_

#include <stddef.h>
#include <stdint.h>

#if defined(AUGSCORE_BUILDING_LIBRARY)
#define AUGSCORE_API __attribute__((visibility("default")))
#else
#define AUGSCORE_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum augscore_status {
  AUGSCORE_OK = 0,
  AUGSCORE_ERR_INVALID_ARGUMENT = 1,
  AUGSCORE_ERR_PARSE = 2,
  AUGSCORE_ERR_IO = 3,
  AUGSCORE_ERR_VALIDATION = 4,
  AUGSCORE_ERR_INFEASIBLE = 5,
  AUGSCORE_ERR_GENERATION = 6,
  AUGSCORE_ERR_NUMERIC = 7,
  AUGSCORE_ERR_NOT_FOUND = 8,
  AUGSCORE_ERR_INTERNAL = 99
} augscore_status;

typedef struct augscore_dataset augscore_dataset;
typedef struct augscore_template augscore_template;
typedef struct augscore_client augscore_client;
typedef struct augscore_pool augscore_pool;
typedef struct augscore_model augscore_model;
typedef struct augscore_sweep augscore_sweep;
typedef struct augscore_aggregates augscore_aggregates;
typedef struct augscore_comparison augscore_comparison;
typedef struct augscore_strings augscore_strings;

AUGSCORE_API const char* augscore_version(void);
// Message of the last failed call on this thread ("" if none).
AUGSCORE_API const char* augscore_last_error(void);
AUGSCORE_API const char* augscore_status_string(augscore_status status);

// String lists. Returned pointers live as long as the list.
AUGSCORE_API size_t augscore_strings_size(const augscore_strings* list);
AUGSCORE_API const char* augscore_strings_at(const augscore_strings* list, size_t index);
AUGSCORE_API void augscore_strings_free(augscore_strings* list);

// Datasets. Format is taken from the extension (.jsonl or .csv).
AUGSCORE_API augscore_status augscore_dataset_load(const char* path, const char* const* labels,
                                                   size_t n_labels, const char* task_id,
                                                   augscore_dataset** out);
AUGSCORE_API void augscore_dataset_free(augscore_dataset* dataset);
AUGSCORE_API size_t augscore_dataset_size(const augscore_dataset* dataset);
AUGSCORE_API size_t augscore_dataset_label_count(const augscore_dataset* dataset);
AUGSCORE_API const char* augscore_dataset_label_name(const augscore_dataset* dataset,
                                                     size_t index);
// counts[i] receives the size of label i; `n` must equal the label count.
AUGSCORE_API augscore_status augscore_dataset_histogram(const augscore_dataset* dataset,
                                                        size_t* counts, size_t n);
AUGSCORE_API augscore_status augscore_dataset_item(const augscore_dataset* dataset, size_t index,
                                                   const char** id, const char** text,
                                                   const char** label);
AUGSCORE_API augscore_status augscore_dataset_partition(const augscore_dataset* dataset,
                                                        size_t val_per_class,
                                                        size_t test_per_class, uint64_t seed,
                                                        augscore_dataset** train,
                                                        augscore_dataset** val,
                                                        augscore_dataset** test);
AUGSCORE_API augscore_status augscore_dataset_save(const augscore_dataset* dataset,
                                                   const char* path);

// Prompt templates.
AUGSCORE_API augscore_status augscore_template_load(const char* path, augscore_template** out);
AUGSCORE_API void augscore_template_free(augscore_template* tpl);
// Issues are checked against `labels` when n_labels > 0.
AUGSCORE_API augscore_status augscore_template_validate(const augscore_template* tpl,
                                                        const char* const* labels,
                                                        size_t n_labels,
                                                        augscore_strings** issues);
AUGSCORE_API const char* augscore_template_version(const augscore_template* tpl);

// Returns 'A'..'D' for the given element values, or 0 on error.
AUGSCORE_API augscore_status augscore_evaluate_grouping(const char* const* element_names,
                                                        const int* element_values,
                                                        size_t n_elements,
                                                        const char* const* dci, size_t n_dci,
                                                        const char* const* sep_ccc,
                                                        size_t n_sep_ccc, char* group);

// Generation clients. The HTTP client reads its key from AUGSCORE_API_KEY.
AUGSCORE_API augscore_status augscore_client_create_mock(uint64_t seed, augscore_client** out);
AUGSCORE_API augscore_status augscore_client_create_http(const char* endpoint,
                                                         double timeout_seconds,
                                                         augscore_client** out);
// Empty or NULL disables the disk cache. Must precede the first request.
AUGSCORE_API augscore_status augscore_client_configure(augscore_client* client,
                                                       const char* cache_dir, int read_cache,
                                                       size_t max_in_flight);
AUGSCORE_API size_t augscore_client_request_count(const augscore_client* client);
AUGSCORE_API void augscore_client_free(augscore_client* client);

typedef struct augscore_augment_options {
  size_t k_per_exemplar;
  size_t n_learn_examples;
  uint64_t seed;
  double completeness_floor;
  const char* model_name;
  double temperature;
  double top_p;
  size_t max_attempts;
} augscore_augment_options;

AUGSCORE_API void augscore_augment_options_default(augscore_augment_options* options);
AUGSCORE_API augscore_status augscore_augment(const augscore_dataset* train,
                                              const char* target_class,
                                              const augscore_template* tpl,
                                              augscore_client* client,
                                              const augscore_augment_options* options,
                                              augscore_pool** out);
AUGSCORE_API size_t augscore_pool_size(const augscore_pool* pool);
AUGSCORE_API double augscore_pool_completeness(const augscore_pool* pool);
// Writes the pool and <path>.manifest.json.
AUGSCORE_API augscore_status augscore_pool_save(const augscore_pool* pool, const char* path);
AUGSCORE_API void augscore_pool_free(augscore_pool* pool);

// Reference classifier.
typedef struct augscore_train_config {
  double learning_rate;
  size_t epochs;
  double l2;
  size_t snapshot_interval;
  size_t min_doc_freq;
} augscore_train_config;

enum {
  AUGSCORE_UNDEFINED_PRECISION = 1,
  AUGSCORE_UNDEFINED_RECALL = 2,
  AUGSCORE_UNDEFINED_F1 = 4
};

typedef struct augscore_metrics {
  double accuracy;
  double precision;
  double recall;
  double f1;
  unsigned undefined;  // AUGSCORE_UNDEFINED_* bits
} augscore_metrics;

AUGSCORE_API void augscore_train_config_default(augscore_train_config* config);
AUGSCORE_API augscore_status augscore_model_train(const augscore_dataset* train,
                                                  const augscore_dataset* val,
                                                  const augscore_train_config* config,
                                                  augscore_model** out);
AUGSCORE_API augscore_status augscore_model_save(const augscore_model* model, const char* path);
AUGSCORE_API augscore_status augscore_model_load(const char* path, augscore_model** out);
AUGSCORE_API void augscore_model_free(augscore_model* model);
AUGSCORE_API size_t augscore_model_label_count(const augscore_model* model);
AUGSCORE_API const char* augscore_model_label_name(const augscore_model* model, size_t index);
// probs receives n_texts x label_count values, row-major; labels receives
// the predicted label index per text. Either may be NULL.
AUGSCORE_API augscore_status augscore_model_predict(const augscore_model* model,
                                                    const char* const* texts, size_t n_texts,
                                                    double* probs, size_t* labels);
// averaging: "binary" (needs positive_class) or "macro".
AUGSCORE_API augscore_status augscore_model_evaluate(const augscore_model* model,
                                                     const augscore_dataset* data,
                                                     const char* averaging,
                                                     const char* positive_class,
                                                     augscore_metrics* out);

// Sweeps.
typedef struct augscore_sweep_options {
  const char* output_dir;  // overrides the config when non-NULL
  int force;
  int fresh;
  int has_seed;  // when set, `seed` replaces the config's base seed
  uint64_t seed;
} augscore_sweep_options;

// Runs the configured protocol and writes pools/, cells.csv, aggregates.csv,
// saturation.json and manifest.json to the output directory.
AUGSCORE_API augscore_status augscore_sweep_run(const char* config_path,
                                                const augscore_sweep_options* options,
                                                augscore_sweep** out);
AUGSCORE_API size_t augscore_sweep_cell_count(const augscore_sweep* sweep);
AUGSCORE_API size_t augscore_sweep_failed_cell_count(const augscore_sweep* sweep);
AUGSCORE_API const char* augscore_sweep_output_dir(const augscore_sweep* sweep);
AUGSCORE_API void augscore_sweep_free(augscore_sweep* sweep);

// Aggregates and analysis.
AUGSCORE_API augscore_status augscore_aggregates_load(const char* path,
                                                      augscore_aggregates** out);
AUGSCORE_API void augscore_aggregates_free(augscore_aggregates* aggregates);

typedef struct augscore_saturation {
  int found;
  double proportion;
  const char* kind;  // "slope_break", "peak_then_decline" or "none"
} augscore_saturation;

AUGSCORE_API augscore_status augscore_saturation_query(const augscore_aggregates* aggregates,
                                                       const char* arm, const char* split,
                                                       const char* metric, double theta,
                                                       double delta, augscore_saturation* out);
AUGSCORE_API augscore_status augscore_detect_saturation(const double* grid, const double* means,
                                                        size_t n, double theta, double delta,
                                                        augscore_saturation* out);

typedef struct augscore_comparison_row {
  double proportion;
  const char* split;
  int has_a;
  double mean_a, sd_a;
  int has_b;
  double mean_b, sd_b;
  int has_difference;
  double difference;
} augscore_comparison_row;

AUGSCORE_API augscore_status augscore_compare(const augscore_aggregates* aggregates,
                                              const char* arm_a, const char* arm_b,
                                              const char* metric, augscore_comparison** out);
AUGSCORE_API size_t augscore_comparison_size(const augscore_comparison* comparison);
AUGSCORE_API augscore_status augscore_comparison_row_at(const augscore_comparison* comparison,
                                                        size_t index,
                                                        augscore_comparison_row* row);
AUGSCORE_API void augscore_comparison_free(augscore_comparison* comparison);

// Recomputes aggregates.csv and saturation.json from a cells.csv.
AUGSCORE_API augscore_status augscore_report_from_cells(const char* cells_path,
                                                        const char* output_dir, double theta,
                                                        double delta, int force);

#ifdef __cplusplus
}
#endif

#endif  // AUGSCORE_AUGSCORE_H_
