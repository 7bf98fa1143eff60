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

#ifndef AUGSCORE_DATASET_HPP_
#define AUGSCORE_DATASET_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace augscore {

using Label = std::string;
using LabelSpace = std::vector<Label>;

enum class Source { kOriginal, kAugmented, kGoldStandard };

const char* SourceName(Source source);
Source ParseSource(const std::string& name);

// One student (or synthetic) answer. Rubric element bits are optional.
struct LabeledResponse {
  std::string id;
  std::string text;
  Label label;
  std::map<std::string, int> elements;
  Source source = Source::kOriginal;
  std::optional<std::string> parent_id;
};

enum class FileFormat { kJsonl, kCsv };

// Picks the format from the file extension (".csv" -> csv, else jsonl).
FileFormat FormatFromPath(const std::string& path);

// Ordered collection with a declared label space. The constructor enforces
// unique ids, labels inside the label space, non-empty text and
// augmented-implies-parent.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<LabeledResponse> items, LabelSpace label_space,
          std::string task_id = "");

  const std::vector<LabeledResponse>& items() const { return items_; }
  const LabelSpace& label_space() const { return label_space_; }
  const std::string& task_id() const { return task_id_; }
  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }

  // Index of `label` in the label space; throws kNotFound otherwise.
  std::size_t LabelIndex(const Label& label) const;

  std::vector<std::string> Texts() const;

  // Items of a single class, in dataset order.
  std::vector<LabeledResponse> OfClass(const Label& label) const;

 private:
  std::vector<LabeledResponse> items_;
  LabelSpace label_space_;
  std::string task_id_;
};

Dataset LoadDataset(const std::string& path, FileFormat format,
                    const LabelSpace& label_space,
                    const std::string& task_id = "");

// Canonical JSONL serialisation; byte-stable for identical datasets.
std::string ToJsonl(const Dataset& dataset);
void SaveJsonl(const Dataset& dataset, const std::string& path);

// Counts per class in label-space order (every class present, possibly 0).
std::vector<std::pair<Label, std::size_t>> ClassHistogram(const Dataset& dataset);

struct SplitPlan {
  std::size_t val_per_class = 0;
  std::size_t test_per_class = 0;
  std::uint64_t seed = 0;
};

struct Partition {
  Dataset train;
  Dataset val;
  Dataset test;
};

// Class-balanced validation and test sets; the rest is train. Membership is
// decided by a seeded per-class ordering keyed on item id, so the result does
// not depend on input row order. Each split keeps the dataset's row order.
Partition PartitionDataset(const Dataset& dataset, const SplitPlan& plan);

}  // namespace augscore

#endif  // AUGSCORE_DATASET_HPP_
