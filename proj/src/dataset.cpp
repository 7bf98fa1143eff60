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

#include "augscore/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "augscore/error.hpp"
#include "augscore/hash.hpp"
#include "csv.hpp"

namespace augscore {

using json = nlohmann::ordered_json;

const char* SourceName(Source source) {
  switch (source) {
    case Source::kOriginal: return "original";
    case Source::kAugmented: return "augmented";
    case Source::kGoldStandard: return "gold_standard";
  }
  return "original";
}

Source ParseSource(const std::string& name) {
  if (name == "original") return Source::kOriginal;
  if (name == "augmented") return Source::kAugmented;
  if (name == "gold_standard") return Source::kGoldStandard;
  throw Error(ErrorCode::kParse, "unknown source '" + name + "'");
}

FileFormat FormatFromPath(const std::string& path) {
  auto dot = path.rfind('.');
  if (dot != std::string::npos) {
    std::string ext = path.substr(dot + 1);
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (ext == "csv") return FileFormat::kCsv;
  }
  return FileFormat::kJsonl;
}

Dataset::Dataset(std::vector<LabeledResponse> items, LabelSpace label_space,
                 std::string task_id)
    : items_(std::move(items)),
      label_space_(std::move(label_space)),
      task_id_(std::move(task_id)) {
  std::set<Label> labels(label_space_.begin(), label_space_.end());
  if (labels.size() != label_space_.size()) {
    throw Error(ErrorCode::kInvalidArgument, "label space has duplicate classes");
  }
  std::unordered_set<std::string> ids;
  for (std::size_t i = 0; i < items_.size(); ++i) {
    const auto& item = items_[i];
    if (item.id.empty()) {
      throw Error(ErrorCode::kValidation, "item " + std::to_string(i) + " has an empty id");
    }
    if (!ids.insert(item.id).second) {
      throw Error(ErrorCode::kValidation, "duplicate id '" + item.id + "'");
    }
    if (item.text.empty()) {
      throw Error(ErrorCode::kValidation, "item '" + item.id + "' has empty text");
    }
    if (!labels.count(item.label)) {
      throw Error(ErrorCode::kValidation, "item '" + item.id + "' has label '" +
                                              item.label + "' outside the label space");
    }
    if (item.source == Source::kAugmented && !item.parent_id) {
      throw Error(ErrorCode::kValidation,
                  "augmented item '" + item.id + "' has no parent_id");
    }
  }
}

std::size_t Dataset::LabelIndex(const Label& label) const {
  auto it = std::find(label_space_.begin(), label_space_.end(), label);
  if (it == label_space_.end()) {
    throw Error(ErrorCode::kNotFound, "label '" + label + "' not in label space");
  }
  return static_cast<std::size_t>(it - label_space_.begin());
}

std::vector<std::string> Dataset::Texts() const {
  std::vector<std::string> out;
  out.reserve(items_.size());
  for (const auto& item : items_) out.push_back(item.text);
  return out;
}

std::vector<LabeledResponse> Dataset::OfClass(const Label& label) const {
  std::vector<LabeledResponse> out;
  for (const auto& item : items_) {
    if (item.label == label) out.push_back(item);
  }
  return out;
}

namespace {

std::string Where(std::size_t row) { return "row " + std::to_string(row); }

int ParseBit(const json& value, const std::string& where) {
  if (value.is_boolean()) return value.get<bool>() ? 1 : 0;
  if (value.is_number_integer()) {
    auto v = value.get<long long>();
    if (v == 0 || v == 1) return static_cast<int>(v);
  }
  if (value.is_string()) {
    auto s = value.get<std::string>();
    if (s == "0" || s == "1") return s == "1" ? 1 : 0;
  }
  throw Error(ErrorCode::kParse, where + ": element values must be 0 or 1");
}

std::string LabelToString(const json& value, const std::string& where) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_number_integer()) return std::to_string(value.get<long long>());
  throw Error(ErrorCode::kParse, where + ": label must be a string or integer");
}

std::vector<LabeledResponse> ParseJsonl(const std::string& content,
                                        std::vector<std::size_t>& rows) {
  std::vector<LabeledResponse> items;
  std::istringstream in(content);
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::kParse, Where(row) + ": invalid JSON (" + e.what() + ")");
    }
    if (!obj.is_object()) throw Error(ErrorCode::kParse, Where(row) + ": expected an object");
    for (const char* key : {"id", "text", "label"}) {
      if (!obj.contains(key)) {
        throw Error(ErrorCode::kParse, Where(row) + ": missing field '" + key + "'");
      }
    }
    LabeledResponse item;
    if (obj["id"].is_string()) {
      item.id = obj["id"].get<std::string>();
    } else if (obj["id"].is_number_integer()) {
      item.id = std::to_string(obj["id"].get<long long>());
    } else {
      throw Error(ErrorCode::kParse, Where(row) + ": id must be a string");
    }
    if (!obj["text"].is_string()) {
      throw Error(ErrorCode::kParse, Where(row) + ": text must be a string");
    }
    item.text = obj["text"].get<std::string>();
    item.label = LabelToString(obj["label"], Where(row));
    if (obj.contains("elements") && !obj["elements"].is_null()) {
      if (!obj["elements"].is_object()) {
        throw Error(ErrorCode::kParse, Where(row) + ": elements must be an object");
      }
      for (const auto& [name, bit] : obj["elements"].items()) {
        item.elements[name] = ParseBit(bit, Where(row));
      }
    }
    if (obj.contains("source") && !obj["source"].is_null()) {
      try {
        item.source = ParseSource(obj["source"].get<std::string>());
      } catch (const Error& e) {
        throw Error(ErrorCode::kParse, Where(row) + ": " + e.what());
      }
    }
    if (obj.contains("parent_id") && !obj["parent_id"].is_null()) {
      item.parent_id = obj["parent_id"].get<std::string>();
    }
    rows.push_back(row);
    items.push_back(std::move(item));
  }
  return items;
}

std::vector<LabeledResponse> ParseCsvRows(const std::string& content,
                                          std::vector<std::size_t>& rows) {
  auto records = csv::Parse(content);
  if (records.empty()) throw Error(ErrorCode::kParse, "CSV file has no header row");
  const auto& header = records.front().fields;
  auto column = [&](const std::string& name) -> std::ptrdiff_t {
    auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : it - header.begin();
  };
  auto id_col = column("id"), text_col = column("text"), label_col = column("label");
  if (id_col < 0 || text_col < 0 || label_col < 0) {
    throw Error(ErrorCode::kParse, "CSV header must contain id, text and label columns");
  }
  std::vector<LabeledResponse> items;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& fields = records[r].fields;
    const std::string where = Where(r);
    if (fields.size() != header.size()) {
      throw Error(ErrorCode::kParse, where + ": expected " + std::to_string(header.size()) +
                                         " fields, got " + std::to_string(fields.size()));
    }
    LabeledResponse item;
    item.id = fields[id_col];
    item.text = fields[text_col];
    item.label = fields[label_col];
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (static_cast<std::ptrdiff_t>(c) == id_col ||
          static_cast<std::ptrdiff_t>(c) == text_col ||
          static_cast<std::ptrdiff_t>(c) == label_col) {
        continue;
      }
      if (fields[c].empty()) continue;
      item.elements[header[c]] = ParseBit(json(fields[c]), where);
    }
    rows.push_back(r);
    items.push_back(std::move(item));
  }
  return items;
}

}  // namespace

Dataset LoadDataset(const std::string& path, FileFormat format,
                    const LabelSpace& label_space, const std::string& task_id) {
  if (label_space.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "label space must be declared");
  }
  const std::string content = csv::ReadFile(path);
  if (!csv::IsValidUtf8(content)) {
    throw Error(ErrorCode::kParse, path + ": not valid UTF-8");
  }
  std::vector<std::size_t> rows;
  auto items = format == FileFormat::kCsv ? ParseCsvRows(content, rows)
                                          : ParseJsonl(content, rows);
  // Report the first offending row with its position before the generic
  // constructor checks run.
  std::set<Label> labels(label_space.begin(), label_space.end());
  std::unordered_set<std::string> ids;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const std::string where =
        path + ": " + Where(rows[i]) + " (id '" + items[i].id + "')";
    if (!labels.count(items[i].label)) {
      throw Error(ErrorCode::kValidation,
                  where + ": label '" + items[i].label + "' outside the label space");
    }
    if (!ids.insert(items[i].id).second) {
      throw Error(ErrorCode::kValidation, where + ": duplicate id");
    }
    if (items[i].text.empty()) {
      throw Error(ErrorCode::kValidation, where + ": empty text");
    }
  }
  return Dataset(std::move(items), label_space, task_id);
}

std::string ToJsonl(const Dataset& dataset) {
  std::string out;
  for (const auto& item : dataset.items()) {
    json obj;
    obj["id"] = item.id;
    obj["text"] = item.text;
    obj["label"] = item.label;
    if (!item.elements.empty()) {
      json elements = json::object();
      for (const auto& [name, bit] : item.elements) elements[name] = bit;
      obj["elements"] = elements;
    }
    obj["source"] = SourceName(item.source);
    if (item.parent_id) obj["parent_id"] = *item.parent_id;
    out += obj.dump();
    out.push_back('\n');
  }
  return out;
}

void SaveJsonl(const Dataset& dataset, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out << ToJsonl(dataset);
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path);
}

std::vector<std::pair<Label, std::size_t>> ClassHistogram(const Dataset& dataset) {
  std::vector<std::pair<Label, std::size_t>> histogram;
  for (const auto& label : dataset.label_space()) histogram.emplace_back(label, 0);
  for (const auto& item : dataset.items()) {
    ++histogram[dataset.LabelIndex(item.label)].second;
  }
  return histogram;
}

Partition PartitionDataset(const Dataset& dataset, const SplitPlan& plan) {
  enum Assignment : unsigned char { kTrain, kVal, kTest };
  std::unordered_map<std::string, Assignment> assignment;

  for (const auto& label : dataset.label_space()) {
    std::vector<const LabeledResponse*> members;
    for (const auto& item : dataset.items()) {
      if (item.label == label) members.push_back(&item);
    }
    if (members.size() < plan.val_per_class + plan.test_per_class) {
      throw Error(ErrorCode::kInfeasible,
                  "class '" + label + "' has " + std::to_string(members.size()) +
                      " items, plan needs " +
                      std::to_string(plan.val_per_class + plan.test_per_class));
    }
    const std::uint64_t class_seed = DeriveSeed(plan.seed, "partition/" + label);
    std::vector<std::pair<std::uint64_t, const LabeledResponse*>> keyed;
    keyed.reserve(members.size());
    for (const auto* item : members) {
      keyed.emplace_back(SplitMix64(class_seed ^ Fnv1a64(item->id)), item);
    }
    std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first < b.first : a.second->id < b.second->id;
    });
    for (std::size_t i = 0; i < keyed.size(); ++i) {
      Assignment a = kTrain;
      if (i < plan.val_per_class) {
        a = kVal;
      } else if (i < plan.val_per_class + plan.test_per_class) {
        a = kTest;
      }
      assignment[keyed[i].second->id] = a;
    }
  }

  std::vector<LabeledResponse> train, val, test;
  for (const auto& item : dataset.items()) {
    switch (assignment.at(item.id)) {
      case kTrain: train.push_back(item); break;
      case kVal: val.push_back(item); break;
      case kTest: test.push_back(item); break;
    }
  }
  return Partition{Dataset(std::move(train), dataset.label_space(), dataset.task_id()),
                   Dataset(std::move(val), dataset.label_space(), dataset.task_id()),
                   Dataset(std::move(test), dataset.label_space(), dataset.task_id())};
}

}  // namespace augscore
