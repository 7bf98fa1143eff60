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

#include "augscore/report.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <map>
#include <tuple>

#include "augscore/error.hpp"
#include "csv.hpp"

namespace augscore {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string CellsCsv(std::span<const CellRow> rows) {
  std::string out = std::string(kCellsHeader) + "\n";
  for (const auto& r : rows) {
    out += csv::JoinRow({r.task, r.arm, csv::FormatDouble(r.proportion),
                         std::to_string(r.repetition), r.split, r.metric,
                         std::isnan(r.value) ? std::string() : csv::FormatDouble(r.value), r.flags});
    out += "\n";
  }
  return out;
}

std::string AggregatesCsv(std::span<const AggregateRow> rows) {
  std::string out = std::string(kAggregatesHeader) + "\n";
  for (const auto& r : rows) {
    out += csv::JoinRow({r.task, r.arm, csv::FormatDouble(r.proportion), r.split, r.metric,
                         csv::FormatDouble(r.mean), csv::FormatDouble(r.sd), std::to_string(r.n)});
    out += "\n";
  }
  return out;
}

namespace {

std::vector<csv::Record> ParseWithHeader(const std::string& text, const char* header,
                                         const char* what) {
  auto records = csv::Parse(text);
  if (records.empty() || csv::JoinRow(records[0].fields) != header) {
    throw Error(ErrorCode::kParse, std::string(what) + ": expected header '" + header + "'");
  }
  const std::size_t width = records[0].fields.size();
  for (const auto& r : records) {
    if (r.fields.size() != width) {
      throw Error(ErrorCode::kParse, std::string(what) + " line " + std::to_string(r.line) +
                                         ": expected " + std::to_string(width) + " fields");
    }
  }
  records.erase(records.begin());
  return records;
}

std::size_t ParseCount(const std::string& s, std::size_t line, const char* what) {
  try {
    std::size_t pos = 0;
    const auto v = std::stoull(s, &pos);
    if (pos == s.size()) return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::kParse,
              std::string(what) + " line " + std::to_string(line) + ": bad count '" + s + "'");
}

void WriteFile(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << content;
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

void PrepareDir(const std::string& dir, bool force) {
  if (dir.empty()) throw Error(ErrorCode::kInvalidArgument, "output directory is empty");
  if (!force && !DirectoryIsEmpty(dir)) {
    throw Error(ErrorCode::kIo, "output directory '" + dir + "' is not empty (use force)");
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir + ": " + ec.message());
}

}  // namespace

std::vector<CellRow> ParseCellsCsv(const std::string& text) {
  std::vector<CellRow> rows;
  for (const auto& r : ParseWithHeader(text, kCellsHeader, "cells.csv")) {
    const auto& f = r.fields;
    CellRow row;
    row.task = f[0];
    row.arm = f[1];
    row.proportion = csv::ParseDouble(f[2]);
    row.repetition = ParseCount(f[3], r.line, "cells.csv");
    row.split = f[4];
    row.metric = f[5];
    row.value = f[6].empty() ? std::nan("") : csv::ParseDouble(f[6]);
    row.flags = f[7];
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<AggregateRow> ParseAggregatesCsv(const std::string& text) {
  std::vector<AggregateRow> rows;
  for (const auto& r : ParseWithHeader(text, kAggregatesHeader, "aggregates.csv")) {
    const auto& f = r.fields;
    AggregateRow row;
    row.task = f[0];
    row.arm = f[1];
    row.proportion = csv::ParseDouble(f[2]);
    row.split = f[3];
    row.metric = f[4];
    row.mean = csv::ParseDouble(f[5]);
    row.sd = csv::ParseDouble(f[6]);
    row.n = ParseCount(f[7], r.line, "aggregates.csv");
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<CellRow> LoadCellsCsv(const std::string& path) {
  return ParseCellsCsv(csv::ReadFile(path));
}

std::vector<AggregateRow> LoadAggregatesCsv(const std::string& path) {
  return ParseAggregatesCsv(csv::ReadFile(path));
}

SaturationPoint SaturationFromAggregates(std::span<const AggregateRow> aggregates,
                                         const std::string& arm, const std::string& split,
                                         const std::string& metric,
                                         const SaturationParams& params) {
  std::vector<std::pair<double, double>> series;
  bool arm_seen = false;
  for (const auto& r : aggregates) {
    if (r.arm == arm) arm_seen = true;
    if (r.arm == arm && r.split == split && r.metric == metric) {
      series.emplace_back(r.proportion, r.mean);
    }
  }
  if (!arm_seen) throw Error(ErrorCode::kNotFound, "arm '" + arm + "' not present in aggregates");
  if (series.empty()) {
    throw Error(ErrorCode::kNotFound,
                "no aggregates for metric '" + metric + "' on split '" + split + "'");
  }
  std::sort(series.begin(), series.end());
  std::vector<double> grid, means;
  for (const auto& [p, m] : series) {
    grid.push_back(p);
    means.push_back(m);
  }
  return DetectSaturation(grid, means, params, metric);
}

std::vector<SaturationEntry> AllSaturationPoints(std::span<const AggregateRow> aggregates,
                                                 const SaturationParams& params) {
  using Key = std::tuple<std::string, std::string, std::string, std::string>;
  std::vector<Key> order;
  std::map<Key, std::vector<std::pair<double, double>>> series;
  for (const auto& r : aggregates) {
    Key key{r.task, r.arm, r.split, r.metric};
    auto [it, inserted] = series.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.emplace_back(r.proportion, r.mean);
  }
  std::vector<SaturationEntry> out;
  for (const auto& key : order) {
    auto points = series[key];
    if (points.size() < 3) continue;
    std::sort(points.begin(), points.end());
    std::vector<double> grid, means;
    for (const auto& [p, m] : points) {
      grid.push_back(p);
      means.push_back(m);
    }
    SaturationEntry e;
    e.task = std::get<0>(key);
    e.arm = std::get<1>(key);
    e.split = std::get<2>(key);
    e.point = DetectSaturation(grid, means, params, std::get<3>(key));
    out.push_back(std::move(e));
  }
  return out;
}

std::string SaturationJson(std::span<const SaturationEntry> entries,
                           const SaturationParams& params) {
  json doc;
  doc["theta"] = params.theta;
  doc["delta"] = params.delta;
  doc["points"] = json::array();
  for (const auto& e : entries) {
    json p;
    p["task"] = e.task;
    p["arm"] = e.arm;
    p["split"] = e.split;
    p["metric"] = e.point.metric;
    p["kind"] = SaturationKindName(e.point.kind);
    p["proportion"] = e.point.proportion ? json(*e.point.proportion) : json(nullptr);
    doc["points"].push_back(std::move(p));
  }
  return doc.dump(2) + "\n";
}

std::string ManifestJson(const SweepResult& result) {
  json doc;
  doc["tool_version"] = kVersion;
  doc["task"] = result.task;
  doc["config_hash"] = result.config_hash;
  doc["base_seed"] = result.base_seed;
  doc["proportions"] = result.proportions;
  json arms = json::array();
  for (Arm a : result.arms) arms.push_back(ArmName(a));
  doc["arms"] = arms;
  doc["template_version"] = result.template_version;
  doc["backend"] = result.backend_kind;
  doc["model"] = result.model_name;
  json reps = json::array();
  for (const auto& r : result.repetitions) {
    json rep;
    rep["repetition"] = r.repetition;
    rep["seeds"] = {{"split", r.seeds.split},
                    {"learn", r.seeds.learn},
                    {"mix", r.seeds.mix},
                    {"gold", r.seeds.gold},
                    {"smote", r.seeds.smote}};
    rep["train_size"] = r.train_size;
    rep["val_size"] = r.val_size;
    rep["test_size"] = r.test_size;
    rep["reference_pool_size"] = r.reference_pool_size;
    rep["pool"] = r.pool_manifest ? json::parse(*r.pool_manifest) : json(nullptr);
    reps.push_back(std::move(rep));
  }
  doc["repetitions"] = reps;
  json cells = json::array();
  for (const auto& c : result.cells) {
    json cell;
    cell["arm"] = ArmName(c.arm);
    cell["proportion"] = c.proportion;
    cell["repetition"] = c.repetition;
    cell["split"] = SplitName(c.split);
    cell["added_items"] = c.added_items;
    cell["train_size"] = c.train_size;
    cell["error"] = c.report ? json(nullptr) : json(c.error);
    cells.push_back(std::move(cell));
  }
  doc["cells"] = cells;
  return doc.dump(2) + "\n";
}

bool DirectoryIsEmpty(const std::string& dir) {
  std::error_code ec;
  if (!fs::exists(dir, ec)) return true;
  if (!fs::is_directory(dir, ec)) return false;
  return fs::directory_iterator(dir, ec) == fs::directory_iterator();
}

void EmitReport(const SweepResult& result, const std::string& dir, const ReportFormats& formats,
                bool force) {
  PrepareDir(dir, force);
  const fs::path root(dir);
  if (formats.csv) {
    WriteFile(root / "cells.csv", CellsCsv(CellRows(result)));
    WriteFile(root / "aggregates.csv", AggregatesCsv(result.aggregates));
  }
  if (formats.json) {
    const SaturationParams params{result.saturation_theta, result.saturation_delta};
    WriteFile(root / "saturation.json",
              SaturationJson(AllSaturationPoints(result.aggregates, params), params));
    WriteFile(root / "manifest.json", ManifestJson(result));
  }
}

void ReportFromCells(const std::string& cells_path, const std::string& dir,
                     const SaturationParams& params, bool force) {
  const auto cells = LoadCellsCsv(cells_path);
  PrepareDir(dir, force);
  const auto aggregates = AggregateCellRows(cells);
  const fs::path root(dir);
  WriteFile(root / "aggregates.csv", AggregatesCsv(aggregates));
  WriteFile(root / "saturation.json", SaturationJson(AllSaturationPoints(aggregates, params), params));
}

}  // namespace augscore
