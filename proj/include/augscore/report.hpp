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

#ifndef AUGSCORE_REPORT_HPP_
#define AUGSCORE_REPORT_HPP_

#include <span>
#include <string>
#include <vector>

#include "augscore/experiment.hpp"

namespace augscore {

inline constexpr const char* kCellsHeader = "task,arm,proportion,repetition,split,metric,value,flags";
inline constexpr const char* kAggregatesHeader = "task,arm,proportion,split,metric,mean,sd,n";

std::string CellsCsv(std::span<const CellRow> rows);
std::string AggregatesCsv(std::span<const AggregateRow> rows);
std::vector<CellRow> ParseCellsCsv(const std::string& text);
std::vector<AggregateRow> ParseAggregatesCsv(const std::string& text);
std::vector<CellRow> LoadCellsCsv(const std::string& path);
std::vector<AggregateRow> LoadAggregatesCsv(const std::string& path);

struct SaturationEntry {
  std::string task;
  std::string arm;
  std::string split;
  SaturationPoint point;
};

// Mean series for (arm, split, metric) ordered by proportion.
SaturationPoint SaturationFromAggregates(std::span<const AggregateRow> aggregates,
                                         const std::string& arm, const std::string& split,
                                         const std::string& metric,
                                         const SaturationParams& params = {});

// One entry per (task, arm, split, metric) series with at least three points.
std::vector<SaturationEntry> AllSaturationPoints(std::span<const AggregateRow> aggregates,
                                                 const SaturationParams& params = {});

std::string SaturationJson(std::span<const SaturationEntry> entries,
                           const SaturationParams& params);
std::string ManifestJson(const SweepResult& result);

struct ReportFormats {
  bool csv = true;
  bool json = true;
};

// Writes cells.csv and aggregates.csv (csv) and manifest.json and
// saturation.json (json). A non-empty `dir` is refused unless `force`.
void EmitReport(const SweepResult& result, const std::string& dir,
                const ReportFormats& formats = {}, bool force = false);

// Recomputes aggregates.csv and saturation.json from an existing cells.csv.
void ReportFromCells(const std::string& cells_path, const std::string& dir,
                     const SaturationParams& params = {}, bool force = false);

// True when `dir` is missing or empty.
bool DirectoryIsEmpty(const std::string& dir);

}  // namespace augscore

#endif  // AUGSCORE_REPORT_HPP_
