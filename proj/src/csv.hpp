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

#ifndef AUGSCORE_SRC_CSV_HPP_
#define AUGSCORE_SRC_CSV_HPP_

#include <string>
#include <string_view>
#include <vector>

namespace augscore::csv {

struct Record {
  std::vector<std::string> fields;
  std::size_t line = 0;  // 1-based physical line where the record starts
};

// RFC 4180 reader: quoted fields may contain commas, doubled quotes and
// newlines. Blank lines are skipped. Throws Error(kParse) on an unterminated
// quote.
std::vector<Record> Parse(std::string_view text);

// Quotes the field only when needed.
std::string Escape(std::string_view field);

std::string JoinRow(const std::vector<std::string>& fields);

// Shortest decimal representation that round-trips to the same double.
std::string FormatDouble(double value);

double ParseDouble(std::string_view text);

std::string ReadFile(const std::string& path);
bool IsValidUtf8(std::string_view text);

}  // namespace augscore::csv

#endif  // AUGSCORE_SRC_CSV_HPP_
