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

#include "augscore/prompt.hpp"

#include <algorithm>
#include <json.hpp>

#include "augscore/error.hpp"
#include "augscore/hash.hpp"
#include "csv.hpp"

namespace augscore {

using json = nlohmann::ordered_json;

namespace {

struct SectionInfo {
  Section section;
  const char* key;
  const char* heading;
  const char* file_key;
  bool required;
};

constexpr SectionInfo kSectionInfo[] = {
    {Section::kRole, "ROLE", "ROLE", "role", true},
    {Section::kTask, "TASK", "TASK", "task", true},
    {Section::kItemStatement, "ITEM_STATEMENT", "ITEM STATEMENT", "item_statement", true},
    {Section::kScoringRubric, "SCORING_RUBRIC", "SCORING RUBRIC", "scoring_rubric", true},
    {Section::kExamplesToLearn, "EXAMPLES_TO_LEARN", "EXAMPLES TO LEARN",
     "examples_to_learn", true},
    {Section::kResponseCharacteristics, "RESPONSE_CHARACTERISTICS",
     "STUDENT RESPONSE CHARACTERISTICS", "response_characteristics", true},
    {Section::kGroupingRules, "GROUPING_RULES", "GROUPING RULES", "grouping_rules", false},
    {Section::kExampleToAugment, "EXAMPLE_TO_AUGMENT", "EXAMPLE TO AUGMENT",
     "example_to_augment", true},
};

const SectionInfo& Info(Section s) {
  return kSectionInfo[static_cast<int>(s)];
}

std::string_view Trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

struct Placeholder {
  std::size_t begin;
  std::size_t end;  // one past the closing braces
  std::string name;
};

// {{name}} with optional inner whitespace; no nesting.
std::vector<Placeholder> FindPlaceholders(std::string_view text) {
  std::vector<Placeholder> out;
  std::size_t pos = 0;
  while ((pos = text.find("{{", pos)) != std::string_view::npos) {
    auto close = text.find("}}", pos + 2);
    if (close == std::string_view::npos) break;
    auto inner = text.substr(pos + 2, close - pos - 2);
    if (inner.find('{') != std::string_view::npos) {
      pos += 1;
      continue;
    }
    out.push_back({pos, close + 2, std::string(Trim(inner))});
    pos = close + 2;
  }
  return out;
}

std::string Substitute(std::string_view text,
                       const std::map<std::string, std::string>& values) {
  std::string out;
  std::size_t last = 0;
  for (const auto& ph : FindPlaceholders(text)) {
    auto it = values.find(ph.name);
    if (it == values.end()) {
      throw Error(ErrorCode::kValidation, "undeclared placeholder '" + ph.name + "'");
    }
    out.append(text.substr(last, ph.begin - last));
    out += it->second;
    last = ph.end;
  }
  out.append(text.substr(last));
  return out;
}

bool IsBuiltin(const std::string& name) {
  return name == kPlaceholderVariants || name == kPlaceholderTargetGroup ||
         name == kPlaceholderExamples || name == kPlaceholderExemplar;
}

bool HasPlaceholder(std::string_view text, const char* name) {
  auto phs = FindPlaceholders(text);
  return std::any_of(phs.begin(), phs.end(),
                     [&](const Placeholder& p) { return p.name == name; });
}

std::string JoinSet(const std::set<std::string>& s) {
  std::string out;
  for (const auto& e : s) {
    if (!out.empty()) out += ",";
    out += e;
  }
  return out;
}

json TemplateToJson(const PromptTemplate& tpl) {
  json obj;
  for (const auto& info : kSectionInfo) {
    if (info.section == Section::kGroupingRules) continue;
    auto it = tpl.sections.find(info.section);
    obj[info.file_key] = it == tpl.sections.end() ? "" : it->second;
  }
  auto gr = tpl.sections.find(Section::kGroupingRules);
  if (gr != tpl.sections.end() || tpl.grouping_rule) {
    json g;
    g["text"] = gr == tpl.sections.end() ? "" : gr->second;
    if (tpl.grouping_rule) {
      g["dci"] = std::vector<std::string>(tpl.grouping_rule->dci_elements.begin(),
                                          tpl.grouping_rule->dci_elements.end());
      g["sep_ccc"] = std::vector<std::string>(tpl.grouping_rule->sepccc_elements.begin(),
                                              tpl.grouping_rule->sepccc_elements.end());
    }
    obj["grouping_rules"] = g;
  }
  json vars = json::object();
  for (const auto& [k, v] : tpl.variables) vars[k] = v;
  obj["variables"] = vars;
  obj["target_group"] = tpl.target_group;
  obj["version"] = tpl.version;
  return obj;
}

}  // namespace

const char* SectionKey(Section section) { return Info(section).key; }
const char* SectionHeading(Section section) { return Info(section).heading; }

char EvaluateGrouping(const std::map<std::string, int>& elements,
                      const GroupingRule& rule) {
  auto any_set = [&](const std::set<std::string>& names) {
    bool result = false;
    for (const auto& name : names) {
      auto it = elements.find(name);
      if (it == elements.end()) {
        throw Error(ErrorCode::kValidation, "missing value for element '" + name + "'");
      }
      if (it->second != 0) result = true;
    }
    return result;
  };
  const bool dci_or = any_set(rule.dci_elements);
  const bool sepccc_or = any_set(rule.sepccc_elements);
  if (!dci_or && !sepccc_or) return 'A';
  if (dci_or && !sepccc_or) return 'B';
  if (!dci_or && sepccc_or) return 'C';
  return 'D';
}

PromptTemplate ParseTemplate(const std::string& json_text) {
  json obj;
  try {
    obj = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse, std::string("template is not valid JSON: ") + e.what());
  }
  if (!obj.is_object()) throw Error(ErrorCode::kParse, "template must be a JSON object");

  auto as_string = [](const json& v, const std::string& key) -> std::string {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_array()) {
      // Multi-line sections may be written as an array of lines.
      std::string out;
      for (const auto& line : v) {
        if (!line.is_string()) break;
        if (!out.empty()) out += "\n";
        out += line.get<std::string>();
      }
      return out;
    }
    throw Error(ErrorCode::kParse, "template key '" + key + "' must be a string");
  };

  PromptTemplate tpl;
  for (const auto& info : kSectionInfo) {
    if (info.section == Section::kGroupingRules) continue;
    if (obj.contains(info.file_key)) {
      tpl.sections[info.section] = as_string(obj[info.file_key], info.file_key);
    }
  }
  if (!tpl.sections.count(Section::kExampleToAugment)) {
    tpl.sections[Section::kExampleToAugment] = std::string("{{") + kPlaceholderExemplar + "}}";
  }
  if (obj.contains("grouping_rules") && !obj["grouping_rules"].is_null()) {
    const auto& g = obj["grouping_rules"];
    if (g.is_object()) {
      if (g.contains("text")) {
        tpl.sections[Section::kGroupingRules] = as_string(g["text"], "grouping_rules.text");
      }
      if (g.contains("dci") || g.contains("sep_ccc")) {
        GroupingRule rule;
        for (const auto& e : g.value("dci", json::array())) {
          rule.dci_elements.insert(e.get<std::string>());
        }
        for (const auto& e : g.value("sep_ccc", json::array())) {
          rule.sepccc_elements.insert(e.get<std::string>());
        }
        tpl.grouping_rule = std::move(rule);
      }
    } else {
      tpl.sections[Section::kGroupingRules] = as_string(g, "grouping_rules");
    }
  }
  if (obj.contains("variables")) {
    if (!obj["variables"].is_object()) {
      throw Error(ErrorCode::kParse, "template key 'variables' must be an object");
    }
    for (const auto& [k, v] : obj["variables"].items()) {
      tpl.variables[k] = as_string(v, "variables." + k);
    }
  }
  if (obj.contains("target_group")) {
    tpl.target_group = as_string(obj["target_group"], "target_group");
  }
  if (obj.contains("version")) tpl.version = as_string(obj["version"], "version");
  return tpl;
}

PromptTemplate LoadTemplate(const std::string& path) {
  return ParseTemplate(csv::ReadFile(path));
}

std::string TemplateHash(const PromptTemplate& tpl) {
  return Sha256Hex(TemplateToJson(tpl).dump());
}

std::vector<std::string> ValidateTemplate(const PromptTemplate& tpl,
                                          const LabelSpace* label_space) {
  std::vector<std::string> issues;
  auto section_text = [&](Section s) -> std::string_view {
    auto it = tpl.sections.find(s);
    return it == tpl.sections.end() ? std::string_view{} : std::string_view(it->second);
  };

  for (const auto& info : kSectionInfo) {
    if (info.required && Trim(section_text(info.section)).empty()) {
      issues.push_back(std::string("missing section ") + info.key);
    }
  }

  std::set<std::string> reported;
  for (const auto& info : kSectionInfo) {
    for (const auto& ph : FindPlaceholders(section_text(info.section))) {
      if (IsBuiltin(ph.name) || tpl.variables.count(ph.name)) continue;
      if (reported.insert(ph.name).second) {
        issues.push_back("undeclared placeholder '" + ph.name + "' in " + info.key);
      }
    }
  }

  if (!Trim(section_text(Section::kExamplesToLearn)).empty() &&
      !HasPlaceholder(section_text(Section::kExamplesToLearn), kPlaceholderExamples)) {
    issues.push_back("EXAMPLES_TO_LEARN has no {{examples}} slot");
  }
  if (!Trim(section_text(Section::kExampleToAugment)).empty() &&
      !HasPlaceholder(section_text(Section::kExampleToAugment), kPlaceholderExemplar)) {
    issues.push_back("EXAMPLE_TO_AUGMENT has no {{exemplar}} slot");
  }

  const bool has_rules_text = !Trim(section_text(Section::kGroupingRules)).empty();
  if (has_rules_text && !tpl.grouping_rule) {
    issues.push_back("GROUPING_RULES text present without a grouping rule definition");
  } else if (!has_rules_text && tpl.grouping_rule) {
    issues.push_back("grouping rule definition present without GROUPING_RULES text");
  } else if (!has_rules_text && label_space && label_space->size() > 2) {
    issues.push_back("GROUPING_RULES required for a " + std::to_string(label_space->size()) +
                     "-class task");
  }
  if (tpl.grouping_rule) {
    const auto& rule = *tpl.grouping_rule;
    if (rule.dci_elements.empty() || rule.sepccc_elements.empty()) {
      issues.push_back("grouping rule needs at least one DCI and one SEP+CCC element");
    }
    std::set<std::string> overlap;
    std::set_intersection(rule.dci_elements.begin(), rule.dci_elements.end(),
                          rule.sepccc_elements.begin(), rule.sepccc_elements.end(),
                          std::inserter(overlap, overlap.begin()));
    if (!overlap.empty()) {
      issues.push_back("grouping rule element sets overlap: " + JoinSet(overlap));
    }
  }

  if (tpl.target_group.empty()) {
    issues.push_back("target_group is not set");
  } else if (label_space &&
             std::find(label_space->begin(), label_space->end(), tpl.target_group) ==
                 label_space->end()) {
    issues.push_back("target_group '" + tpl.target_group + "' is outside the label space");
  }
  return issues;
}

std::string OutputStructureInstruction(std::size_t n_variants) {
  std::string out;
  for (std::size_t k = 1; k <= n_variants; ++k) {
    if (k > 1) out += ", ";
    out += k == 1 ? "Augmented Responses " : "Augmented Response ";
    out += std::to_string(k) + ": ...";
  }
  return out;
}

namespace {

std::string RenderLearnExamples(std::span<const LabeledResponse> examples) {
  std::string out;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const auto& ex = examples[i];
    if (i) out += "\n\n";
    out += "Example " + std::to_string(i + 1) + "\n";
    out += "Student response: \"" + ex.text + "\"\n";
    out += "Group: " + ex.label;
    if (!ex.elements.empty()) {
      out += "\nElements:";
      bool first = true;
      for (const auto& [name, bit] : ex.elements) {
        out += first ? " " : ", ";
        out += name + "=" + std::to_string(bit);
        first = false;
      }
    }
  }
  return out;
}

}  // namespace

std::string RenderPrompt(const PromptTemplate& tpl, const LabeledResponse& exemplar,
                         std::span<const LabeledResponse> learn_examples,
                         std::size_t n_variants) {
  if (n_variants < 1) throw Error(ErrorCode::kInvalidArgument, "n_variants must be >= 1");
  if (learn_examples.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "at least one example to learn is required");
  }
  auto issues = ValidateTemplate(tpl);
  if (!issues.empty()) throw Error(ErrorCode::kValidation, "invalid template: " + issues[0]);

  std::map<std::string, std::string> values = tpl.variables;
  values[kPlaceholderVariants] = std::to_string(n_variants);
  values[kPlaceholderTargetGroup] = tpl.target_group;
  values[kPlaceholderExamples] = RenderLearnExamples(learn_examples);
  values[kPlaceholderExemplar] = exemplar.text;

  std::string out;
  for (Section s : kAllSections) {
    auto it = tpl.sections.find(s);
    if (it == tpl.sections.end() || Trim(it->second).empty()) continue;
    std::string body = Substitute(it->second, values);
    if (!out.empty()) out += "\n\n";
    if (s == Section::kRole || s == Section::kTask) {
      out += std::string(SectionHeading(s)) + " : " + body;
      if (s == Section::kTask) {
        out += "\nRepeat the augmented responses, strictly following the structure \"" +
               OutputStructureInstruction(n_variants) + "\"";
      }
    } else {
      out += std::string("----- ") + SectionHeading(s) + " -----\n" + body;
    }
  }
  out += "\n";
  return out;
}

std::vector<LabeledResponse> SelectLearnExamples(const Dataset& train,
                                                 const Label& target,
                                                 std::size_t count,
                                                 std::uint64_t seed) {
  LabelSpace order;
  order.push_back(target);
  for (const auto& l : train.label_space()) {
    if (l != target) order.push_back(l);
  }
  std::vector<std::vector<LabeledResponse>> pools;
  Rng rng(seed);
  for (const auto& label : order) {
    auto members = train.OfClass(label);
    std::sort(members.begin(), members.end(),
              [](const auto& a, const auto& b) { return a.id < b.id; });
    rng.Shuffle(std::span<LabeledResponse>(members));
    pools.push_back(std::move(members));
  }
  std::vector<LabeledResponse> out;
  std::vector<std::size_t> taken(pools.size(), 0);
  bool progress = true;
  while (out.size() < count && progress) {
    progress = false;
    for (std::size_t c = 0; c < pools.size() && out.size() < count; ++c) {
      if (taken[c] < pools[c].size()) {
        out.push_back(pools[c][taken[c]++]);
        progress = true;
      }
    }
  }
  return out;
}

}  // namespace augscore
