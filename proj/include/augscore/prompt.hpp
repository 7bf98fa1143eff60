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

#ifndef AUGSCORE_PROMPT_HPP_
#define AUGSCORE_PROMPT_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "augscore/dataset.hpp"

namespace augscore {

// Prompt sections in rendering order.
enum class Section {
  kRole,
  kTask,
  kItemStatement,
  kScoringRubric,
  kExamplesToLearn,
  kResponseCharacteristics,
  kGroupingRules,
  kExampleToAugment,
};

inline constexpr Section kAllSections[] = {
    Section::kRole,          Section::kTask,
    Section::kItemStatement, Section::kScoringRubric,
    Section::kExamplesToLearn, Section::kResponseCharacteristics,
    Section::kGroupingRules, Section::kExampleToAugment,
};

// Upper-case identifier, e.g. "SCORING_RUBRIC".
const char* SectionKey(Section section);
// Heading as it appears in a rendered prompt, e.g. "SCORING RUBRIC".
const char* SectionHeading(Section section);

// Maps the two rubric dimensions to the four groups:
// A = neither, B = DCI only, C = SEP+CCC only, D = both.
struct GroupingRule {
  std::set<std::string> dci_elements;
  std::set<std::string> sepccc_elements;
};

// Returns 'A', 'B', 'C' or 'D'. Throws kValidation when an element named by
// the rule has no value in `elements`.
char EvaluateGrouping(const std::map<std::string, int>& elements,
                      const GroupingRule& rule);

// Built-in placeholders filled by RenderPrompt.
inline constexpr const char* kPlaceholderVariants = "n_variants";
inline constexpr const char* kPlaceholderTargetGroup = "target_group";
inline constexpr const char* kPlaceholderExamples = "examples";
inline constexpr const char* kPlaceholderExemplar = "exemplar";

struct PromptTemplate {
  std::map<Section, std::string> sections;
  std::optional<GroupingRule> grouping_rule;
  // Extra user-declared placeholders and their values.
  std::map<std::string, std::string> variables;
  std::string version;
  Label target_group;
};

PromptTemplate ParseTemplate(const std::string& json_text);
PromptTemplate LoadTemplate(const std::string& path);

// Stable digest of the template content.
std::string TemplateHash(const PromptTemplate& tpl);

// Deterministic list of problems; empty means valid. When `label_space` is
// given, target_group membership and the multi-class grouping requirement
// are checked as well.
std::vector<std::string> ValidateTemplate(const PromptTemplate& tpl,
                                          const LabelSpace* label_space = nullptr);

// "Augmented Responses 1: ..., Augmented Response 2: ..., ..." for n entries.
std::string OutputStructureInstruction(std::size_t n_variants);

std::string RenderPrompt(const PromptTemplate& tpl, const LabeledResponse& exemplar,
                         std::span<const LabeledResponse> learn_examples,
                         std::size_t n_variants);

// Seeded draw of `count` exemplars from `train`, round-robin over the label
// space starting at `target`, so every class is represented when possible.
std::vector<LabeledResponse> SelectLearnExamples(const Dataset& train,
                                                 const Label& target,
                                                 std::size_t count,
                                                 std::uint64_t seed);

}  // namespace augscore

#endif  // AUGSCORE_PROMPT_HPP_
