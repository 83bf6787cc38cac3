// Copyright 2026 The coop Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "coop/category.hpp"

namespace coop {

/// Sentence material used by the synthetic corpus generator. Every lack
/// predicate contains at least one lack cue of the matching MockRuleSet and
/// no present cue, and vice versa.
struct MarkerVocabulary {
    std::string language;
    std::string mother_subject;   // sentence-initial, e.g. "The mother"
    std::string father_subject;
    std::string parents_subject;
    std::vector<std::string> lack_predicates;
    std::vector<std::string> present_predicates;
    std::string turning_point;  // sentence placed before the positive half of a trajectory
    std::vector<std::string> fillers;
    std::string header_format;  // {report_id}, {case_id}, {date}

    static const MarkerVocabulary& english();
    static const MarkerVocabulary& german();
    static const MarkerVocabulary& for_language(std::string_view language);

    const std::string& subject(CaregiverRole role) const {
        return role == CaregiverRole::Mother ? mother_subject : father_subject;
    }
};

/// Lower-case cue lists for one language.
struct LanguageCues {
    std::string language;
    std::vector<std::string> mother_words;
    std::vector<std::string> father_words;
    std::vector<std::string> collective_words;
    std::vector<std::string> lack_cues;
    std::vector<std::string> present_cues;
};

/// Rule system behind the mock assessment backend.
///  - A sentence concerns a caregiver when it names that caregiver or the
///    parents collectively.
///  - Lack and present cues in those sentences form an ordered evidence list.
///  - No evidence -> NoEvidence; one polarity -> that category; both ->
///    the polarity of the latest evidence decides (trajectory).
struct MockRuleSet {
    std::string id;
    std::vector<LanguageCues> languages;

    /// Ids: "default" (English and German cues).
    static const MockRuleSet& by_id(std::string_view id);
    static const MockRuleSet& default_rules();
};

enum class EvidencePolarity { Lack, Present };

struct EvidenceItem {
    std::size_t sentence_index;
    EvidencePolarity polarity;
    std::string sentence;
    std::string cue;
};

struct MockDecision {
    CooperationCategory category;
    std::vector<EvidenceItem> evidence;
    bool mixed = false;
};

MockDecision apply_mock_rules(std::string_view report_text, CaregiverRole caregiver,
                              const MockRuleSet& rules);

/// Deterministic synthetic model output: a <think> block that walks through
/// the evidence, then a final answer naming exactly one category.
std::string mock_classify(std::string_view report_text, CaregiverRole caregiver,
                          const MockRuleSet& rules);

/// Rule table of the mock extractor: maps a final answer to the JSON object
/// {"category": token}; "undetermined" when zero or several category phrases
/// are present.
std::string mock_extract(std::string_view final_answer);

}  // namespace coop
