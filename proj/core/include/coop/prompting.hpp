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

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "coop/category.hpp"
#include "coop/corpus.hpp"

namespace coop {

/// Assessment template: five text blocks in fixed order. On disk a template
/// is a one-line JSON header ({template_id, version, language}), then the
/// blocks, each introduced by a line containing only `---`. Placeholders use
/// `{{name}}` syntax.
struct PromptTemplate {
    enum Component : std::size_t { Instruction = 0, Question, Definitions, Guidelines, Report, kCount };

    std::string template_id;
    std::string version;
    std::string language = "en";
    std::vector<std::string> components;

    /// Blocks joined with a blank line, placeholders unsubstituted.
    std::string joined() const;
};

/// Extraction template: same header format, a single body block holding
/// `{{final_answer}}` exactly once.
struct ExtractionTemplate {
    std::string template_id;
    std::string version;
    std::string language = "en";
    std::string body;
};

inline constexpr std::string_view kReportPlaceholder = "{{report_text}}";
inline constexpr std::string_view kRolePlaceholder = "{{caregiver_role}}";
inline constexpr std::string_view kFinalAnswerPlaceholder = "{{final_answer}}";

PromptTemplate parse_prompt_template(std::string_view file_text);
PromptTemplate load_prompt_template(const std::filesystem::path& path);
std::string serialize_template(const PromptTemplate& tmpl);

ExtractionTemplate parse_extraction_template(std::string_view file_text);
ExtractionTemplate load_extraction_template(const std::filesystem::path& path);

/// Template directory: $COOP_TEMPLATE_DIR, else the installed data dir, else
/// the source tree.
std::filesystem::path default_template_dir();
PromptTemplate default_assessment_template(std::string_view language = "en");
ExtractionTemplate default_extraction_template();

struct TemplateViolation {
    enum class Kind {
        HeaderInvalid,
        ComponentCountViolation,
        QuestionCategoryMissing,
        DefinitionMissing,
        GuidelineMissing,
        PlaceholderMissing,
        UnknownPlaceholder,
    };
    Kind kind;
    std::string detail;  // which category / guideline / placeholder

    std::string describe() const;  // e.g. GuidelineMissing("trajectory")
    bool operator==(const TemplateViolation&) const = default;
};

std::vector<TemplateViolation> validate_template(const PromptTemplate& tmpl);
std::vector<TemplateViolation> validate_template(const ExtractionTemplate& tmpl);

/// Role noun substituted for {{caregiver_role}} in the template language.
std::string_view role_noun(CaregiverRole role, std::string_view language);

struct AssessmentPrompt {
    std::string report_id;
    CaregiverRole caregiver = CaregiverRole::Mother;
    std::string rendered_text;
    std::string template_id;
    std::string template_version;
    std::string content_hash;  // sha256 of rendered_text
    std::size_t report_offset = 0;
    std::size_t report_length = 0;

    std::string_view report_text() const {
        return std::string_view(rendered_text).substr(report_offset, report_length);
    }
};

/// Throws TemplateInvalid when validate_template reports violations and
/// MissingPlaceholder when {{report_text}} is absent.
AssessmentPrompt build_assessment_prompt(const ReportRecord& report, CaregiverRole role, const PromptTemplate& tmpl);

/// Throws EmptyFinalAnswer for blank input.
std::string build_extraction_prompt(std::string_view final_answer, const ExtractionTemplate& tmpl);

}  // namespace coop
