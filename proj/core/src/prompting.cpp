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

#include "coop/prompting.hpp"

#include <cstdlib>
#include <map>
#include <sstream>

#include "coop/digest.hpp"
#include "coop/error.hpp"
#include "coop/text.hpp"
#include "jsonl.hpp"

#ifndef COOP_INSTALLED_TEMPLATE_DIR
#define COOP_INSTALLED_TEMPLATE_DIR ""
#endif
#ifndef COOP_SOURCE_TEMPLATE_DIR
#define COOP_SOURCE_TEMPLATE_DIR ""
#endif

namespace coop {

namespace {

struct Header {
    std::string template_id;
    std::string version;
    std::string language;
};

struct SplitFile {
    Header header;
    std::vector<std::string> blocks;
};

std::string_view strip_newlines(std::string_view s) {
    while (!s.empty() && (s.front() == '\n' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

SplitFile split_file(std::string_view file_text) {
    std::vector<std::string> pieces{""};
    std::size_t pos = 0;
    while (pos <= file_text.size()) {
        auto end = file_text.find('\n', pos);
        if (end == std::string_view::npos) end = file_text.size();
        auto line = file_text.substr(pos, end - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line == "---") {
            pieces.emplace_back();
        } else {
            pieces.back().append(line);
            pieces.back().push_back('\n');
        }
        pos = end + 1;
    }
    if (pieces.size() < 2) throw Error(ErrorCode::TemplateInvalid, "template has no '---' separator after the header");

    SplitFile out;
    jsonl::Json header;
    try {
        header = jsonl::Json::parse(pieces.front());
    } catch (const jsonl::Json::parse_error& e) {
        throw Error(ErrorCode::TemplateInvalid, std::string("template header is not JSON: ") + e.what());
    }
    if (!header.is_object()) throw Error(ErrorCode::TemplateInvalid, "template header must be an object");
    for (const auto& [key, value] : header.items()) {
        if (key != "template_id" && key != "version" && key != "language") {
            throw Error(ErrorCode::TemplateInvalid, "unknown template header key '" + key + "'");
        }
        if (!value.is_string()) throw Error(ErrorCode::TemplateInvalid, "template header '" + key + "' must be a string");
    }
    out.header.template_id = header.value("template_id", "");
    out.header.version = header.value("version", "");
    out.header.language = header.value("language", "en");
    for (std::size_t i = 1; i < pieces.size(); ++i) out.blocks.emplace_back(strip_newlines(pieces[i]));
    return out;
}

struct LanguageKeywords {
    std::vector<std::pair<std::string, std::string>> categories;   // (label, phrase)
    std::vector<std::pair<std::string, std::string>> definitions;  // lack, present
    std::vector<std::pair<std::string, std::string>> guidelines;   // trajectory, no_evidence, collective
};

const LanguageKeywords* keywords_for(std::string_view language) {
    static const LanguageKeywords en{
        {{"lack_of_cooperation", "lack of cooperation"},
         {"cooperation_present_or_emerged", "cooperation present or emerged"},
         {"no_evidence", "no evidence"}},
        {{"lack_of_cooperation", "lack of cooperation"},
         {"cooperation_present_or_emerged", "cooperation present or emerged"}},
        {{"trajectory", "trajectory"}, {"no_evidence", "no evidence"}, {"collective", "parents"}},
    };
    static const LanguageKeywords de{
        {{"lack_of_cooperation", "mangelnde kooperation"},
         {"cooperation_present_or_emerged", "kooperation vorhanden oder entstanden"},
         {"no_evidence", "keine hinweise"}},
        {{"lack_of_cooperation", "mangelnde kooperation"},
         {"cooperation_present_or_emerged", "kooperation vorhanden oder entstanden"}},
        {{"trajectory", "verlauf"}, {"no_evidence", "keine hinweise"}, {"collective", "eltern"}},
    };
    if (language == "en") return &en;
    if (language == "de") return &de;
    return nullptr;
}

// Finds `{{name}}` tokens in order.
struct PlaceholderHit {
    std::size_t pos;
    std::size_t len;
    std::string name;
};

std::vector<PlaceholderHit> scan_placeholders(std::string_view s) {
    std::vector<PlaceholderHit> hits;
    for (std::size_t pos = s.find("{{"); pos != std::string_view::npos; pos = s.find("{{", pos + 2)) {
        const auto end = s.find("}}", pos + 2);
        if (end == std::string_view::npos) break;
        auto name = s.substr(pos + 2, end - pos - 2);
        if (name.find_first_of("{} \n") != std::string_view::npos) continue;
        hits.push_back({pos, end + 2 - pos, std::string(name)});
        pos = end;
    }
    return hits;
}

bool has_placeholder_missing(const std::vector<TemplateViolation>& violations) {
    for (const auto& v : violations) {
        if (v.kind == TemplateViolation::Kind::PlaceholderMissing) return true;
    }
    return false;
}

std::string read_template_file(const std::filesystem::path& path) {
    try {
        return jsonl::read_file(path);
    } catch (const Error&) {
        throw Error(ErrorCode::TemplateInvalid, "cannot read template " + path.string());
    }
}

}  // namespace

std::string PromptTemplate::joined() const {
    std::string out;
    for (std::size_t i = 0; i < components.size(); ++i) {
        if (i > 0) out += "\n\n";
        out += components[i];
    }
    return out;
}

PromptTemplate parse_prompt_template(std::string_view file_text) {
    auto split = split_file(file_text);
    PromptTemplate t;
    t.template_id = std::move(split.header.template_id);
    t.version = std::move(split.header.version);
    t.language = std::move(split.header.language);
    t.components = std::move(split.blocks);
    return t;
}

PromptTemplate load_prompt_template(const std::filesystem::path& path) {
    return parse_prompt_template(read_template_file(path));
}

std::string serialize_template(const PromptTemplate& tmpl) {
    jsonl::Json header{{"template_id", tmpl.template_id}, {"version", tmpl.version}, {"language", tmpl.language}};
    std::string out = header.dump() + "\n";
    for (const auto& c : tmpl.components) out += "---\n" + c + "\n";
    return out;
}

ExtractionTemplate parse_extraction_template(std::string_view file_text) {
    auto split = split_file(file_text);
    if (split.blocks.size() != 1) {
        throw Error(ErrorCode::TemplateInvalid, "extraction template must have exactly one body block");
    }
    return ExtractionTemplate{split.header.template_id, split.header.version, split.header.language,
                              split.blocks.front()};
}

ExtractionTemplate load_extraction_template(const std::filesystem::path& path) {
    return parse_extraction_template(read_template_file(path));
}

std::filesystem::path default_template_dir() {
    if (const char* env = std::getenv("COOP_TEMPLATE_DIR"); env && *env) return env;
    for (const char* candidate : {COOP_INSTALLED_TEMPLATE_DIR, COOP_SOURCE_TEMPLATE_DIR}) {
        std::filesystem::path p(candidate);
        if (!p.empty() && std::filesystem::exists(p / "assessment_en.tmpl")) return p;
    }
    return COOP_SOURCE_TEMPLATE_DIR;
}

PromptTemplate default_assessment_template(std::string_view language) {
    return load_prompt_template(default_template_dir() / ("assessment_" + std::string(language) + ".tmpl"));
}

ExtractionTemplate default_extraction_template() {
    return load_extraction_template(default_template_dir() / "extraction_en.tmpl");
}

std::string TemplateViolation::describe() const {
    std::string name;
    switch (kind) {
        case Kind::HeaderInvalid: name = "HeaderInvalid"; break;
        case Kind::ComponentCountViolation: name = "ComponentCountViolation"; break;
        case Kind::QuestionCategoryMissing: name = "QuestionCategoryMissing"; break;
        case Kind::DefinitionMissing: name = "DefinitionMissing"; break;
        case Kind::GuidelineMissing: name = "GuidelineMissing"; break;
        case Kind::PlaceholderMissing: name = "PlaceholderMissing"; break;
        case Kind::UnknownPlaceholder: name = "UnknownPlaceholder"; break;
    }
    return detail.empty() ? name : name + "(\"" + detail + "\")";
}

std::vector<TemplateViolation> validate_template(const PromptTemplate& tmpl) {
    using Kind = TemplateViolation::Kind;
    std::vector<TemplateViolation> out;
    if (tmpl.template_id.empty()) out.push_back({Kind::HeaderInvalid, "template_id"});
    if (tmpl.version.empty()) out.push_back({Kind::HeaderInvalid, "version"});
    const auto* kw = keywords_for(tmpl.language);
    if (!kw) out.push_back({Kind::HeaderInvalid, "language"});

    if (tmpl.components.size() != PromptTemplate::kCount) {
        out.push_back({Kind::ComponentCountViolation, std::to_string(tmpl.components.size())});
        return out;
    }

    if (kw) {
        const auto question = text::to_lower_ascii(tmpl.components[PromptTemplate::Question]);
        for (const auto& [label, phrase] : kw->categories) {
            if (question.find(phrase) == std::string::npos) out.push_back({Kind::QuestionCategoryMissing, label});
        }
        const auto defs = text::to_lower_ascii(tmpl.components[PromptTemplate::Definitions]);
        for (const auto& [label, phrase] : kw->definitions) {
            if (defs.find(phrase) == std::string::npos) out.push_back({Kind::DefinitionMissing, label});
        }
        const auto guide = text::to_lower_ascii(tmpl.components[PromptTemplate::Guidelines]);
        for (const auto& [label, phrase] : kw->guidelines) {
            if (guide.find(phrase) == std::string::npos) out.push_back({Kind::GuidelineMissing, label});
        }
    }

    std::size_t report_hits = 0;
    for (std::size_t i = 0; i < tmpl.components.size(); ++i) {
        for (const auto& hit : scan_placeholders(tmpl.components[i])) {
            if (hit.name == "report_text") {
                ++report_hits;
                if (i != PromptTemplate::Report) out.push_back({Kind::UnknownPlaceholder, "report_text outside report block"});
            } else if (hit.name != "caregiver_role") {
                out.push_back({Kind::UnknownPlaceholder, hit.name});
            }
        }
    }
    if (report_hits == 0) out.push_back({Kind::PlaceholderMissing, "report_text"});
    if (report_hits > 1) out.push_back({Kind::UnknownPlaceholder, "report_text repeated"});
    return out;
}

std::vector<TemplateViolation> validate_template(const ExtractionTemplate& tmpl) {
    using Kind = TemplateViolation::Kind;
    std::vector<TemplateViolation> out;
    if (tmpl.template_id.empty()) out.push_back({Kind::HeaderInvalid, "template_id"});
    if (tmpl.version.empty()) out.push_back({Kind::HeaderInvalid, "version"});
    std::size_t hits = 0;
    for (const auto& hit : scan_placeholders(tmpl.body)) {
        if (hit.name == "final_answer") {
            ++hits;
        } else {
            out.push_back({Kind::UnknownPlaceholder, hit.name});
        }
    }
    if (hits != 1) out.push_back({Kind::PlaceholderMissing, "final_answer"});
    for (auto c : kCategories) {
        if (tmpl.body.find(to_token(c)) == std::string::npos) {
            out.push_back({Kind::QuestionCategoryMissing, std::string(to_token(c))});
        }
    }
    return out;
}

std::string_view role_noun(CaregiverRole role, std::string_view language) {
    if (language == "de") return role == CaregiverRole::Mother ? "Mutter" : "Vater";
    return role == CaregiverRole::Mother ? "mother" : "father";
}

AssessmentPrompt build_assessment_prompt(const ReportRecord& report, CaregiverRole role, const PromptTemplate& tmpl) {
    const auto violations = validate_template(tmpl);
    if (!violations.empty()) {
        std::string msg = "template " + tmpl.template_id + ":";
        for (const auto& v : violations) msg += " " + v.describe();
        throw Error(has_placeholder_missing(violations) ? ErrorCode::MissingPlaceholder : ErrorCode::TemplateInvalid, msg);
    }

    const auto source = tmpl.joined();
    const auto noun = role_noun(role, tmpl.language);
    AssessmentPrompt prompt;
    prompt.report_id = report.report_id;
    prompt.caregiver = role;
    prompt.template_id = tmpl.template_id;
    prompt.template_version = tmpl.version;
    prompt.rendered_text.reserve(source.size() + report.text.size());

    // Single pass so placeholder-like text inside the report is never expanded.
    std::size_t last = 0;
    for (const auto& hit : scan_placeholders(source)) {
        prompt.rendered_text.append(source, last, hit.pos - last);
        if (hit.name == "report_text") {
            prompt.report_offset = prompt.rendered_text.size();
            prompt.report_length = report.text.size();
            prompt.rendered_text += report.text;
        } else {
            prompt.rendered_text += noun;
        }
        last = hit.pos + hit.len;
    }
    prompt.rendered_text.append(source, last, std::string::npos);
    prompt.content_hash = sha256_hex(prompt.rendered_text);
    return prompt;
}

std::string build_extraction_prompt(std::string_view final_answer, const ExtractionTemplate& tmpl) {
    if (text::trim(final_answer).empty()) throw Error(ErrorCode::EmptyFinalAnswer, "final answer is empty");
    const auto violations = validate_template(tmpl);
    if (!violations.empty()) {
        std::string msg = "extraction template " + tmpl.template_id + ":";
        for (const auto& v : violations) msg += " " + v.describe();
        throw Error(has_placeholder_missing(violations) ? ErrorCode::MissingPlaceholder : ErrorCode::TemplateInvalid, msg);
    }
    std::string out;
    std::size_t last = 0;
    for (const auto& hit : scan_placeholders(tmpl.body)) {
        out.append(tmpl.body, last, hit.pos - last);
        out += final_answer;
        last = hit.pos + hit.len;
    }
    out.append(tmpl.body, last, std::string::npos);
    return out;
}

}  // namespace coop
