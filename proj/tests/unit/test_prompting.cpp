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

#include <doctest.h>

#include "coop/corpus.hpp"
#include "coop/error.hpp"
#include "coop/prompting.hpp"
#include "coop/synthetic.hpp"
#include "coop/text.hpp"

using namespace coop;

namespace {

ReportRecord report(std::string text, std::string id = "r1") {
    return ingest_report(text, {"c1", std::move(id), "2015-03-01", "en"});
}

std::string mask_roles(std::string s) {
    for (const char* noun : {"mother", "father", "Mutter", "Vater"}) text::replace_all(s, noun, "<ROLE>");
    return s;
}

bool has_violation(const std::vector<TemplateViolation>& v, TemplateViolation::Kind kind, std::string_view detail) {
    for (const auto& x : v) {
        if (x.kind == kind && x.detail == detail) return true;
    }
    return false;
}

}  // namespace

TEST_CASE("shipped templates are valid") {
    CHECK(validate_template(default_assessment_template("en")).empty());
    CHECK(validate_template(default_assessment_template("de")).empty());
    CHECK(validate_template(default_extraction_template()).empty());
}

TEST_CASE("template files round-trip through serialize") {
    const auto t = default_assessment_template();
    const auto again = parse_prompt_template(serialize_template(t));
    CHECK(again.template_id == t.template_id);
    CHECK(again.version == t.version);
    CHECK(again.components == t.components);
}

TEST_CASE("template parsing rejects malformed headers") {
    CHECK_THROWS_AS(parse_prompt_template("not json\n---\nx"), Error);
    CHECK_THROWS_AS(parse_prompt_template(R"({"template_id":"a","version":"1","language":"en","extra":1})" "\n---\nx"),
                    Error);
}

TEST_CASE("validation names the failing invariant") {
    using Kind = TemplateViolation::Kind;
    auto t = default_assessment_template();

    auto four = t;
    four.components.pop_back();
    const auto v4 = validate_template(four);
    REQUIRE(v4.size() == 1);
    CHECK(v4[0].kind == Kind::ComponentCountViolation);

    auto no_traj = t;
    auto& g = no_traj.components[PromptTemplate::Guidelines];
    std::string kept;
    for (auto line : text::split_sentences(g)) {
        if (line.find("trajectory") == std::string_view::npos) kept += std::string(line) + "\n";
    }
    g = kept;
    const auto vt = validate_template(no_traj);
    REQUIRE(vt.size() == 1);
    CHECK(vt[0].describe() == "GuidelineMissing(\"trajectory\")");

    auto no_cat = t;
    text::replace_all(no_cat.components[PromptTemplate::Question], "no evidence", "nothing");
    CHECK(has_violation(validate_template(no_cat), Kind::QuestionCategoryMissing, "no_evidence"));

    auto no_def = t;
    text::replace_all(no_def.components[PromptTemplate::Definitions], "lack of cooperation", "x");
    CHECK(has_violation(validate_template(no_def), Kind::DefinitionMissing, "lack_of_cooperation"));

    auto no_report = t;
    no_report.components[PromptTemplate::Report] = "Report:";
    CHECK(has_violation(validate_template(no_report), Kind::PlaceholderMissing, "report_text"));

    auto unknown = t;
    unknown.components[PromptTemplate::Instruction] += " {{case_id}}";
    CHECK(has_violation(validate_template(unknown), Kind::UnknownPlaceholder, "case_id"));
}

TEST_CASE("assessment prompts are deterministic and name the categories") {
    const auto t = default_assessment_template();
    const auto r = report("The mother did not attend the scheduled meeting at the school.");
    const auto a = build_assessment_prompt(r, CaregiverRole::Mother, t);
    const auto b = build_assessment_prompt(r, CaregiverRole::Mother, t);
    CHECK(a.rendered_text == b.rendered_text);
    CHECK(a.content_hash == b.content_hash);
    CHECK(a.content_hash.size() == 64);
    for (auto c : kCategories) CHECK(a.rendered_text.find(display_name(c)) != std::string::npos);
    CHECK(a.rendered_text.find("attend agreed appointments") != std::string::npos);
    CHECK(a.rendered_text.find("Article 307") != std::string::npos);
    CHECK(text::count_occurrences(a.rendered_text, r.text) == 1);
    CHECK(a.report_text() == r.text);
    CHECK(a.template_id == t.template_id);
}

TEST_CASE("placeholder-like report text is not expanded") {
    const auto r = report("Note: {{caregiver_role}} and {{report_text}} appear verbatim.");
    const auto p = build_assessment_prompt(r, CaregiverRole::Father, default_assessment_template());
    CHECK(p.report_text() == r.text);
}

TEST_CASE("mother and father prompts differ only in role tokens") {
    SyntheticConfig cfg;
    cfg.n_cases = 15;
    const auto syn = generate_synthetic_corpus(cfg);
    for (const char* lang : {"en", "de"}) {
        const auto t = default_assessment_template(lang);
        for (const auto* rec : syn.corpus.ordered()) {
            const auto m = build_assessment_prompt(*rec, CaregiverRole::Mother, t);
            const auto f = build_assessment_prompt(*rec, CaregiverRole::Father, t);
            CHECK(m.rendered_text != f.rendered_text);
            CHECK(mask_roles(m.rendered_text) == mask_roles(f.rendered_text));
        }
    }
}

TEST_CASE("rendered length follows the substitution formula") {
    SyntheticConfig cfg;
    cfg.n_cases = 15;
    const auto syn = generate_synthetic_corpus(cfg);
    const auto t = default_assessment_template();
    const auto joined = t.joined();
    const auto n_role = text::count_occurrences(joined, kRolePlaceholder);
    const auto n_report = text::count_occurrences(joined, kReportPlaceholder);
    CHECK(n_report == 1);
    for (const auto* rec : syn.corpus.ordered()) {
        for (auto role : kCaregivers) {
            const auto p = build_assessment_prompt(*rec, role, t);
            const auto expected = joined.size() - n_role * kRolePlaceholder.size() - kReportPlaceholder.size() +
                                  n_role * role_noun(role, t.language).size() + rec->text.size();
            CHECK(p.rendered_text.size() == expected);
        }
    }
}

TEST_CASE("invalid templates are refused at build time") {
    auto t = default_assessment_template();
    t.components[PromptTemplate::Report] = "Report:";
    const auto r = report("text");
    try {
        build_assessment_prompt(r, CaregiverRole::Mother, t);
        FAIL("expected MissingPlaceholder");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MissingPlaceholder);
    }
    t = default_assessment_template();
    t.components.pop_back();
    try {
        build_assessment_prompt(r, CaregiverRole::Mother, t);
        FAIL("expected TemplateInvalid");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::TemplateInvalid);
    }
}

TEST_CASE("extraction prompts embed only the final answer") {
    const auto t = default_extraction_template();
    const std::string answer = "Final classification for the mother: lack of cooperation.";
    const auto p = build_extraction_prompt(answer, t);
    CHECK(p == build_extraction_prompt(answer, t));
    CHECK(text::count_occurrences(p, answer) == 1);
    for (auto c : kCategories) CHECK(p.find(to_token(c)) != std::string::npos);
    CHECK(p.find("JSON") != std::string::npos);
    CHECK(p.find("<think>") == std::string::npos);
    try {
        build_extraction_prompt("  ", t);
        FAIL("expected EmptyFinalAnswer");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::EmptyFinalAnswer);
    }
}
