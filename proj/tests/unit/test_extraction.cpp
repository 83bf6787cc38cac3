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

#include <string>
#include <vector>

#include "coop/backend.hpp"
#include "coop/error.hpp"
#include "coop/extraction.hpp"
#include "coop/inference.hpp"
#include "coop/markers.hpp"
#include "coop/prompting.hpp"
#include "coop/synthetic.hpp"
#include "test_support.hpp"

using namespace coop;
using coop::testing::TempDir;

namespace {

template <typename Fn>
ErrorCode code_of(Fn&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected coop::Error");
    return ErrorCode::IoError;
}

/// Replies with a fixed body and remembers what it was sent.
class ScriptedBackend final : public ChatBackend {
public:
    explicit ScriptedBackend(std::string reply) : reply_(std::move(reply)) {}
    ChatResponse complete(const ChatRequest& request) override {
        sent.push_back(request.messages.at(0).content);
        json_flags.push_back(request.json_output);
        return {reply_, "stop", {}, {}, false};
    }
    BackendDescriptor descriptor() const override { return {}; }
    std::vector<std::string> sent;
    std::vector<bool> json_flags;

private:
    std::string reply_;
};

}  // namespace

TEST_CASE("schema validation accepts exactly one object with a category") {
    CHECK(validate_extraction_schema(R"({"category":"no_evidence"})") == CooperationCategory::NoEvidence);
    CHECK(validate_extraction_schema(" {\"category\": \"lack_of_cooperation\", \"confidence\": 0.9}\n") ==
          CooperationCategory::LackOfCooperation);
    CHECK(validate_extraction_schema("```json\n{\"category\":\"cooperation_present_or_emerged\"}\n```") ==
          CooperationCategory::CooperationPresentOrEmerged);

    for (const char* bad : {"", "category: no_evidence", "[{\"category\":\"no_evidence\"}]", "{}",
                            R"({"category": 3})", R"({"category":"no_evidence"}{"category":"no_evidence"})",
                            "```json\n{\"category\":\"no_evidence\"}"}) {
        CAPTURE(bad);
        CHECK(code_of([&] { validate_extraction_schema(bad); }) == ErrorCode::ExtractionUnparseable);
    }
    CHECK(code_of([] { validate_extraction_schema(R"({"category":"maybe"})"); }) == ErrorCode::CategoryUnknown);
    CHECK(code_of([] { validate_extraction_schema(R"({"category":"Lack of cooperation"})"); }) ==
          ErrorCode::CategoryUnknown);
}

TEST_CASE("phrase scan is unambiguous or silent") {
    CHECK(scan_category_phrases("Final: Lack of cooperation.") == CooperationCategory::LackOfCooperation);
    CHECK(scan_category_phrases("Einschätzung: keine Hinweise") == CooperationCategory::NoEvidence);
    CHECK_FALSE(scan_category_phrases("lack of cooperation, later no evidence"));
    CHECK_FALSE(scan_category_phrases("undecided"));
}

TEST_CASE("mock extractor maps display names to tokens") {
    for (auto c : kCategories) {
        const auto answer = "Final classification for the mother: " + std::string(display_name(c)) + ".";
        CHECK(validate_extraction_schema(mock_extract(answer)) == c);
    }
    CHECK(code_of([] { validate_extraction_schema(mock_extract("no idea")); }) == ErrorCode::CategoryUnknown);
}

TEST_CASE("only the final answer reaches the extractor") {
    const std::string thinking = "SECRET-REASONING considered lack of cooperation";
    const std::string answer = "Final classification: no evidence.";
    ScriptedBackend backend(R"({"category":"no_evidence"})");
    const auto r = extract_category(answer, backend, default_extraction_template());
    CHECK(r.category == CooperationCategory::NoEvidence);
    CHECK(r.method == ExtractionMethod::Structured);
    REQUIRE(backend.sent.size() == 1);
    CHECK(backend.sent[0].find(answer) != std::string::npos);
    CHECK(backend.sent[0].find("SECRET-REASONING") == std::string::npos);
    CHECK(backend.json_flags[0]);
    CHECK(code_of([&] { extract_category(" ", backend, default_extraction_template()); }) ==
          ErrorCode::EmptyFinalAnswer);
}

TEST_CASE("fallback scan applies only when enabled and unambiguous") {
    ScriptedBackend backend("I think it is lack of cooperation");
    const std::string answer = "Final: lack of cooperation.";
    CHECK(code_of([&] { extract_category(answer, backend, default_extraction_template()); }) ==
          ErrorCode::ExtractionUnparseable);

    ExtractionOptions opt;
    opt.fallback = true;
    const auto r = extract_category(answer, backend, default_extraction_template(), opt);
    CHECK(r.category == CooperationCategory::LackOfCooperation);
    CHECK(r.method == ExtractionMethod::Fallback);
    CHECK(r.raw_json == "I think it is lack of cooperation");

    CHECK(code_of([&] {
              extract_category("lack of cooperation or no evidence", backend, default_extraction_template(), opt);
          }) == ErrorCode::ExtractionUnparseable);

    ScriptedBackend unknown(R"({"category":"other"})");
    CHECK(code_of([&] { extract_category(answer, unknown, default_extraction_template(), opt); }) ==
          ErrorCode::CategoryUnknown);
}

TEST_CASE("extraction records round-trip") {
    ExtractionResult r{"r1", CaregiverRole::Father, CooperationCategory::CooperationPresentOrEmerged, "m",
                       R"({"category":"cooperation_present_or_emerged"})", ExtractionMethod::Fallback};
    CHECK(extraction_from_json(to_json_line(r, "k")) == r);
}

TEST_CASE("extractor caches by answer and configuration") {
    TempDir dir;
    MockBackend backend;
    KeyedJsonlStore cache(dir / "extractions.jsonl");
    Extractor ex(backend, default_extraction_template(), {}, &cache);
    const auto a = ex.extract("r1", CaregiverRole::Mother, "Final: no evidence.");
    CHECK(a.report_id == "r1");
    CHECK(a.category == CooperationCategory::NoEvidence);
    CHECK(ex.extract("r1", CaregiverRole::Mother, "Final: no evidence.") == a);
    CHECK(ex.stats().backend_calls == 1);
    CHECK(ex.stats().cache_hits == 1);
    ex.extract("r1", CaregiverRole::Mother, "Final: lack of cooperation.");
    CHECK(ex.stats().backend_calls == 2);
    CHECK(cache.size() == 2);
}

TEST_CASE("mock assessment plus extraction recovers synthetic ground truth") {
    for (const char* lang : {"en", "de"}) {
        SyntheticConfig cfg;
        cfg.n_cases = 40;
        cfg.seed = 21;
        cfg.profile.language = lang;
        const auto syn = generate_synthetic_corpus(cfg);
        MockBackend backend;
        InferenceClient client(backend, {}, nullptr);
        Extractor ex(backend, default_extraction_template(), {}, nullptr);
        const auto tmpl = default_assessment_template(lang);
        std::size_t i = 0;
        for (const auto* rec : syn.corpus.ordered()) {
            for (auto role : kCaregivers) {
                const auto& truth = syn.truth.at(i++);
                REQUIRE(truth.report_id == rec->report_id);
                REQUIRE(truth.caregiver == role);
                const auto out = client.classify_report(build_assessment_prompt(*rec, role, tmpl));
                CHECK(ex.extract(rec->report_id, role, out.final_answer).category == truth.category);
            }
        }
        CHECK(i == syn.truth.size());
    }
}
