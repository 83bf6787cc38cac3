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

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "coop/corpus.hpp"
#include "coop/error.hpp"
#include "coop/extraction.hpp"
#include "coop/labeling.hpp"
#include "coop/rng.hpp"

using namespace coop;

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

ExtractionResult result(std::string report_id, CaregiverRole role, CooperationCategory c) {
    ExtractionResult r;
    r.report_id = std::move(report_id);
    r.caregiver = role;
    r.category = c;
    return r;
}

Corpus random_corpus(Rng& rng, std::size_t n_cases) {
    Corpus corpus;
    std::size_t next = 0;
    for (std::size_t c = 0; c < n_cases; ++c) {
        const auto n = rng.between(1, 4);
        for (std::size_t k = 0; k < n; ++k) {
            corpus.ingest("report text", {"case" + std::to_string(c), "r" + std::to_string(next++), "2012-05-0" +
                                              std::to_string(1 + k), "en"});
        }
    }
    return corpus;
}

CooperationCategory random_category(Rng& rng) { return kCategories[rng.between(0, 2)]; }

}  // namespace

TEST_CASE("case aggregation is an OR over reports") {
    using enum BinaryLabel;
    std::vector<ReportLabel> labels{{"c1", "r1", CaregiverRole::Mother, NoDocumentedLack},
                                    {"c1", "r2", CaregiverRole::Mother, Lack},
                                    {"c1", "r3", CaregiverRole::Mother, NoDocumentedLack}};
    const auto c = aggregate_case(labels);
    CHECK(c.lack_ever);
    CHECK(c.n_reports == 3);
    CHECK(c.n_lack_reports == 1);
    labels[1].label = NoDocumentedLack;
    CHECK_FALSE(aggregate_case(labels).lack_ever);

    CHECK(code_of([] { aggregate_case({}); }) == ErrorCode::EmptyInput);
    labels[2].case_id = "c2";
    CHECK(code_of([&] { aggregate_case(labels); }) == ErrorCode::MixedCaseInput);
    labels[2].case_id = "c1";
    labels[2].caregiver = CaregiverRole::Father;
    CHECK(code_of([&] { aggregate_case(labels); }) == ErrorCode::MixedCaseInput);
}

TEST_CASE("summary counts a small corpus") {
    using enum CooperationCategory;
    Corpus corpus;
    corpus.ingest("a", {"c1", "r1", "2010-01-01", "en"});
    corpus.ingest("b", {"c1", "r2", "2010-02-01", "en"});
    corpus.ingest("c", {"c2", "r3", "2010-03-01", "en"});
    const std::vector<ExtractionResult> results{
        result("r1", CaregiverRole::Mother, LackOfCooperation), result("r1", CaregiverRole::Father, NoEvidence),
        result("r2", CaregiverRole::Mother, CooperationPresentOrEmerged),
        result("r2", CaregiverRole::Father, LackOfCooperation), result("r3", CaregiverRole::Mother, NoEvidence),
        result("r3", CaregiverRole::Father, CooperationPresentOrEmerged)};
    const auto s = corpus_summary(results, corpus);
    CHECK(s.total_reports == 3);
    CHECK(s.total_cases == 2);
    CHECK(s.report_row(SummaryRow::Mother) == LevelCount{1, 3});
    CHECK(s.report_row(SummaryRow::Father) == LevelCount{1, 3});
    CHECK(s.report_row(SummaryRow::Either) == LevelCount{2, 3});
    CHECK(s.case_row(SummaryRow::Mother) == LevelCount{1, 2});
    CHECK(s.case_row(SummaryRow::Father) == LevelCount{1, 2});
    CHECK(s.case_row(SummaryRow::Either) == LevelCount{1, 2});
    CHECK(s.report_row(SummaryRow::Either).percent() == doctest::Approx(200.0 / 3.0));
    CHECK(s.coverage == 1.0);
    CHECK(s.case_labels.size() == 4);
}

TEST_CASE("coverage and input checks") {
    using enum CooperationCategory;
    Corpus corpus;
    corpus.ingest("a", {"c1", "r1", "2010-01-01", "en"});
    corpus.ingest("b", {"c1", "r2", "2010-02-01", "en"});
    std::vector<ExtractionResult> results{result("r1", CaregiverRole::Mother, NoEvidence),
                                          result("r1", CaregiverRole::Father, NoEvidence),
                                          result("r2", CaregiverRole::Mother, LackOfCooperation)};
    CHECK(code_of([&] { corpus_summary(results, corpus); }) == ErrorCode::IncompleteRun);
    const auto s = corpus_summary(results, corpus, 0.75);
    CHECK(s.missing_pairs == 1);
    CHECK(s.coverage == 0.75);
    // r2: mother Lack, father unknown -> Lack for either
    CHECK(s.report_row(SummaryRow::Either) == LevelCount{1, 2});
    CHECK(s.report_row(SummaryRow::Father) == LevelCount{0, 1});

    results.back().report_id = "r1";
    CHECK(code_of([&] { corpus_summary(results, corpus, 0.0); }) == ErrorCode::InvalidInput);
    results.back().report_id = "zz";
    CHECK(code_of([&] { corpus_summary(results, corpus, 0.0); }) == ErrorCode::InvalidInput);
    CHECK(code_of([&] { corpus_summary({}, corpus, 0.0); }) == ErrorCode::IncompleteRun);
}

TEST_CASE("summary property: matches a brute-force recount and the union bounds") {
    Rng rng(1234);
    for (int trial = 0; trial < 200; ++trial) {
        const auto corpus = random_corpus(rng, rng.between(1, 25));
        std::vector<ExtractionResult> results;
        std::map<std::string, std::array<bool, 2>> lack;  // report -> per caregiver
        for (const auto* rec : corpus.ordered()) {
            for (auto role : kCaregivers) {
                const auto c = random_category(rng);
                results.push_back(result(rec->report_id, role, c));
                lack[rec->report_id][static_cast<std::size_t>(role)] = c == CooperationCategory::LackOfCooperation;
            }
        }
        const auto s = corpus_summary(results, corpus);

        std::array<std::size_t, 3> report_lack{};
        std::map<std::string, std::array<bool, 2>> case_lack;
        for (const auto* rec : corpus.ordered()) {
            const auto& l = lack[rec->report_id];
            report_lack[0] += l[0];
            report_lack[1] += l[1];
            report_lack[2] += l[0] || l[1];
            auto& c = case_lack[rec->case_id];
            c[0] = c[0] || l[0];
            c[1] = c[1] || l[1];
        }
        std::array<std::size_t, 3> cases{};
        for (const auto& [id, c] : case_lack) {
            cases[0] += c[0];
            cases[1] += c[1];
            cases[2] += c[0] || c[1];
        }
        for (std::size_t row = 0; row < 3; ++row) {
            CHECK(s.reports[row] == LevelCount{report_lack[row], corpus.size()});
            CHECK(s.cases[row] == LevelCount{cases[row], case_lack.size()});
        }
        for (const auto* rows : {&s.reports, &s.cases}) {
            const auto& r = *rows;
            CHECK(r[2].n_lack >= std::max(r[0].n_lack, r[1].n_lack));
            CHECK(r[2].n_lack <= r[0].n_lack + r[1].n_lack);
        }
        for (const auto& cl : s.case_labels) {
            CHECK(cl.lack_ever == case_lack[cl.case_id][static_cast<std::size_t>(cl.caregiver)]);
        }
    }
}

TEST_CASE("summary property: raising a label to lack never lowers a count") {
    Rng rng(77);
    for (int trial = 0; trial < 200; ++trial) {
        const auto corpus = random_corpus(rng, rng.between(1, 15));
        std::vector<ExtractionResult> results;
        for (const auto* rec : corpus.ordered()) {
            for (auto role : kCaregivers) results.push_back(result(rec->report_id, role, random_category(rng)));
        }
        const auto before = corpus_summary(results, corpus);
        results[rng.between(0, results.size() - 1)].category = CooperationCategory::LackOfCooperation;
        const auto after = corpus_summary(results, corpus);
        for (std::size_t row = 0; row < 3; ++row) {
            CHECK(after.reports[row].n_lack >= before.reports[row].n_lack);
            CHECK(after.cases[row].n_lack >= before.cases[row].n_lack);
        }
    }
}
