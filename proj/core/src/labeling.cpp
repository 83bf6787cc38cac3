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

#include "coop/labeling.hpp"

#include <map>
#include <optional>

#include "coop/error.hpp"

namespace coop {

CaseLabel aggregate_case(std::span<const ReportLabel> labels) {
    if (labels.empty()) throw Error(ErrorCode::EmptyInput, "no report labels to aggregate");
    CaseLabel out;
    out.case_id = labels.front().case_id;
    out.caregiver = labels.front().caregiver;
    for (const auto& l : labels) {
        if (l.case_id != out.case_id) {
            throw Error(ErrorCode::MixedCaseInput, "labels from cases '" + out.case_id + "' and '" + l.case_id + "'");
        }
        if (l.caregiver != out.caregiver) throw Error(ErrorCode::MixedCaseInput, "labels for both caregivers");
        ++out.n_reports;
        if (l.label == BinaryLabel::Lack) ++out.n_lack_reports;
    }
    out.lack_ever = out.n_lack_reports > 0;
    return out;
}

namespace {

// Either-caregiver label from possibly missing sides.
std::optional<BinaryLabel> either(std::optional<BinaryLabel> a, std::optional<BinaryLabel> b) {
    if (a == BinaryLabel::Lack || b == BinaryLabel::Lack) return BinaryLabel::Lack;
    if (a && b) return BinaryLabel::NoDocumentedLack;
    return std::nullopt;
}

void count(LevelCount& row, std::optional<BinaryLabel> label) {
    if (!label) return;
    ++row.n_evaluated;
    if (*label == BinaryLabel::Lack) ++row.n_lack;
}

}  // namespace

CorpusSummary corpus_summary(std::span<const ExtractionResult> results, const Corpus& corpus, double min_coverage) {
    const auto records = corpus.ordered();
    CorpusSummary s;
    s.total_reports = records.size();

    // (report_id) -> labels per caregiver
    std::map<std::string, std::array<std::optional<BinaryLabel>, 2>, std::less<>> by_report;
    std::size_t matched = 0;
    for (const auto& r : results) {
        if (!corpus.contains(r.report_id)) {
            throw Error(ErrorCode::InvalidInput, "extraction result for unknown report '" + r.report_id + "'");
        }
        auto& slot = by_report[r.report_id][static_cast<std::size_t>(r.caregiver)];
        if (slot) throw Error(ErrorCode::InvalidInput, "duplicate extraction result for " + r.report_id);
        slot = to_binary(r.category);
        ++matched;
    }
    const std::size_t expected = 2 * s.total_reports;
    s.missing_pairs = expected - matched;
    s.coverage = expected == 0 ? 0.0 : static_cast<double>(matched) / static_cast<double>(expected);
    if (matched == 0 || s.coverage < min_coverage) {
        throw Error(ErrorCode::IncompleteRun, "extraction coverage " + std::to_string(s.coverage) + " below " +
                                                  std::to_string(min_coverage));
    }

    // Per case: (mother labels, father labels)
    struct CaseAcc {
        std::array<std::vector<ReportLabel>, 2> labels;
    };
    std::map<std::string, CaseAcc, std::less<>> cases;
    for (const auto* rec : records) {
        auto& acc = cases[rec->case_id];
        std::array<std::optional<BinaryLabel>, 2> labels{};
        if (auto it = by_report.find(rec->report_id); it != by_report.end()) labels = it->second;
        for (auto role : kCaregivers) {
            const auto idx = static_cast<std::size_t>(role);
            count(s.reports[idx], labels[idx]);
            if (labels[idx]) acc.labels[idx].push_back({rec->case_id, rec->report_id, role, *labels[idx]});
        }
        count(s.reports[static_cast<std::size_t>(SummaryRow::Either)], either(labels[0], labels[1]));
    }

    s.total_cases = cases.size();
    for (const auto& [case_id, acc] : cases) {
        std::array<std::optional<BinaryLabel>, 2> case_flags{};
        for (auto role : kCaregivers) {
            const auto idx = static_cast<std::size_t>(role);
            if (acc.labels[idx].empty()) continue;
            auto label = aggregate_case(acc.labels[idx]);
            case_flags[idx] = label.lack_ever ? BinaryLabel::Lack : BinaryLabel::NoDocumentedLack;
            count(s.cases[idx], case_flags[idx]);
            s.case_labels.push_back(std::move(label));
        }
        count(s.cases[static_cast<std::size_t>(SummaryRow::Either)], either(case_flags[0], case_flags[1]));
    }
    return s;
}

}  // namespace coop
