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

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "coop/category.hpp"
#include "coop/corpus.hpp"
#include "coop/extraction.hpp"

namespace coop {

struct ReportLabel {
    std::string case_id;
    std::string report_id;
    CaregiverRole caregiver = CaregiverRole::Mother;
    BinaryLabel label = BinaryLabel::NoDocumentedLack;
};

struct CaseLabel {
    std::string case_id;
    CaregiverRole caregiver = CaregiverRole::Mother;
    bool lack_ever = false;
    std::size_t n_reports = 0;
    std::size_t n_lack_reports = 0;

    bool operator==(const CaseLabel&) const = default;
};

/// OR over one case's report labels for one caregiver. Throws EmptyInput on
/// an empty list and MixedCaseInput when case or caregiver differ.
CaseLabel aggregate_case(std::span<const ReportLabel> labels);

struct LevelCount {
    std::size_t n_lack = 0;
    std::size_t n_evaluated = 0;  // denominator
    double percent() const {
        return n_evaluated == 0 ? 0.0 : 100.0 * static_cast<double>(n_lack) / static_cast<double>(n_evaluated);
    }
    bool operator==(const LevelCount&) const = default;
};

/// Rows of the summary table.
enum class SummaryRow : std::size_t { Mother = 0, Father = 1, Either = 2 };

struct CorpusSummary {
    std::array<LevelCount, 3> reports;
    std::array<LevelCount, 3> cases;
    std::size_t total_reports = 0;
    std::size_t total_cases = 0;
    /// (report, caregiver) pairs without an extraction result.
    std::size_t missing_pairs = 0;
    double coverage = 0.0;
    std::vector<CaseLabel> case_labels;  // ordered by case_id, caregiver

    const LevelCount& report_row(SummaryRow r) const { return reports[static_cast<std::size_t>(r)]; }
    const LevelCount& case_row(SummaryRow r) const { return cases[static_cast<std::size_t>(r)]; }
    bool operator==(const CorpusSummary&) const = default;
};

/// Builds report- and case-level counts from extraction results. Pairs with
/// no result are excluded and counted in `missing_pairs`. The "either" row
/// is Lack when any known caregiver label is Lack and NoDocumentedLack only
/// when both labels are known. Throws IncompleteRun when coverage
/// (results / 2 x reports) is below `min_coverage` or there are no results.
CorpusSummary corpus_summary(std::span<const ExtractionResult> results, const Corpus& corpus,
                             double min_coverage = 0.98);

}  // namespace coop
