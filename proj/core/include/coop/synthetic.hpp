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
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "coop/category.hpp"
#include "coop/corpus.hpp"

namespace coop {

struct CategoryRates {
    double lack = 0.2;
    double present = 0.3;  // NoEvidence takes the remainder
    bool operator==(const CategoryRates&) const = default;
};

struct MarkerProfile {
    std::string language = "en";
    CategoryRates mother{0.20, 0.30};
    CategoryRates father{0.10, 0.25};
    /// Share of "present or emerged" assignments written as lack-then-present.
    double trajectory_fraction = 0.3;
    /// Share of reports whose only caregiver evidence is about "the parents".
    double collective_fraction = 0.1;
    std::size_t min_fillers = 4;
    std::size_t max_fillers = 12;
    bool operator==(const MarkerProfile&) const = default;
};

struct SyntheticConfig {
    std::uint64_t seed = 7;
    std::size_t n_cases = 10;
    std::size_t min_reports_per_case = 1;
    std::size_t max_reports_per_case = 3;
    MarkerProfile profile;
    std::string start_date = "2008-01-15";
    bool operator==(const SyntheticConfig&) const = default;
};

void validate(const SyntheticConfig& config);  // throws InvalidConfig

/// Ground truth for one (report, caregiver).
struct GroundTruthEntry {
    std::string report_id;
    std::string case_id;
    CaregiverRole caregiver = CaregiverRole::Mother;
    CooperationCategory category = CooperationCategory::NoEvidence;
    /// Planted cues in text order, "lack:<predicate>" / "present:<predicate>".
    std::vector<std::string> markers;
    bool trajectory = false;
    bool collective = false;

    bool operator==(const GroundTruthEntry&) const = default;
};

struct SyntheticCorpus {
    Corpus corpus;
    std::vector<GroundTruthEntry> truth;  // two per report, mother first
};

SyntheticCorpus generate_synthetic_corpus(const SyntheticConfig& config);

void save_ground_truth(const std::vector<GroundTruthEntry>& truth, std::ostream& out);
void save_ground_truth(const std::vector<GroundTruthEntry>& truth, const std::filesystem::path& path);
std::vector<GroundTruthEntry> load_ground_truth(std::istream& in);
std::vector<GroundTruthEntry> load_ground_truth(const std::filesystem::path& path);

}  // namespace coop
