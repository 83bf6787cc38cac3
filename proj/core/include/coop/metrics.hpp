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

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "coop/category.hpp"
#include "coop/error.hpp"

namespace coop {

/// Binary contingency counts; the positive class is Lack.
struct ConfusionMatrix {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;
    std::uint64_t tn = 0;

    std::uint64_t n() const noexcept { return tp + fp + fn + tn; }
    bool operator==(const ConfusionMatrix&) const = default;
};

ConfusionMatrix confusion(std::span<const BinaryLabel> predicted, std::span<const BinaryLabel> truth);

enum class KappaBand { Poor, Slight, Fair, Moderate, Substantial, AlmostPerfect };

/// Landis & Koch: <0 poor, <=.20 slight, <=.40 fair, <=.60 moderate,
/// <=.80 substantial, above almost perfect.
KappaBand landis_koch_band(double kappa) noexcept;
std::string_view to_string(KappaBand band) noexcept;

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::uint64_t support = 0;  // true-class count
    // false when the denominator was zero and the value was set to 0
    bool precision_defined = true;
    bool recall_defined = true;
    bool f1_defined = true;
};

struct AgreementStats {
    double accuracy = 0.0;
    double precision_weighted = 0.0;
    double recall_weighted = 0.0;
    double f1_weighted = 0.0;
    double percent_agreement = 0.0;
    double kappa = 0.0;
    KappaBand kappa_band = KappaBand::Poor;
    bool kappa_degenerate = false;  // chance agreement was 1; kappa set to 1
    ClassMetrics lack;
    ClassMetrics no_lack;
    /// Derived rates for the positive class.
    double sensitivity = 0.0;
    double specificity = 0.0;
    double false_positive_rate = 0.0;
};

/// Accuracy, per-class P/R/F1 averaged by true-class support, and kappa of
/// the matrix. Throws EmptyInput when n == 0.
AgreementStats classification_metrics(const ConfusionMatrix& cm);

struct KappaResult {
    double kappa = 0.0;
    double observed = 0.0;  // p_o
    double expected = 0.0;  // p_e
    bool degenerate = false;
    KappaBand band = KappaBand::Poor;
};

/// Unweighted Cohen's kappa from a k x k contingency table
/// (rows: rater A, columns: rater B).
KappaResult kappa_from_contingency(const std::vector<std::vector<std::uint64_t>>& table);

/// Kappa over category indices in [0, k).
KappaResult cohen_kappa_indices(std::span<const std::size_t> a, std::span<const std::size_t> b, std::size_t k);

namespace detail {
template <typename Label>
std::vector<std::size_t> to_indices(std::span<const Label> labels, std::span<const Label> categories) {
    std::vector<std::size_t> out;
    out.reserve(labels.size());
    for (const auto& l : labels) {
        const auto it = std::find(categories.begin(), categories.end(), l);
        if (it == categories.end()) throw Error(ErrorCode::InvalidInput, "label outside the category set");
        out.push_back(static_cast<std::size_t>(it - categories.begin()));
    }
    return out;
}
}  // namespace detail

template <typename Label>
KappaResult cohen_kappa(std::span<const Label> a, std::span<const Label> b, std::span<const Label> categories) {
    if (a.size() != b.size()) throw Error(ErrorCode::LengthMismatch, "rater vectors differ in length");
    if (a.empty()) throw Error(ErrorCode::EmptyInput, "no items to compare");
    return cohen_kappa_indices(detail::to_indices(a, categories), detail::to_indices(b, categories), categories.size());
}

inline KappaResult cohen_kappa(std::span<const BinaryLabel> a, std::span<const BinaryLabel> b) {
    return cohen_kappa<BinaryLabel>(a, b, kBinaryLabels);
}
inline KappaResult cohen_kappa(std::span<const CooperationCategory> a, std::span<const CooperationCategory> b) {
    return cohen_kappa<CooperationCategory>(a, b, kCategories);
}

template <typename Label>
double percent_agreement(std::span<const Label> a, std::span<const Label> b) {
    if (a.size() != b.size()) throw Error(ErrorCode::LengthMismatch, "rater vectors differ in length");
    if (a.empty()) throw Error(ErrorCode::EmptyInput, "no items to compare");
    std::size_t same = 0;
    for (std::size_t i = 0; i < a.size(); ++i) same += a[i] == b[i] ? 1 : 0;
    return static_cast<double>(same) / static_cast<double>(a.size());
}

template <typename Label>
struct RaterLabels {
    std::string name;
    std::vector<Label> labels;
};

/// Symmetric pairwise tables; the diagonal is 1.
struct MultiRaterTable {
    std::vector<std::string> raters;
    std::vector<std::vector<double>> agreement;
    std::vector<std::vector<double>> kappa;
};

template <typename Label>
MultiRaterTable multirater_table(std::span<const RaterLabels<Label>> raters, std::span<const Label> categories) {
    MultiRaterTable t;
    const auto n = raters.size();
    for (const auto& r : raters) {
        if (r.labels.size() != raters.front().labels.size()) {
            throw Error(ErrorCode::LengthMismatch, "rater '" + r.name + "' has a different item count");
        }
        t.raters.push_back(r.name);
    }
    t.agreement.assign(n, std::vector<double>(n, 1.0));
    t.kappa.assign(n, std::vector<double>(n, 1.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            std::span<const Label> a(raters[i].labels);
            std::span<const Label> b(raters[j].labels);
            t.agreement[i][j] = t.agreement[j][i] = percent_agreement<Label>(a, b);
            t.kappa[i][j] = t.kappa[j][i] = cohen_kappa<Label>(a, b, categories).kappa;
        }
    }
    return t;
}

struct SensitivityComparison {
    double three_category_accuracy = 0.0;
    double three_category_kappa = 0.0;
    AgreementStats binary;
    double delta_accuracy = 0.0;  // binary - three-category
    double delta_kappa = 0.0;
};

SensitivityComparison sensitivity_compare(std::span<const CooperationCategory> predicted,
                                          std::span<const CooperationCategory> truth);

std::vector<BinaryLabel> to_binary(std::span<const CooperationCategory> categories);

/// Item-aligned labels for one caregiver block of a validation sample.
struct RatedItem {
    std::string report_id;
    CaregiverRole caregiver = CaregiverRole::Mother;
    CooperationCategory model = CooperationCategory::NoEvidence;
    CooperationCategory reviewer1 = CooperationCategory::NoEvidence;
    CooperationCategory reviewer2 = CooperationCategory::NoEvidence;
    CooperationCategory benchmark = CooperationCategory::NoEvidence;
};

struct MetricsBlock {
    std::string name;  // "both", "mother", "father"
    std::size_t n = 0;
    ConfusionMatrix confusion;  // model vs benchmark, binary
    AgreementStats stats;
    MultiRaterTable raters;  // Model, EHR 1, EHR 2, Benchmark (binary)
    MultiRaterTable raters_three_category;
    SensitivityComparison sensitivity;
};

struct MetricsReport {
    std::vector<MetricsBlock> blocks;  // both, mother, father
};

/// Throws EmptyInput when no items are given.
MetricsReport build_metrics_report(std::span<const RatedItem> items);

}  // namespace coop
