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

#include "coop/metrics.hpp"

namespace coop {

ConfusionMatrix confusion(std::span<const BinaryLabel> predicted, std::span<const BinaryLabel> truth) {
    if (predicted.size() != truth.size()) throw Error(ErrorCode::LengthMismatch, "prediction and truth lengths differ");
    if (predicted.empty()) throw Error(ErrorCode::EmptyInput, "no items");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const bool p = predicted[i] == BinaryLabel::Lack;
        const bool t = truth[i] == BinaryLabel::Lack;
        if (p && t) ++cm.tp;
        else if (p) ++cm.fp;
        else if (t) ++cm.fn;
        else ++cm.tn;
    }
    return cm;
}

KappaBand landis_koch_band(double kappa) noexcept {
    if (kappa < 0.0) return KappaBand::Poor;
    if (kappa <= 0.20) return KappaBand::Slight;
    if (kappa <= 0.40) return KappaBand::Fair;
    if (kappa <= 0.60) return KappaBand::Moderate;
    if (kappa <= 0.80) return KappaBand::Substantial;
    return KappaBand::AlmostPerfect;
}

std::string_view to_string(KappaBand band) noexcept {
    switch (band) {
        case KappaBand::Poor: return "poor";
        case KappaBand::Slight: return "slight";
        case KappaBand::Fair: return "fair";
        case KappaBand::Moderate: return "moderate";
        case KappaBand::Substantial: return "substantial";
        case KappaBand::AlmostPerfect: return "almost perfect";
    }
    return "";
}

namespace {

double ratio(std::uint64_t num, std::uint64_t den, bool& defined) {
    defined = den != 0;
    return defined ? static_cast<double>(num) / static_cast<double>(den) : 0.0;
}

ClassMetrics class_metrics(std::uint64_t hit, std::uint64_t predicted, std::uint64_t actual) {
    ClassMetrics m;
    m.support = actual;
    m.precision = ratio(hit, predicted, m.precision_defined);
    m.recall = ratio(hit, actual, m.recall_defined);
    const double denom = m.precision + m.recall;
    m.f1_defined = denom > 0.0;
    m.f1 = m.f1_defined ? 2.0 * m.precision * m.recall / denom : 0.0;
    return m;
}

}  // namespace

AgreementStats classification_metrics(const ConfusionMatrix& cm) {
    const auto n = cm.n();
    if (n == 0) throw Error(ErrorCode::EmptyInput, "confusion matrix is empty");
    const double dn = static_cast<double>(n);

    AgreementStats s;
    s.accuracy = static_cast<double>(cm.tp + cm.tn) / dn;
    s.percent_agreement = s.accuracy;
    s.lack = class_metrics(cm.tp, cm.tp + cm.fp, cm.tp + cm.fn);
    s.no_lack = class_metrics(cm.tn, cm.tn + cm.fn, cm.tn + cm.fp);
    const double w_lack = static_cast<double>(s.lack.support) / dn;
    const double w_no = static_cast<double>(s.no_lack.support) / dn;
    s.precision_weighted = w_lack * s.lack.precision + w_no * s.no_lack.precision;
    s.recall_weighted = w_lack * s.lack.recall + w_no * s.no_lack.recall;
    s.f1_weighted = w_lack * s.lack.f1 + w_no * s.no_lack.f1;

    const auto k = kappa_from_contingency({{cm.tp, cm.fn}, {cm.fp, cm.tn}});
    s.kappa = k.kappa;
    s.kappa_band = k.band;
    s.kappa_degenerate = k.degenerate;

    bool defined = false;
    s.sensitivity = ratio(cm.tp, cm.tp + cm.fn, defined);
    s.specificity = ratio(cm.tn, cm.tn + cm.fp, defined);
    s.false_positive_rate = ratio(cm.fp, cm.tn + cm.fp, defined);
    return s;
}

KappaResult kappa_from_contingency(const std::vector<std::vector<std::uint64_t>>& table) {
    const auto k = table.size();
    std::vector<double> rows(k, 0.0);
    std::vector<double> cols(k, 0.0);
    double n = 0.0;
    double diag = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        if (table[i].size() != k) throw Error(ErrorCode::InvalidInput, "contingency table is not square");
        for (std::size_t j = 0; j < k; ++j) {
            const auto v = static_cast<double>(table[i][j]);
            rows[i] += v;
            cols[j] += v;
            n += v;
            if (i == j) diag += v;
        }
    }
    if (n == 0.0) throw Error(ErrorCode::EmptyInput, "contingency table is empty");

    KappaResult r;
    r.observed = diag / n;
    for (std::size_t i = 0; i < k; ++i) r.expected += (rows[i] / n) * (cols[i] / n);
    if (r.expected >= 1.0) {
        // Both raters constant on the same category.
        r.kappa = 1.0;
        r.degenerate = true;
    } else {
        r.kappa = (r.observed - r.expected) / (1.0 - r.expected);
    }
    r.band = landis_koch_band(r.kappa);
    return r;
}

KappaResult cohen_kappa_indices(std::span<const std::size_t> a, std::span<const std::size_t> b, std::size_t k) {
    if (a.size() != b.size()) throw Error(ErrorCode::LengthMismatch, "rater vectors differ in length");
    if (a.empty()) throw Error(ErrorCode::EmptyInput, "no items to compare");
    std::vector<std::vector<std::uint64_t>> table(k, std::vector<std::uint64_t>(k, 0));
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] >= k || b[i] >= k) throw Error(ErrorCode::InvalidInput, "category index out of range");
        ++table[a[i]][b[i]];
    }
    return kappa_from_contingency(table);
}

std::vector<BinaryLabel> to_binary(std::span<const CooperationCategory> categories) {
    std::vector<BinaryLabel> out;
    out.reserve(categories.size());
    for (auto c : categories) {
        out.push_back(c == CooperationCategory::LackOfCooperation ? BinaryLabel::Lack : BinaryLabel::NoDocumentedLack);
    }
    return out;
}

SensitivityComparison sensitivity_compare(std::span<const CooperationCategory> predicted,
                                          std::span<const CooperationCategory> truth) {
    if (predicted.size() != truth.size()) throw Error(ErrorCode::LengthMismatch, "prediction and truth lengths differ");
    if (predicted.empty()) throw Error(ErrorCode::EmptyInput, "no items");
    SensitivityComparison s;
    s.three_category_accuracy = percent_agreement<CooperationCategory>(predicted, truth);
    s.three_category_kappa = cohen_kappa(predicted, truth).kappa;
    const auto pb = to_binary(predicted);
    const auto tb = to_binary(truth);
    s.binary = classification_metrics(confusion(pb, tb));
    s.delta_accuracy = s.binary.accuracy - s.three_category_accuracy;
    s.delta_kappa = s.binary.kappa - s.three_category_kappa;
    return s;
}

namespace {

MetricsBlock make_block(std::string name, const std::vector<const RatedItem*>& items) {
    MetricsBlock b;
    b.name = std::move(name);
    b.n = items.size();
    std::vector<CooperationCategory> model, r1, r2, bench;
    for (const auto* it : items) {
        model.push_back(it->model);
        r1.push_back(it->reviewer1);
        r2.push_back(it->reviewer2);
        bench.push_back(it->benchmark);
    }
    b.confusion = confusion(to_binary(model), to_binary(bench));
    b.stats = classification_metrics(b.confusion);
    b.sensitivity = sensitivity_compare(model, bench);

    const std::vector<RaterLabels<BinaryLabel>> binary{
        {"Model", to_binary(model)}, {"EHR 1", to_binary(r1)}, {"EHR 2", to_binary(r2)}, {"Benchmark", to_binary(bench)}};
    b.raters = multirater_table<BinaryLabel>(binary, kBinaryLabels);
    const std::vector<RaterLabels<CooperationCategory>> three{
        {"Model", model}, {"EHR 1", r1}, {"EHR 2", r2}, {"Benchmark", bench}};
    b.raters_three_category = multirater_table<CooperationCategory>(three, kCategories);
    return b;
}

}  // namespace

MetricsReport build_metrics_report(std::span<const RatedItem> items) {
    if (items.empty()) throw Error(ErrorCode::EmptyInput, "no rated items");
    std::vector<const RatedItem*> all, mother, father;
    // "both" lists mother items first, then father items.
    for (const auto& it : items) (it.caregiver == CaregiverRole::Mother ? mother : father).push_back(&it);
    all = mother;
    all.insert(all.end(), father.begin(), father.end());

    MetricsReport report;
    report.blocks.push_back(make_block("both", all));
    if (!mother.empty()) report.blocks.push_back(make_block("mother", mother));
    if (!father.empty()) report.blocks.push_back(make_block("father", father));
    return report;
}

}  // namespace coop
