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
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "coop/category.hpp"
#include "coop/corpus.hpp"
#include "coop/jsonl_store.hpp"

namespace coop {

/// Classification pattern of a report over (mother, father).
enum class Stratum { BothLack, NeitherLack, MotherOnlyLack, FatherOnlyLack };

inline constexpr std::array<Stratum, 4> kStrata{Stratum::BothLack, Stratum::NeitherLack, Stratum::MotherOnlyLack,
                                                Stratum::FatherOnlyLack};

std::string_view to_string(Stratum stratum) noexcept;  // "both_lack", ...
std::optional<Stratum> parse_stratum(std::string_view text) noexcept;
Stratum stratum_of(BinaryLabel mother, BinaryLabel father) noexcept;

struct StratumSpec {
    Stratum stratum = Stratum::BothLack;
    std::size_t target_count = 0;

    bool operator==(const StratumSpec&) const = default;
};

/// 20 both-lack, 20 neither, 15 mother-only, 15 father-only.
std::vector<StratumSpec> default_strata();

struct ClassifiedReport {
    std::string report_id;
    BinaryLabel mother = BinaryLabel::NoDocumentedLack;
    BinaryLabel father = BinaryLabel::NoDocumentedLack;
};

struct SampleItem {
    std::string report_id;
    Stratum stratum = Stratum::BothLack;

    bool operator==(const SampleItem&) const = default;
};

/// Draws `target_count` reports without replacement from each stratum.
/// Output follows the order of `spec`, ids sorted within a stratum. The
/// result depends only on the population set, the spec and the seed.
/// Throws StratumExhausted listing every short stratum.
std::vector<SampleItem> build_stratified_sample(std::span<const ClassifiedReport> population,
                                                std::span<const StratumSpec> spec, std::uint64_t seed);

void save_sample(std::span<const SampleItem> sample, const std::filesystem::path& path);
std::vector<SampleItem> load_sample(const std::filesystem::path& path);

struct AnnotationRecord {
    std::string report_id;
    CaregiverRole caregiver = CaregiverRole::Mother;
    std::string reviewer_id;
    CooperationCategory category = CooperationCategory::NoEvidence;
    std::vector<std::string> passages;  // exact substrings of the report text
    std::optional<std::string> justification;
    std::string timestamp;  // ISO-8601 UTC; filled on record when empty

    bool operator==(const AnnotationRecord&) const = default;
};

std::string to_json_line(const AnnotationRecord& record);
AnnotationRecord annotation_from_json(std::string_view line);

enum class ConsensusSource { AgreedIndependently, ResolvedByDiscussion };

std::string_view to_string(ConsensusSource source) noexcept;
std::optional<ConsensusSource> parse_consensus_source(std::string_view text) noexcept;

struct ConsensusRecord {
    std::string report_id;
    CaregiverRole caregiver = CaregiverRole::Mother;
    CooperationCategory category = CooperationCategory::NoEvidence;
    ConsensusSource source = ConsensusSource::AgreedIndependently;
    std::string notes;

    bool operator==(const ConsensusRecord&) const = default;
};

std::string to_json_line(const ConsensusRecord& record);
ConsensusRecord consensus_from_json(std::string_view line);

enum class Scheme { ThreeCategory, Binary };

std::string_view to_string(Scheme scheme) noexcept;
std::optional<Scheme> parse_scheme(std::string_view text) noexcept;

struct ItemKey {
    std::string report_id;
    CaregiverRole caregiver = CaregiverRole::Mother;

    auto operator<=>(const ItemKey&) const = default;
};

struct Disagreement {
    std::string report_id;
    CaregiverRole caregiver = CaregiverRole::Mother;
    /// Categories in reviewer registration order.
    std::array<CooperationCategory, 2> categories{};
};

struct DisagreementList {
    std::vector<Disagreement> items;
    /// Items lacking one or both annotations; not fatal.
    std::vector<ItemKey> incomplete;
};

/// Annotation and consensus state for one validation sample. Annotations go
/// to `<dir>/annotations.jsonl`, consensus decisions to
/// `<dir>/consensus.jsonl`; both are append-only and replayed on open. An
/// empty `dir` keeps everything in memory.
class ValidationStore {
public:
    ValidationStore(std::vector<SampleItem> sample, const Corpus& corpus, std::array<std::string, 2> reviewers,
                    const std::filesystem::path& dir = {});
    ~ValidationStore();

    const std::vector<SampleItem>& sample() const { return sample_; }
    const std::array<std::string, 2>& reviewers() const { return reviewers_; }
    bool in_sample(std::string_view report_id) const;
    /// Throws NotInSample.
    const std::string& report_text(std::string_view report_id) const;

    /// Throws NotInSample, UnknownReviewer, DuplicateAnnotation,
    /// PassageNotInReport, InvalidInput (empty passage).
    AnnotationRecord record_annotation(AnnotationRecord record);

    /// Reads one annotation on behalf of `requester`. Before the consensus
    /// phase only the author may read it (Forbidden otherwise).
    std::optional<AnnotationRecord> annotation(const ItemKey& key, std::string_view reviewer_id,
                                               std::string_view requester) const;
    /// Every annotation `requester` may currently see, in sample order.
    std::vector<AnnotationRecord> visible_annotations(std::string_view requester) const;

    std::size_t annotation_count() const;
    /// True once both reviewers have annotated every item.
    bool consensus_open() const;

    DisagreementList list_disagreements(Scheme scheme = Scheme::ThreeCategory) const;

    /// Records a consensus decision; a later decision for the same item
    /// supersedes an earlier one. Overriding an item the reviewers agreed on
    /// requires notes. Throws UnknownItem, IncompleteAnnotations, NoteRequired.
    ConsensusRecord resolve_consensus(const ItemKey& key, CooperationCategory category, std::string notes);

    /// Explicit decisions currently in force.
    std::vector<ConsensusRecord> decisions() const;
    /// Three-category disagreements without a decision.
    std::size_t unresolved_count() const;

    /// Full benchmark, two entries per sampled report (mother, father) in
    /// sample order; agreements without a decision are ratified as
    /// AgreedIndependently. Throws IncompleteAnnotations or UnresolvedRemaining.
    std::vector<ConsensusRecord> export_benchmark() const;

private:
    struct ItemState;

    const ItemState& item(const ItemKey& key) const;
    ItemState& item(const ItemKey& key);
    std::optional<std::size_t> reviewer_index(std::string_view reviewer_id) const;
    void apply_annotation(const AnnotationRecord& record);
    bool consensus_open_locked() const;

    std::vector<SampleItem> sample_;
    std::array<std::string, 2> reviewers_;
    std::map<std::string, std::string, std::less<>> texts_;
    std::map<ItemKey, std::unique_ptr<ItemState>> items_;
    std::size_t complete_items_ = 0;
    std::unique_ptr<KeyedJsonlStore> annotations_;
    std::filesystem::path consensus_path_;
    mutable std::mutex mu_;
};

struct BenchmarkRow {
    std::string report_id;
    CaregiverRole caregiver = CaregiverRole::Mother;
    CooperationCategory category = CooperationCategory::NoEvidence;
    ConsensusSource source = ConsensusSource::AgreedIndependently;

    bool operator==(const BenchmarkRow&) const = default;
};

/// CSV: report_id,caregiver,consensus_category,source
std::string benchmark_csv(std::span<const ConsensusRecord> records);
std::vector<BenchmarkRow> parse_benchmark_csv(std::string_view csv_text);

}  // namespace coop
