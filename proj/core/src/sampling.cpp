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

#include "coop/sampling.hpp"

#include <algorithm>
#include <set>
#include <fstream>
#include <sstream>
#include <utility>

#include "coop/error.hpp"
#include "coop/rng.hpp"
#include "coop/text.hpp"
#include "csv.hpp"
#include "jsonl.hpp"
#include "timestamp.hpp"

namespace coop {

using jsonl::Json;

std::string_view to_string(Stratum stratum) noexcept {
    switch (stratum) {
        case Stratum::BothLack: return "both_lack";
        case Stratum::NeitherLack: return "neither_lack";
        case Stratum::MotherOnlyLack: return "mother_only_lack";
        case Stratum::FatherOnlyLack: return "father_only_lack";
    }
    return "";
}

std::optional<Stratum> parse_stratum(std::string_view text) noexcept {
    for (auto s : kStrata) {
        if (to_string(s) == text) return s;
    }
    return std::nullopt;
}

Stratum stratum_of(BinaryLabel mother, BinaryLabel father) noexcept {
    const bool m = mother == BinaryLabel::Lack;
    const bool f = father == BinaryLabel::Lack;
    if (m && f) return Stratum::BothLack;
    if (m) return Stratum::MotherOnlyLack;
    if (f) return Stratum::FatherOnlyLack;
    return Stratum::NeitherLack;
}

std::vector<StratumSpec> default_strata() {
    return {{Stratum::BothLack, 20}, {Stratum::NeitherLack, 20}, {Stratum::MotherOnlyLack, 15},
            {Stratum::FatherOnlyLack, 15}};
}

std::vector<SampleItem> build_stratified_sample(std::span<const ClassifiedReport> population,
                                                std::span<const StratumSpec> spec, std::uint64_t seed) {
    std::map<Stratum, std::vector<std::string>> pools;
    std::set<std::string_view> seen;
    for (const auto& r : population) {
        if (!seen.insert(r.report_id).second) {
            throw Error(ErrorCode::InvalidInput, "duplicate report '" + r.report_id + "' in sampling population");
        }
        pools[stratum_of(r.mother, r.father)].push_back(r.report_id);
    }

    std::set<Stratum> specified;
    std::string shortfall;
    for (const auto& s : spec) {
        if (!specified.insert(s.stratum).second) {
            throw Error(ErrorCode::InvalidInput, "stratum " + std::string(to_string(s.stratum)) + " listed twice");
        }
        const auto available = pools[s.stratum].size();
        if (available < s.target_count) {
            if (!shortfall.empty()) shortfall += "; ";
            shortfall += std::string(to_string(s.stratum)) + " has " + std::to_string(available) + " of " +
                         std::to_string(s.target_count);
        }
    }
    if (!shortfall.empty()) throw Error(ErrorCode::StratumExhausted, shortfall);

    Rng rng(seed);
    std::vector<SampleItem> out;
    for (const auto& s : spec) {
        auto& pool = pools[s.stratum];
        std::sort(pool.begin(), pool.end());
        // Partial Fisher-Yates: the first target_count slots become the draw.
        for (std::size_t i = 0; i < s.target_count; ++i) {
            const auto j = static_cast<std::size_t>(rng.between(i, pool.size() - 1));
            std::swap(pool[i], pool[j]);
        }
        std::vector<std::string> drawn(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(s.target_count));
        std::sort(drawn.begin(), drawn.end());
        for (auto& id : drawn) out.push_back({std::move(id), s.stratum});
    }
    return out;
}

void save_sample(std::span<const SampleItem> sample, const std::filesystem::path& path) {
    std::string content;
    for (const auto& item : sample) {
        content += Json{{"report_id", item.report_id}, {"stratum", to_string(item.stratum)}}.dump();
        content += '\n';
    }
    jsonl::write_file_atomic(path, content);
}

std::vector<SampleItem> load_sample(const std::filesystem::path& path) {
    std::vector<SampleItem> out;
    jsonl::for_each_file(path, [&](const Json& obj, std::size_t line) {
        auto stratum = parse_stratum(jsonl::require_string(obj, "stratum", line));
        if (!stratum) throw Error(ErrorCode::InvalidInput, "line " + std::to_string(line) + ": unknown stratum");
        out.push_back({jsonl::require_string(obj, "report_id", line), *stratum});
    });
    return out;
}

namespace {

CaregiverRole caregiver_field(const Json& j) {
    auto role = parse_caregiver(j.at("caregiver").get<std::string>());
    if (!role) throw Error(ErrorCode::InvalidInput, "unknown caregiver");
    return *role;
}

CooperationCategory category_field(const Json& j, const char* field) {
    auto cat = parse_category_token(j.at(field).get<std::string>());
    if (!cat) throw Error(ErrorCode::CategoryUnknown, "unknown category token");
    return *cat;
}

std::string item_key(const ItemKey& key) { return key.report_id + "|" + std::string(to_string(key.caregiver)); }

}  // namespace

std::string to_json_line(const AnnotationRecord& r) {
    Json j{{"key", item_key({r.report_id, r.caregiver}) + "|" + r.reviewer_id},
           {"report_id", r.report_id},
           {"caregiver", to_string(r.caregiver)},
           {"reviewer_id", r.reviewer_id},
           {"category", to_token(r.category)},
           {"passages", r.passages},
           {"timestamp", r.timestamp}};
    if (r.justification) j["justification"] = *r.justification;
    return j.dump();
}

AnnotationRecord annotation_from_json(std::string_view line) {
    try {
        const auto j = Json::parse(line);
        AnnotationRecord r;
        r.report_id = j.at("report_id").get<std::string>();
        r.caregiver = caregiver_field(j);
        r.reviewer_id = j.at("reviewer_id").get<std::string>();
        r.category = category_field(j, "category");
        r.passages = j.value("passages", std::vector<std::string>{});
        if (auto it = j.find("justification"); it != j.end() && it->is_string()) r.justification = it->get<std::string>();
        r.timestamp = j.value("timestamp", "");
        return r;
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::InvalidInput, std::string("annotation record: ") + e.what());
    }
}

std::string_view to_string(ConsensusSource source) noexcept {
    return source == ConsensusSource::AgreedIndependently ? "agreed_independently" : "resolved_by_discussion";
}

std::optional<ConsensusSource> parse_consensus_source(std::string_view text) noexcept {
    if (text == "agreed_independently") return ConsensusSource::AgreedIndependently;
    if (text == "resolved_by_discussion") return ConsensusSource::ResolvedByDiscussion;
    return std::nullopt;
}

std::string to_json_line(const ConsensusRecord& r) {
    return Json{{"report_id", r.report_id},
                {"caregiver", to_string(r.caregiver)},
                {"category", to_token(r.category)},
                {"source", to_string(r.source)},
                {"notes", r.notes}}
        .dump();
}

ConsensusRecord consensus_from_json(std::string_view line) {
    try {
        const auto j = Json::parse(line);
        ConsensusRecord r;
        r.report_id = j.at("report_id").get<std::string>();
        r.caregiver = caregiver_field(j);
        r.category = category_field(j, "category");
        auto source = parse_consensus_source(j.at("source").get<std::string>());
        if (!source) throw Error(ErrorCode::InvalidInput, "unknown consensus source");
        r.source = *source;
        r.notes = j.value("notes", "");
        return r;
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::InvalidInput, std::string("consensus record: ") + e.what());
    }
}

std::string_view to_string(Scheme scheme) noexcept { return scheme == Scheme::Binary ? "binary" : "three"; }

std::optional<Scheme> parse_scheme(std::string_view text) noexcept {
    if (text == "three" || text == "three_category" || text.empty()) return Scheme::ThreeCategory;
    if (text == "binary") return Scheme::Binary;
    return std::nullopt;
}

struct ValidationStore::ItemState {
    std::array<std::optional<AnnotationRecord>, 2> annotations;
    std::optional<ConsensusRecord> decision;

    bool complete() const { return annotations[0] && annotations[1]; }
    bool agreed() const { return complete() && annotations[0]->category == annotations[1]->category; }
};

ValidationStore::ValidationStore(std::vector<SampleItem> sample, const Corpus& corpus,
                                 std::array<std::string, 2> reviewers, const std::filesystem::path& dir)
    : sample_(std::move(sample)), reviewers_(std::move(reviewers)) {
    if (sample_.empty()) throw Error(ErrorCode::InvalidInput, "validation sample is empty");
    if (reviewers_[0].empty() || reviewers_[1].empty() || reviewers_[0] == reviewers_[1]) {
        throw Error(ErrorCode::InvalidConfig, "two distinct non-empty reviewer ids are required");
    }
    for (const auto& s : sample_) {
        const auto* rec = corpus.find(s.report_id);
        if (!rec) throw Error(ErrorCode::InvalidInput, "sampled report '" + s.report_id + "' is not in the corpus");
        if (!texts_.emplace(s.report_id, rec->text).second) {
            throw Error(ErrorCode::InvalidInput, "report '" + s.report_id + "' sampled twice");
        }
        for (auto role : kCaregivers) items_.emplace(ItemKey{s.report_id, role}, std::make_unique<ItemState>());
    }

    annotations_ = std::make_unique<KeyedJsonlStore>(dir.empty() ? dir : dir / "annotations.jsonl");
    for (const auto& line : annotations_->lines()) apply_annotation(annotation_from_json(line));

    if (!dir.empty()) {
        consensus_path_ = dir / "consensus.jsonl";
        if (std::filesystem::exists(consensus_path_)) {
            jsonl::for_each_file(
                consensus_path_,
                [&](const Json& obj, std::size_t) {
                    auto rec = consensus_from_json(obj.dump());
                    item({rec.report_id, rec.caregiver}).decision = std::move(rec);
                },
                true);
        }
    }
}

ValidationStore::~ValidationStore() = default;

bool ValidationStore::in_sample(std::string_view report_id) const { return texts_.find(report_id) != texts_.end(); }

const std::string& ValidationStore::report_text(std::string_view report_id) const {
    auto it = texts_.find(report_id);
    if (it == texts_.end()) throw Error(ErrorCode::NotInSample, "report '" + std::string(report_id) + "' is not sampled");
    return it->second;
}

const ValidationStore::ItemState& ValidationStore::item(const ItemKey& key) const {
    auto it = items_.find(key);
    if (it == items_.end()) throw Error(ErrorCode::UnknownItem, "no sampled item " + item_key(key));
    return *it->second;
}

ValidationStore::ItemState& ValidationStore::item(const ItemKey& key) {
    return const_cast<ItemState&>(std::as_const(*this).item(key));
}

std::optional<std::size_t> ValidationStore::reviewer_index(std::string_view reviewer_id) const {
    for (std::size_t i = 0; i < reviewers_.size(); ++i) {
        if (reviewers_[i] == reviewer_id) return i;
    }
    return std::nullopt;
}

void ValidationStore::apply_annotation(const AnnotationRecord& record) {
    auto idx = reviewer_index(record.reviewer_id);
    if (!idx) throw Error(ErrorCode::UnknownReviewer, "reviewer '" + record.reviewer_id + "' is not registered");
    auto& state = item({record.report_id, record.caregiver});
    state.annotations[*idx] = record;
    if (state.complete()) ++complete_items_;
}

AnnotationRecord ValidationStore::record_annotation(AnnotationRecord record) {
    if (!in_sample(record.report_id)) {
        throw Error(ErrorCode::NotInSample, "report '" + record.report_id + "' is not sampled");
    }
    if (!reviewer_index(record.reviewer_id)) {
        throw Error(ErrorCode::UnknownReviewer, "reviewer '" + record.reviewer_id + "' is not registered");
    }
    const auto& text = report_text(record.report_id);
    for (const auto& p : record.passages) {
        if (p.empty()) throw Error(ErrorCode::InvalidInput, "empty passage");
        if (text.find(p) == std::string::npos) {
            throw Error(ErrorCode::PassageNotInReport, "passage not found in report '" + record.report_id + "'");
        }
    }
    if (record.timestamp.empty()) record.timestamp = utc_timestamp();

    std::lock_guard lock(mu_);
    const auto key = item_key({record.report_id, record.caregiver}) + "|" + record.reviewer_id;
    if (!annotations_->put(key, to_json_line(record))) {
        throw Error(ErrorCode::DuplicateAnnotation, "annotation " + key + " already recorded");
    }
    apply_annotation(record);
    return record;
}

bool ValidationStore::consensus_open_locked() const { return complete_items_ == items_.size(); }

bool ValidationStore::consensus_open() const {
    std::lock_guard lock(mu_);
    return consensus_open_locked();
}

std::size_t ValidationStore::annotation_count() const { return annotations_->size(); }

std::optional<AnnotationRecord> ValidationStore::annotation(const ItemKey& key, std::string_view reviewer_id,
                                                            std::string_view requester) const {
    if (!in_sample(key.report_id)) throw Error(ErrorCode::NotInSample, "report '" + key.report_id + "' is not sampled");
    auto idx = reviewer_index(reviewer_id);
    if (!idx) throw Error(ErrorCode::UnknownReviewer, "reviewer '" + std::string(reviewer_id) + "' is not registered");
    if (!reviewer_index(requester)) {
        throw Error(ErrorCode::UnknownReviewer, "reviewer '" + std::string(requester) + "' is not registered");
    }
    std::lock_guard lock(mu_);
    if (requester != reviewer_id && !consensus_open_locked()) {
        throw Error(ErrorCode::Forbidden, "annotations of other reviewers are hidden until the consensus phase");
    }
    return item(key).annotations[*idx];
}

std::vector<AnnotationRecord> ValidationStore::visible_annotations(std::string_view requester) const {
    auto idx = reviewer_index(requester);
    if (!idx) throw Error(ErrorCode::UnknownReviewer, "reviewer '" + std::string(requester) + "' is not registered");
    std::lock_guard lock(mu_);
    const bool open = consensus_open_locked();
    std::vector<AnnotationRecord> out;
    for (const auto& s : sample_) {
        for (auto role : kCaregivers) {
            const auto& state = item({s.report_id, role});
            for (std::size_t r = 0; r < 2; ++r) {
                if ((open || r == *idx) && state.annotations[r]) out.push_back(*state.annotations[r]);
            }
        }
    }
    return out;
}

DisagreementList ValidationStore::list_disagreements(Scheme scheme) const {
    std::lock_guard lock(mu_);
    DisagreementList out;
    for (const auto& s : sample_) {
        for (auto role : kCaregivers) {
            const auto& state = item({s.report_id, role});
            if (!state.complete()) {
                out.incomplete.push_back({s.report_id, role});
                continue;
            }
            const auto a = state.annotations[0]->category;
            const auto b = state.annotations[1]->category;
            const bool differ = scheme == Scheme::Binary ? to_binary(a) != to_binary(b) : a != b;
            if (differ) out.items.push_back({s.report_id, role, {a, b}});
        }
    }
    return out;
}

ConsensusRecord ValidationStore::resolve_consensus(const ItemKey& key, CooperationCategory category,
                                                   std::string notes) {
    std::lock_guard lock(mu_);
    auto& state = item(key);
    if (!consensus_open_locked()) {
        throw Error(ErrorCode::IncompleteAnnotations, "consensus opens once both reviewers have annotated every item");
    }
    ConsensusRecord rec{key.report_id, key.caregiver, category, ConsensusSource::ResolvedByDiscussion, std::move(notes)};
    if (state.agreed()) {
        if (state.annotations[0]->category == category) {
            rec.source = ConsensusSource::AgreedIndependently;
        } else if (text::trim(rec.notes).empty()) {
            throw Error(ErrorCode::NoteRequired, "overriding an agreed item requires notes");
        }
    }
    if (!consensus_path_.empty()) {
        std::ofstream out(consensus_path_, std::ios::binary | std::ios::app);
        out << to_json_line(rec) << '\n';
        out.flush();
        if (!out) throw Error(ErrorCode::IoError, "cannot append to " + consensus_path_.string());
    }
    state.decision = rec;
    return rec;
}

std::vector<ConsensusRecord> ValidationStore::decisions() const {
    std::lock_guard lock(mu_);
    std::vector<ConsensusRecord> out;
    for (const auto& s : sample_) {
        for (auto role : kCaregivers) {
            const auto& state = item({s.report_id, role});
            if (state.decision) out.push_back(*state.decision);
        }
    }
    return out;
}

std::size_t ValidationStore::unresolved_count() const {
    std::lock_guard lock(mu_);
    std::size_t n = 0;
    for (const auto& [key, state] : items_) {
        if (state->complete() && !state->agreed() && !state->decision) ++n;
    }
    return n;
}

std::vector<ConsensusRecord> ValidationStore::export_benchmark() const {
    std::lock_guard lock(mu_);
    if (!consensus_open_locked()) {
        throw Error(ErrorCode::IncompleteAnnotations,
                    std::to_string(items_.size() - complete_items_) + " items still lack annotations");
    }
    std::vector<ConsensusRecord> out;
    std::size_t unresolved = 0;
    for (const auto& s : sample_) {
        for (auto role : kCaregivers) {
            const auto& state = item({s.report_id, role});
            if (state.decision) {
                out.push_back(*state.decision);
            } else if (state.agreed()) {
                out.push_back({s.report_id, role, state.annotations[0]->category, ConsensusSource::AgreedIndependently, ""});
            } else {
                ++unresolved;
            }
        }
    }
    if (unresolved > 0) {
        throw Error(ErrorCode::UnresolvedRemaining, std::to_string(unresolved) + " disagreements are unresolved");
    }
    return out;
}

std::string benchmark_csv(std::span<const ConsensusRecord> records) {
    std::string out = "report_id,caregiver,consensus_category,source\n";
    for (const auto& r : records) {
        out += csv::escape(r.report_id);
        out += ',';
        out += to_string(r.caregiver);
        out += ',';
        out += to_token(r.category);
        out += ',';
        out += to_string(r.source);
        out += '\n';
    }
    return out;
}

std::vector<BenchmarkRow> parse_benchmark_csv(std::string_view csv_text) {
    std::vector<BenchmarkRow> out;
    std::istringstream in{std::string(csv_text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = csv::parse_line(line);
        if (line_no == 1) {
            if (fields != std::vector<std::string>{"report_id", "caregiver", "consensus_category", "source"}) {
                throw Error(ErrorCode::InvalidInput, "unexpected benchmark header");
            }
            continue;
        }
        if (fields.size() != 4) throw Error(ErrorCode::InvalidInput, "line " + std::to_string(line_no) + ": expected 4 fields");
        auto role = parse_caregiver(fields[1]);
        auto cat = parse_category_token(fields[2]);
        auto source = parse_consensus_source(fields[3]);
        if (!role || !cat || !source) {
            throw Error(ErrorCode::InvalidInput, "line " + std::to_string(line_no) + ": invalid value");
        }
        out.push_back({fields[0], *role, *cat, *source});
    }
    return out;
}

}  // namespace coop
