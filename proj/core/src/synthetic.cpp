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

#include "coop/synthetic.hpp"

#include <chrono>
#include <fstream>
#include <sstream>

#include "coop/error.hpp"
#include "coop/markers.hpp"
#include "coop/rng.hpp"
#include "coop/text.hpp"
#include "jsonl.hpp"

namespace coop {

using jsonl::Json;

void validate(const SyntheticConfig& config) {
    auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvalidConfig, msg); };
    if (config.n_cases < 1) fail("n_cases must be >= 1");
    if (config.min_reports_per_case < 1 || config.min_reports_per_case > config.max_reports_per_case) {
        fail("reports_per_case range must satisfy 1 <= min <= max");
    }
    const auto& p = config.profile;
    for (const auto* rates : {&p.mother, &p.father}) {
        if (rates->lack < 0 || rates->present < 0 || rates->lack + rates->present > 1.0) {
            fail("category rates must be non-negative and sum to at most 1");
        }
    }
    if (p.trajectory_fraction < 0 || p.trajectory_fraction > 1) fail("trajectory_fraction must be in [0,1]");
    if (p.collective_fraction < 0 || p.collective_fraction > 1) fail("collective_fraction must be in [0,1]");
    if (p.min_fillers > p.max_fillers) fail("filler range must satisfy min <= max");
    (void)MarkerVocabulary::for_language(p.language);
    try {
        (void)parse_date(config.start_date);
    } catch (const Error&) {
        fail("start_date must be an ISO date");
    }
}

namespace {

CooperationCategory draw_category(Rng& rng, const CategoryRates& rates) {
    const double u = rng.uniform();
    if (u < rates.lack) return CooperationCategory::LackOfCooperation;
    if (u < rates.lack + rates.present) return CooperationCategory::CooperationPresentOrEmerged;
    return CooperationCategory::NoEvidence;
}

struct PlannedSentence {
    std::string text;
    std::string marker;  // empty for fillers / turning points
};

// Evidence sentences for one subject, in narrative order.
std::vector<PlannedSentence> evidence_for(Rng& rng, const MarkerVocabulary& vocab, const std::string& subject,
                                          CooperationCategory category, bool trajectory) {
    std::vector<PlannedSentence> out;
    auto pick = [&](const std::vector<std::string>& list) -> const std::string& {
        return list[static_cast<std::size_t>(rng.between(0, list.size() - 1))];
    };
    auto add = [&](const std::string& predicate, const char* polarity) {
        out.push_back({subject + " " + predicate + ".", std::string(polarity) + ":" + predicate});
    };
    switch (category) {
        case CooperationCategory::LackOfCooperation: {
            const auto n = rng.between(1, 2);
            for (std::uint64_t i = 0; i < n; ++i) add(pick(vocab.lack_predicates), "lack");
            break;
        }
        case CooperationCategory::CooperationPresentOrEmerged: {
            if (trajectory) {
                add(pick(vocab.lack_predicates), "lack");
                out.push_back({vocab.turning_point, ""});
            }
            const auto n = rng.between(1, 2);
            for (std::uint64_t i = 0; i < n; ++i) add(pick(vocab.present_predicates), "present");
            break;
        }
        case CooperationCategory::NoEvidence:
            break;
    }
    return out;
}

std::string render_header(const MarkerVocabulary& vocab, const std::string& report_id, const std::string& case_id,
                          const std::string& date) {
    std::string h = vocab.header_format;
    text::replace_all(h, "{report_id}", report_id);
    text::replace_all(h, "{case_id}", case_id);
    text::replace_all(h, "{date}", date);
    return h;
}

std::string format_id(const char* prefix, std::size_t n, int width) {
    std::string digits = std::to_string(n);
    if (static_cast<int>(digits.size()) < width) digits.insert(0, static_cast<std::size_t>(width) - digits.size(), '0');
    return prefix + digits;
}

}  // namespace

SyntheticCorpus generate_synthetic_corpus(const SyntheticConfig& config) {
    validate(config);
    const auto& profile = config.profile;
    const auto& vocab = MarkerVocabulary::for_language(profile.language);
    Rng rng(config.seed);
    const auto start = std::chrono::sys_days{parse_date(config.start_date)};

    SyntheticCorpus out;
    for (std::size_t c = 1; c <= config.n_cases; ++c) {
        const auto case_id = format_id("case-", c, 5);
        const auto n_reports = rng.between(config.min_reports_per_case, config.max_reports_per_case);
        const auto case_offset = std::chrono::days{static_cast<int>(rng.between(0, 3650))};
        for (std::size_t k = 1; k <= n_reports; ++k) {
            const auto report_id = case_id + format_id("-r", k, 2);
            const auto date = format_date(Date{start + case_offset + std::chrono::days{182 * static_cast<int>(k)}});

            GroundTruthEntry mother{report_id, case_id, CaregiverRole::Mother, CooperationCategory::NoEvidence, {}, false, false};
            GroundTruthEntry father{report_id, case_id, CaregiverRole::Father, CooperationCategory::NoEvidence, {}, false, false};

            // Evidence groups, each kept in narrative order.
            std::vector<std::vector<PlannedSentence>> groups;

            bool collective = false;
            if (rng.chance(profile.collective_fraction)) {
                const auto cat = draw_category(rng, profile.mother);
                if (cat != CooperationCategory::NoEvidence) {
                    collective = true;
                    const bool traj = cat == CooperationCategory::CooperationPresentOrEmerged &&
                                      rng.chance(profile.trajectory_fraction);
                    groups.push_back(evidence_for(rng, vocab, vocab.parents_subject, cat, traj));
                    for (auto* gt : {&mother, &father}) {
                        gt->category = cat;
                        gt->collective = true;
                        gt->trajectory = traj;
                    }
                }
            }
            if (!collective) {
                for (auto* gt : {&mother, &father}) {
                    const auto& rates = gt->caregiver == CaregiverRole::Mother ? profile.mother : profile.father;
                    gt->category = draw_category(rng, rates);
                    gt->trajectory = gt->category == CooperationCategory::CooperationPresentOrEmerged &&
                                     rng.chance(profile.trajectory_fraction);
                    auto sentences = evidence_for(rng, vocab, vocab.subject(gt->caregiver), gt->category, gt->trajectory);
                    if (!sentences.empty()) groups.push_back(std::move(sentences));
                }
            }
            for (const auto& g : groups) {
                for (const auto& s : g) {
                    if (s.marker.empty()) continue;
                    if (collective) {
                        mother.markers.push_back(s.marker);
                        father.markers.push_back(s.marker);
                    } else if (s.text.starts_with(vocab.mother_subject)) {
                        mother.markers.push_back(s.marker);
                    } else {
                        father.markers.push_back(s.marker);
                    }
                }
            }

            // Interleave groups (order within each group preserved) with fillers.
            std::vector<std::size_t> cursor(groups.size(), 0);
            std::size_t remaining_markers = 0;
            for (const auto& g : groups) remaining_markers += g.size();
            std::vector<std::string> fillers = vocab.fillers;
            rng.shuffle(fillers);
            std::size_t remaining_fillers =
                std::min<std::size_t>(fillers.size(), rng.between(profile.min_fillers, profile.max_fillers));

            std::vector<std::string> sentences;
            std::size_t filler_idx = 0;
            while (remaining_markers + remaining_fillers > 0) {
                const bool take_marker =
                    remaining_markers > 0 && rng.between(1, remaining_markers + remaining_fillers) <= remaining_markers;
                if (take_marker) {
                    std::size_t pick = rng.between(0, remaining_markers - 1);
                    for (std::size_t g = 0; g < groups.size(); ++g) {
                        const auto left = groups[g].size() - cursor[g];
                        if (pick < left) {
                            sentences.push_back(groups[g][cursor[g]++].text);
                            break;
                        }
                        pick -= left;
                    }
                    --remaining_markers;
                } else {
                    sentences.push_back(fillers[filler_idx++]);
                    --remaining_fillers;
                }
            }

            std::string body = render_header(vocab, report_id, case_id, date) + "\n\n";
            for (std::size_t i = 0; i < sentences.size(); ++i) {
                if (i > 0) body += (i % 4 == 0) ? "\n\n" : " ";
                body += sentences[i];
            }
            body += '\n';

            out.corpus.ingest(body, ReportMeta{case_id, report_id, date, profile.language});
            out.truth.push_back(std::move(mother));
            out.truth.push_back(std::move(father));
        }
    }
    return out;
}

void save_ground_truth(const std::vector<GroundTruthEntry>& truth, std::ostream& out) {
    for (const auto& t : truth) {
        Json j{{"report_id", t.report_id},
               {"case_id", t.case_id},
               {"caregiver", to_string(t.caregiver)},
               {"category", to_token(t.category)},
               {"markers", t.markers},
               {"trajectory", t.trajectory},
               {"collective", t.collective}};
        out << j.dump() << '\n';
    }
}

void save_ground_truth(const std::vector<GroundTruthEntry>& truth, const std::filesystem::path& path) {
    std::ostringstream ss;
    save_ground_truth(truth, ss);
    jsonl::write_file_atomic(path, ss.str());
}

std::vector<GroundTruthEntry> load_ground_truth(std::istream& in) {
    std::vector<GroundTruthEntry> truth;
    jsonl::for_each(in, [&](const Json& obj, std::size_t line) {
        GroundTruthEntry t;
        t.report_id = jsonl::require_string(obj, "report_id", line);
        t.case_id = jsonl::require_string(obj, "case_id", line);
        auto role = parse_caregiver(jsonl::require_string(obj, "caregiver", line));
        auto cat = parse_category_token(jsonl::require_string(obj, "category", line));
        if (!role || !cat) throw Error(ErrorCode::InvalidInput, "line " + std::to_string(line) + ": bad caregiver/category");
        t.caregiver = *role;
        t.category = *cat;
        t.markers = obj.value("markers", std::vector<std::string>{});
        t.trajectory = obj.value("trajectory", false);
        t.collective = obj.value("collective", false);
        truth.push_back(std::move(t));
    });
    return truth;
}

std::vector<GroundTruthEntry> load_ground_truth(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    return load_ground_truth(in);
}

}  // namespace coop
