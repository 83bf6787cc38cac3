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

#include "coop/markers.hpp"

#include <sstream>

#include "coop/error.hpp"
#include "coop/text.hpp"
#include "jsonl.hpp"

namespace coop {

const MarkerVocabulary& MarkerVocabulary::english() {
    static const MarkerVocabulary vocab{
        "en",
        "The mother",
        "The father",
        "The parents",
        {
            "missed the agreed appointments with the caseworker",
            "did not attend the scheduled meeting at the school",
            "refused to work with the social worker",
            "did not follow the professional instructions regarding bedtime routines",
            "was unwilling to work with the family counsellor",
            "was formally instructed under Article 307 of the Civil Code",
        },
        {
            "attended the agreed appointments with the caseworker",
            "worked constructively with the caseworker on the care plan",
            "followed the professional guidance on school attendance",
            "became cooperative in the parenting sessions",
        },
        "Later in the reporting period the situation changed.",
        {
            "The child attends the third grade and has settled in well.",
            "The caseworker visited the family home twice during the period.",
            "A report from the school was obtained.",
            "The child's health is stable according to the paediatrician.",
            "The child spends weekends with relatives.",
            "Leisure activities include football and music lessons.",
            "The housing situation has not changed.",
            "The child expressed a wish to keep the current arrangement.",
            "Contact with the youth club continued.",
            "The mandate under child protection law remains in place.",
            "Financial support was reviewed by the social services office.",
            "The prognosis for the coming year is cautiously optimistic.",
            "A case conference is planned for the next period.",
            "The child's sibling started kindergarten.",
        },
        "Casework report {report_id} for case {case_id}, reporting period ending {date}.",
    };
    return vocab;
}

const MarkerVocabulary& MarkerVocabulary::german() {
    static const MarkerVocabulary vocab{
        "de",
        "Die Mutter",
        "Der Vater",
        "Die Eltern",
        {
            "hat die vereinbarten Termine nicht wahrgenommen",
            "verweigerte die Zusammenarbeit mit der Beiständin",
            "hat die fachlichen Anweisungen nicht befolgt",
            "war nicht bereit, mit der Fachperson zusammenzuarbeiten",
            "wurde förmlich gemäss Artikel 307 ZGB angewiesen",
        },
        {
            "hat die vereinbarten Termine wahrgenommen",
            "arbeitete konstruktiv mit der Beiständin zusammen",
            "befolgte die fachlichen Empfehlungen",
            "ist im Verlauf kooperativ geworden",
        },
        "Im weiteren Verlauf der Berichtsperiode zeigte sich eine Veränderung.",
        {
            "Das Kind besucht die dritte Klasse und hat sich gut eingelebt.",
            "Die Beiständin hat die Familie zweimal zu Hause besucht.",
            "Ein Schulbericht wurde eingeholt.",
            "Der Gesundheitszustand des Kindes ist stabil.",
            "Das Kind verbringt die Wochenenden bei Verwandten.",
            "Zu den Freizeitaktivitäten gehören Fussball und Musikunterricht.",
            "Die Wohnsituation ist unverändert.",
            "Das Kind äusserte den Wunsch, die aktuelle Regelung beizubehalten.",
            "Die Beistandschaft bleibt bestehen.",
            "Eine Fallbesprechung ist für die nächste Periode geplant.",
        },
        "Rechenschaftsbericht {report_id} zu Fall {case_id}, Berichtsperiode bis {date}.",
    };
    return vocab;
}

const MarkerVocabulary& MarkerVocabulary::for_language(std::string_view language) {
    if (language == "en") return english();
    if (language == "de") return german();
    throw Error(ErrorCode::InvalidConfig, "no marker vocabulary for language '" + std::string(language) + "'");
}

const MockRuleSet& MockRuleSet::default_rules() {
    static const MockRuleSet rules{
        "default",
        {
            LanguageCues{
                "en",
                {"mother", "mother's"},
                {"father", "father's"},
                {"parents", "parents'"},
                {"missed the agreed appointment", "did not attend", "refuse", "did not follow",
                 "unwilling to work", "article 307"},
                {"attended the agreed appointment", "worked constructively", "followed the professional guidance",
                 "became cooperative"},
            },
            LanguageCues{
                "de",
                {"mutter"},
                {"vater"},
                {"eltern"},
                {"termine nicht wahrgenommen", "verweigert", "nicht befolgt", "nicht bereit", "artikel 307"},
                {"termine wahrgenommen", "konstruktiv", "befolgte die fachlichen", "kooperativ geworden"},
            },
        },
    };
    return rules;
}

const MockRuleSet& MockRuleSet::by_id(std::string_view id) {
    if (id == "default" || id.empty()) return default_rules();
    throw Error(ErrorCode::InvalidConfig, "unknown mock rule set '" + std::string(id) + "'");
}

namespace {

bool mentions_any(std::string_view sentence, const std::vector<std::string>& words) {
    for (const auto& w : words) {
        if (text::contains_word(sentence, w)) return true;
    }
    return false;
}

const std::string* first_cue(std::string_view sentence, const std::vector<std::string>& cues) {
    for (const auto& c : cues) {
        if (sentence.find(c) != std::string_view::npos) return &c;
    }
    return nullptr;
}

}  // namespace

MockDecision apply_mock_rules(std::string_view report_text, CaregiverRole caregiver, const MockRuleSet& rules) {
    MockDecision decision{CooperationCategory::NoEvidence, {}, false};
    const auto lowered = text::to_lower_ascii(report_text);
    const auto sentences = text::split_sentences(lowered);
    const auto original = text::split_sentences(report_text);

    for (std::size_t i = 0; i < sentences.size(); ++i) {
        const auto s = sentences[i];
        for (const auto& lang : rules.languages) {
            const auto& own = caregiver == CaregiverRole::Mother ? lang.mother_words : lang.father_words;
            if (!mentions_any(s, own) && !mentions_any(s, lang.collective_words)) continue;
            const std::string* lack = first_cue(s, lang.lack_cues);
            const std::string* present = first_cue(s, lang.present_cues);
            const std::string orig = i < original.size() ? std::string(original[i]) : std::string(s);
            if (lack) decision.evidence.push_back({i, EvidencePolarity::Lack, orig, *lack});
            if (present) decision.evidence.push_back({i, EvidencePolarity::Present, orig, *present});
            if (lack || present) break;
        }
    }

    bool any_lack = false;
    bool any_present = false;
    for (const auto& e : decision.evidence) {
        (e.polarity == EvidencePolarity::Lack ? any_lack : any_present) = true;
    }
    decision.mixed = any_lack && any_present;
    if (decision.evidence.empty()) {
        decision.category = CooperationCategory::NoEvidence;
    } else if (decision.evidence.back().polarity == EvidencePolarity::Present) {
        decision.category = CooperationCategory::CooperationPresentOrEmerged;
    } else {
        decision.category = CooperationCategory::LackOfCooperation;
    }
    return decision;
}

std::string mock_classify(std::string_view report_text, CaregiverRole caregiver, const MockRuleSet& rules) {
    const auto decision = apply_mock_rules(report_text, caregiver, rules);
    const auto role = to_string(caregiver);

    std::ostringstream out;
    out << "<think>\nI need to assess the " << role << " using only what the report documents.\n";
    for (const auto& e : decision.evidence) {
        out << "- Sentence " << (e.sentence_index + 1) << " (\"" << e.sentence << "\") points to "
            << (e.polarity == EvidencePolarity::Lack ? "problematic engagement" : "constructive engagement")
            << ".\n";
    }
    if (decision.evidence.empty()) {
        out << "Nothing in the report describes how this caregiver engages with professionals.\n";
    } else if (decision.mixed) {
        out << "The evidence is mixed, so the trajectory over the period decides.\n";
    }
    out << "</think>\n\n";

    out << "Final classification for the " << role << ": " << display_name(decision.category) << ".\n";
    out << "Justification: ";
    switch (decision.category) {
        case CooperationCategory::LackOfCooperation:
            out << (decision.mixed ? "after earlier engagement the most recent documentation shows "
                                     "non-compliance with professional arrangements."
                                   : "the report documents non-compliance with professional arrangements.");
            break;
        case CooperationCategory::CooperationPresentOrEmerged:
            out << (decision.mixed ? "initial difficulties were followed by documented engagement, so "
                                     "willingness developed over time."
                                   : "the report documents engagement with professionals.");
            break;
        case CooperationCategory::NoEvidence:
            out << "the report contains no information about this caregiver's engagement.";
            break;
    }
    out << '\n';
    return out.str();
}

std::string mock_extract(std::string_view final_answer) {
    const auto lowered = text::to_lower_ascii(final_answer);
    std::string token = "undetermined";
    int hits = 0;
    for (auto c : kCategories) {
        if (lowered.find(display_name(c)) != std::string::npos) {
            ++hits;
            token = std::string(to_token(c));
        }
    }
    if (hits != 1) token = "undetermined";
    return jsonl::Json{{"category", token}}.dump();
}

}  // namespace coop
