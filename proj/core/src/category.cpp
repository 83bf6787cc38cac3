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

#include "coop/category.hpp"

namespace coop {

std::string_view to_string(CaregiverRole role) noexcept {
    return role == CaregiverRole::Mother ? "mother" : "father";
}

std::optional<CaregiverRole> parse_caregiver(std::string_view text) noexcept {
    if (text == "mother" || text == "Mother") return CaregiverRole::Mother;
    if (text == "father" || text == "Father") return CaregiverRole::Father;
    return std::nullopt;
}

std::string_view to_token(CooperationCategory category) noexcept {
    switch (category) {
        case CooperationCategory::LackOfCooperation: return "lack_of_cooperation";
        case CooperationCategory::CooperationPresentOrEmerged: return "cooperation_present_or_emerged";
        case CooperationCategory::NoEvidence: return "no_evidence";
    }
    return "";
}

std::optional<CooperationCategory> parse_category_token(std::string_view token) noexcept {
    for (auto c : kCategories) {
        if (token == to_token(c)) return c;
    }
    return std::nullopt;
}

std::string_view display_name(CooperationCategory category) noexcept {
    switch (category) {
        case CooperationCategory::LackOfCooperation: return "lack of cooperation";
        case CooperationCategory::CooperationPresentOrEmerged: return "cooperation present or emerged";
        case CooperationCategory::NoEvidence: return "no evidence";
    }
    return "";
}

std::string_view to_string(BinaryLabel label) noexcept {
    return label == BinaryLabel::Lack ? "lack" : "no_documented_lack";
}

std::optional<BinaryLabel> parse_binary_label(std::string_view text) noexcept {
    if (text == "lack") return BinaryLabel::Lack;
    if (text == "no_documented_lack") return BinaryLabel::NoDocumentedLack;
    return std::nullopt;
}

}  // namespace coop
