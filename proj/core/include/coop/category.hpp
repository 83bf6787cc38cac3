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
#include <optional>
#include <string_view>

namespace coop {

enum class CaregiverRole { Mother, Father };

inline constexpr std::array<CaregiverRole, 2> kCaregivers{CaregiverRole::Mother,
                                                          CaregiverRole::Father};

enum class CooperationCategory { LackOfCooperation, CooperationPresentOrEmerged, NoEvidence };

inline constexpr std::array<CooperationCategory, 3> kCategories{
    CooperationCategory::LackOfCooperation, CooperationCategory::CooperationPresentOrEmerged,
    CooperationCategory::NoEvidence};

/// Binary view: "positive" is Lack.
enum class BinaryLabel { Lack, NoDocumentedLack };

inline constexpr std::array<BinaryLabel, 2> kBinaryLabels{BinaryLabel::Lack,
                                                          BinaryLabel::NoDocumentedLack};

std::string_view to_string(CaregiverRole role) noexcept;  // "mother" / "father"
std::optional<CaregiverRole> parse_caregiver(std::string_view text) noexcept;

/// Wire tokens: lack_of_cooperation, cooperation_present_or_emerged, no_evidence.
std::string_view to_token(CooperationCategory category) noexcept;
std::optional<CooperationCategory> parse_category_token(std::string_view token) noexcept;

/// Human-readable names used in prompts and model answers.
std::string_view display_name(CooperationCategory category) noexcept;

std::string_view to_string(BinaryLabel label) noexcept;  // "lack" / "no_documented_lack"
std::optional<BinaryLabel> parse_binary_label(std::string_view text) noexcept;

/// Lack stays Lack; the other two categories collapse.
constexpr BinaryLabel to_binary(CooperationCategory category) noexcept {
    return category == CooperationCategory::LackOfCooperation ? BinaryLabel::Lack : BinaryLabel::NoDocumentedLack;
}

}  // namespace coop
