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

#include <optional>
#include <string>
#include <string_view>

#include "coop/backend.hpp"
#include "coop/category.hpp"
#include "coop/inference.hpp"
#include "coop/jsonl_store.hpp"
#include "coop/prompting.hpp"

namespace coop {

enum class ExtractionMethod { Structured, Fallback };

struct ExtractionResult {
    std::string report_id;
    CaregiverRole caregiver = CaregiverRole::Mother;
    CooperationCategory category = CooperationCategory::NoEvidence;
    std::string extractor_model;
    std::string raw_json;  // extractor reply as received
    ExtractionMethod method = ExtractionMethod::Structured;

    bool operator==(const ExtractionResult&) const = default;
};

std::string_view to_string(ExtractionMethod method) noexcept;

/// Serialized with an extra "key" field; `key` is the cache key.
std::string to_json_line(const ExtractionResult& result, std::string_view key);
ExtractionResult extraction_from_json(std::string_view line);

/// Accepts exactly one top-level JSON object (optionally wrapped in a
/// Markdown code fence) with a string field "category"; other fields are
/// ignored. Throws ExtractionUnparseable or CategoryUnknown.
CooperationCategory validate_extraction_schema(std::string_view raw_json);

/// Fallback scan of a final answer for category phrases. Returns a value only
/// when exactly one category's phrases occur.
std::optional<CooperationCategory> scan_category_phrases(std::string_view final_answer);

struct ExtractionOptions {
    SamplingConfig sampling = default_extraction_sampling();
    RetryPolicy retry;
    bool fallback = false;
};

/// One structured extraction call. Only `final_answer` is sent.
ExtractionResult extract_category(std::string_view final_answer, ChatBackend& backend,
                                  const ExtractionTemplate& tmpl, const ExtractionOptions& options = {});

std::string extraction_cache_key(std::string_view report_id, CaregiverRole caregiver, std::string_view template_version,
                                 std::string_view config_digest, std::string_view answer_hash);

/// Cached, concurrent wrapper around extract_category.
class Extractor {
public:
    Extractor(ChatBackend& backend, ExtractionTemplate tmpl, ExtractionOptions options, KeyedJsonlStore* cache);

    ExtractionResult extract(std::string_view report_id, CaregiverRole caregiver, std::string_view final_answer);

    const InferenceStats& stats() const { return stats_; }
    const std::string& config_digest() const { return digest_; }

private:
    ChatBackend& backend_;
    ExtractionTemplate template_;
    ExtractionOptions options_;
    KeyedJsonlStore* cache_;
    std::string digest_;
    InferenceStats stats_;
};

}  // namespace coop
