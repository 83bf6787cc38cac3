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

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <semaphore>
#include <string>

#include "coop/backend.hpp"
#include "coop/category.hpp"
#include "coop/jsonl_store.hpp"
#include "coop/prompting.hpp"
#include "coop/reasoning.hpp"

namespace coop {

struct RawModelOutput {
    std::string report_id;
    CaregiverRole caregiver = CaregiverRole::Mother;
    std::string template_version;  // "<template_id>@<version>"
    std::string config_digest;
    std::string prompt_hash;
    std::string full_text;
    std::string thinking;
    std::string final_answer;
    std::uint64_t latency_ms = 0;
    std::optional<TokenUsage> token_usage;
    std::optional<std::int64_t> server_seed;
    bool top_k_dropped = false;

    bool operator==(const RawModelOutput&) const = default;
};

std::string to_json_line(const RawModelOutput& output);
RawModelOutput raw_output_from_json(std::string_view line);

std::string assessment_cache_key(std::string_view report_id, CaregiverRole caregiver,
                                 std::string_view template_version, std::string_view config_digest);

struct RetryPolicy {
    int max_attempts = 4;
    std::chrono::milliseconds base_delay{500};
    std::chrono::milliseconds max_delay{std::chrono::seconds(30)};

    bool operator==(const RetryPolicy&) const = default;
};

/// Calls backend.complete, retrying EndpointUnavailable with exponential
/// backoff (base, 2*base, ... capped at max_delay). After max_attempts the
/// last EndpointUnavailable propagates. `retries` counts extra attempts.
ChatResponse complete_with_retry(ChatBackend& backend, const ChatRequest& request, const RetryPolicy& policy,
                                 std::atomic<std::uint64_t>* retries = nullptr);

/// Digest of everything that changes an assessment besides the prompt.
std::string assessment_config_digest(const SamplingConfig& sampling, const BackendDescriptor& backend,
                                     const DelimiterConfig& delimiters);

struct InferenceStats {
    std::atomic<std::uint64_t> backend_calls{0};
    std::atomic<std::uint64_t> cache_hits{0};
    std::atomic<std::uint64_t> retries{0};
    std::atomic<std::uint64_t> total_latency_ms{0};

    double mean_latency_ms() const {
        const auto n = backend_calls.load();
        return n == 0 ? 0.0 : static_cast<double>(total_latency_ms.load()) / static_cast<double>(n);
    }
};

/// Sends assessment prompts and splits the answers. Safe to call from many
/// threads; at most `max_in_flight` backend calls are outstanding at once.
class InferenceClient {
public:
    struct Options {
        SamplingConfig sampling;
        DelimiterConfig delimiters;
        RetryPolicy retry;
        std::size_t max_in_flight = 4;
    };

    /// `cache` may be null (no persistence, no skipping).
    InferenceClient(ChatBackend& backend, Options options, KeyedJsonlStore* cache);

    /// Throws EndpointUnavailable, OutputTruncated, MalformedResponse,
    /// UnterminatedThinking (strict delimiters), RequestRejected.
    RawModelOutput classify_report(const AssessmentPrompt& prompt);

    const std::string& config_digest() const { return digest_; }
    const InferenceStats& stats() const { return stats_; }

private:
    ChatBackend& backend_;
    Options options_;
    KeyedJsonlStore* cache_;
    std::string digest_;
    std::counting_semaphore<> in_flight_;
    InferenceStats stats_;
};

}  // namespace coop
