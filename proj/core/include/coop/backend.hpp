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

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "coop/category.hpp"

namespace coop {

struct SamplingConfig {
    double temperature = 0.6;
    int top_k = 20;
    double top_p = 0.95;
    int max_output_tokens = 8000;
    std::string model_name = "reasoning-large";

    bool operator==(const SamplingConfig&) const = default;
};

/// Greedy settings for the structured extraction call.
SamplingConfig default_extraction_sampling();

void validate(const SamplingConfig& config);  // throws InvalidConfig
std::string canonical_json(const SamplingConfig& config);

enum class BackendKind { Remote, Mock };

struct BackendDescriptor {
    BackendKind kind = BackendKind::Mock;
    std::string endpoint_url;                   // Remote; full URL of the chat-completions route
    std::string credential_env = "COOP_API_KEY";  // Remote; name of the env var holding the key
    std::string rule_set = "default";           // Mock
    /// Remote: retry once without top_k when the server rejects the field.
    bool drop_unsupported_top_k = false;
    std::chrono::milliseconds timeout{std::chrono::minutes(10)};

    bool operator==(const BackendDescriptor&) const = default;
};

std::string_view to_string(BackendKind kind) noexcept;
/// Stable description used in digests and manifests (no secrets).
std::string canonical_json(const BackendDescriptor& descriptor);

enum class RequestPurpose { Assessment, Extraction };

struct ChatMessage {
    std::string role;
    std::string content;
};

struct ChatRequest {
    RequestPurpose purpose = RequestPurpose::Assessment;
    std::vector<ChatMessage> messages;
    SamplingConfig sampling;
    bool json_output = false;
    /// What the prompt is about (report text or final answer) and for whom.
    /// Rule-based backends read these instead of parsing the prompt.
    std::string_view subject;
    std::optional<CaregiverRole> caregiver;
};

struct TokenUsage {
    std::uint64_t prompt = 0;
    std::uint64_t completion = 0;

    bool operator==(const TokenUsage&) const = default;
};

struct ChatResponse {
    std::string content;
    std::string finish_reason;  // "stop", "length", ...
    std::optional<TokenUsage> usage;
    std::optional<std::int64_t> seed;
    bool top_k_dropped = false;
};

/// One chat-completions call. Implementations throw Error with
/// EndpointUnavailable for transient failures (retried by callers),
/// RequestRejected for permanent 4xx, MalformedResponse for bad payloads.
class ChatBackend {
public:
    virtual ~ChatBackend() = default;
    virtual ChatResponse complete(const ChatRequest& request) = 0;
    virtual BackendDescriptor descriptor() const = 0;
};

/// Reads the credential from the environment for Remote backends;
/// COOP_ENDPOINT_URL overrides the configured endpoint when set.
std::unique_ptr<ChatBackend> make_backend(const BackendDescriptor& descriptor);

/// Serves both request purposes from the mock rule set.
class MockBackend final : public ChatBackend {
public:
    explicit MockBackend(std::string rule_set = "default");
    ChatResponse complete(const ChatRequest& request) override;
    BackendDescriptor descriptor() const override;

private:
    std::string rule_set_;
};

class RemoteBackend final : public ChatBackend {
public:
    RemoteBackend(BackendDescriptor descriptor, std::string api_key);
    ChatResponse complete(const ChatRequest& request) override;
    BackendDescriptor descriptor() const override { return descriptor_; }

    /// Request body as sent on the wire.
    static std::string request_body(const ChatRequest& request, bool include_top_k);
    /// Parses a chat-completions response body (first choice).
    static ChatResponse parse_response(std::string_view body);

private:
    BackendDescriptor descriptor_;
    std::string api_key_;
    std::string scheme_host_port_;
    std::string path_;
};

}  // namespace coop
