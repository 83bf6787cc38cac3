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

#include "coop/inference.hpp"

#include <algorithm>
#include <thread>

#include "coop/digest.hpp"
#include "coop/error.hpp"
#include "jsonl.hpp"

namespace coop {

using jsonl::Json;

std::string assessment_cache_key(std::string_view report_id, CaregiverRole caregiver,
                                 std::string_view template_version, std::string_view config_digest) {
    std::string key(report_id);
    key += '|';
    key += to_string(caregiver);
    key += '|';
    key += template_version;
    key += '|';
    key += config_digest;
    return key;
}

std::string to_json_line(const RawModelOutput& o) {
    Json j{{"key", assessment_cache_key(o.report_id, o.caregiver, o.template_version, o.config_digest)},
           {"report_id", o.report_id},
           {"caregiver", to_string(o.caregiver)},
           {"template_version", o.template_version},
           {"config_digest", o.config_digest},
           {"prompt_hash", o.prompt_hash},
           {"full_text", o.full_text},
           {"thinking", o.thinking},
           {"final_answer", o.final_answer},
           {"latency_ms", o.latency_ms},
           {"top_k_dropped", o.top_k_dropped}};
    j["token_usage"] = o.token_usage ? Json{{"prompt", o.token_usage->prompt}, {"completion", o.token_usage->completion}}
                                     : Json(nullptr);
    j["server_seed"] = o.server_seed ? Json(*o.server_seed) : Json(nullptr);
    return j.dump();
}

RawModelOutput raw_output_from_json(std::string_view line) {
    const auto j = Json::parse(line);
    RawModelOutput o;
    o.report_id = j.at("report_id").get<std::string>();
    auto role = parse_caregiver(j.at("caregiver").get<std::string>());
    if (!role) throw Error(ErrorCode::InvalidInput, "bad caregiver in cached output");
    o.caregiver = *role;
    o.template_version = j.at("template_version").get<std::string>();
    o.config_digest = j.at("config_digest").get<std::string>();
    o.prompt_hash = j.value("prompt_hash", "");
    o.full_text = j.at("full_text").get<std::string>();
    o.thinking = j.at("thinking").get<std::string>();
    o.final_answer = j.at("final_answer").get<std::string>();
    o.latency_ms = j.value("latency_ms", std::uint64_t{0});
    o.top_k_dropped = j.value("top_k_dropped", false);
    if (j.contains("token_usage") && j["token_usage"].is_object()) {
        o.token_usage = TokenUsage{j["token_usage"].value("prompt", std::uint64_t{0}),
                                   j["token_usage"].value("completion", std::uint64_t{0})};
    }
    if (j.contains("server_seed") && j["server_seed"].is_number_integer()) {
        o.server_seed = j["server_seed"].get<std::int64_t>();
    }
    return o;
}

ChatResponse complete_with_retry(ChatBackend& backend, const ChatRequest& request, const RetryPolicy& policy,
                                 std::atomic<std::uint64_t>* retries) {
    const int attempts = std::max(1, policy.max_attempts);
    auto delay = policy.base_delay;
    for (int attempt = 1;; ++attempt) {
        try {
            return backend.complete(request);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::EndpointUnavailable) throw;
            if (attempt >= attempts) {
                throw Error(ErrorCode::EndpointUnavailable,
                            "giving up after " + std::to_string(attempt) + " attempts: " + e.what());
            }
        }
        if (retries) ++*retries;
        std::this_thread::sleep_for(std::min(delay, policy.max_delay));
        delay *= 2;
    }
}

std::string assessment_config_digest(const SamplingConfig& sampling, const BackendDescriptor& backend,
                                     const DelimiterConfig& delimiters) {
    Json j{{"sampling", Json::parse(canonical_json(sampling))},
           {"backend", Json::parse(canonical_json(backend))},
           {"delimiters", {{"open", delimiters.open}, {"close", delimiters.close}, {"lenient", delimiters.lenient}}}};
    return sha256_hex(j.dump()).substr(0, 16);
}

InferenceClient::InferenceClient(ChatBackend& backend, Options options, KeyedJsonlStore* cache)
    : backend_(backend),
      options_(std::move(options)),
      cache_(cache),
      digest_(assessment_config_digest(options_.sampling, backend.descriptor(), options_.delimiters)),
      in_flight_(static_cast<std::ptrdiff_t>(std::max<std::size_t>(1, options_.max_in_flight))) {
    validate(options_.sampling);
}

RawModelOutput InferenceClient::classify_report(const AssessmentPrompt& prompt) {
    const auto version = prompt.template_id + "@" + prompt.template_version;
    const auto key = assessment_cache_key(prompt.report_id, prompt.caregiver, version, digest_);
    if (cache_) {
        if (auto hit = cache_->find(key)) {
            ++stats_.cache_hits;
            return raw_output_from_json(*hit);
        }
    }

    ChatRequest request;
    request.purpose = RequestPurpose::Assessment;
    request.messages = {{"user", prompt.rendered_text}};
    request.sampling = options_.sampling;
    request.subject = prompt.report_text();
    request.caregiver = prompt.caregiver;

    ChatResponse response;
    const auto started = std::chrono::steady_clock::now();
    {
        in_flight_.acquire();
        struct Release {
            std::counting_semaphore<>& s;
            ~Release() { s.release(); }
        } release{in_flight_};
        response = complete_with_retry(backend_, request, options_.retry, &stats_.retries);
    }
    const auto latency = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started);
    ++stats_.backend_calls;
    stats_.total_latency_ms += static_cast<std::uint64_t>(latency.count());

    if (response.finish_reason == "length") {
        throw Error(ErrorCode::OutputTruncated, "report " + prompt.report_id + " (" +
                                                    std::string(to_string(prompt.caregiver)) +
                                                    "): completion hit max_output_tokens");
    }
    if (response.content.empty()) throw Error(ErrorCode::MalformedResponse, "empty completion content");

    auto split = split_reasoning(response.content, options_.delimiters);
    if (split.final_answer.empty()) {
        throw Error(ErrorCode::MalformedResponse, "report " + prompt.report_id + ": no final answer after thinking");
    }

    RawModelOutput out;
    out.report_id = prompt.report_id;
    out.caregiver = prompt.caregiver;
    out.template_version = version;
    out.config_digest = digest_;
    out.prompt_hash = prompt.content_hash;
    out.full_text = std::move(response.content);
    out.thinking = std::move(split.thinking);
    out.final_answer = std::move(split.final_answer);
    out.latency_ms = static_cast<std::uint64_t>(latency.count());
    out.token_usage = response.usage;
    out.server_seed = response.seed;
    out.top_k_dropped = response.top_k_dropped;

    if (cache_) {
        // A concurrent duplicate lost the race; return the persisted copy.
        if (!cache_->put(key, to_json_line(out))) return raw_output_from_json(*cache_->find(key));
    }
    return out;
}

}  // namespace coop
