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

#include <httplib.h>

#include "coop/backend.hpp"
#include "coop/error.hpp"
#include "jsonl.hpp"

namespace coop {

using jsonl::Json;

namespace {

// "http://host:port/v1/chat/completions" -> ("http://host:port", "/v1/chat/completions")
std::pair<std::string, std::string> split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw Error(ErrorCode::ConfigInvalid, "endpoint_url needs a scheme: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/v1/chat/completions"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

RemoteBackend::RemoteBackend(BackendDescriptor descriptor, std::string api_key)
    : descriptor_(std::move(descriptor)), api_key_(std::move(api_key)) {
    std::tie(scheme_host_port_, path_) = split_url(descriptor_.endpoint_url);
}

std::string RemoteBackend::request_body(const ChatRequest& request, bool include_top_k) {
    Json messages = Json::array();
    for (const auto& m : request.messages) messages.push_back({{"role", m.role}, {"content", m.content}});
    Json body{{"model", request.sampling.model_name},
              {"messages", messages},
              {"temperature", request.sampling.temperature},
              {"top_p", request.sampling.top_p},
              {"max_tokens", request.sampling.max_output_tokens}};
    if (include_top_k) body["top_k"] = request.sampling.top_k;
    if (request.json_output) body["response_format"] = {{"type", "json_object"}};
    return body.dump();
}

ChatResponse RemoteBackend::parse_response(std::string_view body) {
    Json j;
    try {
        j = Json::parse(body);
    } catch (const Json::parse_error& e) {
        throw Error(ErrorCode::MalformedResponse, std::string("response is not JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("choices") || !j["choices"].is_array() || j["choices"].empty()) {
        throw Error(ErrorCode::MalformedResponse, "response has no choices");
    }
    const auto& choice = j["choices"][0];
    if (!choice.is_object() || !choice.contains("message") || !choice["message"].is_object()) {
        throw Error(ErrorCode::MalformedResponse, "first choice has no message");
    }
    const auto& message = choice["message"];
    ChatResponse r;
    if (message.contains("content") && message["content"].is_string()) {
        r.content = message["content"].get<std::string>();
    } else if (!message.contains("content") || !message["content"].is_null()) {
        throw Error(ErrorCode::MalformedResponse, "message content is not a string");
    }
    // Separate reasoning_content is wrapped in delimiters and prepended.
    if (message.contains("reasoning_content") && message["reasoning_content"].is_string()) {
        const auto reasoning = message["reasoning_content"].get<std::string>();
        if (!reasoning.empty()) r.content = "<think>" + reasoning + "</think>" + r.content;
    }
    if (choice.contains("finish_reason") && choice["finish_reason"].is_string()) {
        r.finish_reason = choice["finish_reason"].get<std::string>();
    }
    if (j.contains("usage") && j["usage"].is_object()) {
        r.usage = TokenUsage{j["usage"].value("prompt_tokens", std::uint64_t{0}),
                             j["usage"].value("completion_tokens", std::uint64_t{0})};
    }
    if (j.contains("seed") && j["seed"].is_number_integer()) r.seed = j["seed"].get<std::int64_t>();
    return r;
}

ChatResponse RemoteBackend::complete(const ChatRequest& request) {
    httplib::Client client(scheme_host_port_);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(descriptor_.timeout).count();
    client.set_connection_timeout(10, 0);
    client.set_read_timeout(static_cast<time_t>(std::max<long long>(1, secs)), 0);
    client.set_write_timeout(60, 0);
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

    bool include_top_k = true;
    for (int round = 0; round < 2; ++round) {
        auto res = client.Post(path_, headers, request_body(request, include_top_k), "application/json");
        if (!res) {
            throw Error(ErrorCode::EndpointUnavailable,
                        "transport error talking to " + scheme_host_port_ + ": " + httplib::to_string(res.error()));
        }
        const int status = res->status;
        if (status >= 200 && status < 300) {
            auto parsed = parse_response(res->body);
            parsed.top_k_dropped = !include_top_k;
            return parsed;
        }
        if (status == 429 || status >= 500) {
            throw Error(ErrorCode::EndpointUnavailable, "HTTP " + std::to_string(status) + " from endpoint");
        }
        if (status == 400 && include_top_k && descriptor_.drop_unsupported_top_k &&
            res->body.find("top_k") != std::string::npos) {
            include_top_k = false;
            continue;
        }
        throw Error(ErrorCode::RequestRejected, "HTTP " + std::to_string(status) + ": " + res->body.substr(0, 300));
    }
    throw Error(ErrorCode::RequestRejected, "endpoint rejected the request without top_k as well");
}

}  // namespace coop
