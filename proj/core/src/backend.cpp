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

#include "coop/backend.hpp"

#include <cmath>
#include <cstdlib>

#include "coop/error.hpp"
#include "coop/markers.hpp"
#include "jsonl.hpp"

namespace coop {

using jsonl::Json;

SamplingConfig default_extraction_sampling() {
    SamplingConfig s;
    s.temperature = 0.0;
    s.top_k = 1;
    s.top_p = 1.0;
    s.max_output_tokens = 256;
    s.model_name = "extractor-instruct";
    return s;
}

void validate(const SamplingConfig& c) {
    auto fail = [](const std::string& m) { throw Error(ErrorCode::InvalidConfig, "sampling: " + m); };
    if (!std::isfinite(c.temperature) || c.temperature < 0.0) fail("temperature must be >= 0");
    if (c.top_k < 1) fail("top_k must be a positive integer");
    if (!(c.top_p > 0.0 && c.top_p <= 1.0)) fail("top_p must be in (0, 1]");
    if (c.max_output_tokens < 1) fail("max_output_tokens must be positive");
    if (c.model_name.empty()) fail("model_name must be non-empty");
}

std::string canonical_json(const SamplingConfig& c) {
    return Json{{"temperature", c.temperature},
                {"top_k", c.top_k},
                {"top_p", c.top_p},
                {"max_output_tokens", c.max_output_tokens},
                {"model_name", c.model_name}}
        .dump();
}

std::string_view to_string(BackendKind kind) noexcept { return kind == BackendKind::Remote ? "remote" : "mock"; }

std::string canonical_json(const BackendDescriptor& d) {
    Json j{{"kind", to_string(d.kind)}};
    if (d.kind == BackendKind::Remote) {
        j["endpoint_url"] = d.endpoint_url;
        j["credential_env"] = d.credential_env;
        j["drop_unsupported_top_k"] = d.drop_unsupported_top_k;
    } else {
        j["rule_set"] = d.rule_set;
    }
    return j.dump();
}

std::unique_ptr<ChatBackend> make_backend(const BackendDescriptor& descriptor) {
    if (descriptor.kind == BackendKind::Mock) {
        (void)MockRuleSet::by_id(descriptor.rule_set);
        return std::make_unique<MockBackend>(descriptor.rule_set);
    }
    BackendDescriptor d = descriptor;
    if (const char* url = std::getenv("COOP_ENDPOINT_URL"); url && *url) d.endpoint_url = url;
    if (d.endpoint_url.empty()) throw Error(ErrorCode::ConfigInvalid, "remote backend needs an endpoint_url");
    std::string key;
    if (!d.credential_env.empty()) {
        if (const char* v = std::getenv(d.credential_env.c_str())) key = v;
    }
    return std::make_unique<RemoteBackend>(std::move(d), std::move(key));
}

MockBackend::MockBackend(std::string rule_set) : rule_set_(std::move(rule_set)) {
    (void)MockRuleSet::by_id(rule_set_);
}

ChatResponse MockBackend::complete(const ChatRequest& request) {
    ChatResponse r;
    r.finish_reason = "stop";
    if (request.purpose == RequestPurpose::Assessment) {
        if (!request.caregiver) throw Error(ErrorCode::InvalidInput, "mock assessment needs a caregiver");
        r.content = mock_classify(request.subject, *request.caregiver, MockRuleSet::by_id(rule_set_));
    } else {
        r.content = mock_extract(request.subject);
    }
    return r;
}

BackendDescriptor MockBackend::descriptor() const {
    BackendDescriptor d;
    d.kind = BackendKind::Mock;
    d.rule_set = rule_set_;
    return d;
}

}  // namespace coop
