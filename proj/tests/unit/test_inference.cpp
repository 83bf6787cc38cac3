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

#include <doctest.h>

#include <atomic>
#include <nlohmann/json.hpp>
#include <string>

#include "coop/backend.hpp"
#include "coop/corpus.hpp"
#include "coop/error.hpp"
#include "coop/inference.hpp"
#include "coop/markers.hpp"
#include "coop/prompting.hpp"
#include "coop/reasoning.hpp"
#include "coop/rng.hpp"
#include "coop/text.hpp"
#include "test_support.hpp"

using namespace coop;
using coop::testing::completion_body;
using coop::testing::FakeChatServer;
using coop::testing::FakeReply;
using coop::testing::TempDir;

namespace {

template <typename Fn>
ErrorCode code_of(Fn&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected coop::Error");
    return ErrorCode::IoError;
}

RetryPolicy fast_retry(int attempts = 3) {
    RetryPolicy p;
    p.max_attempts = attempts;
    p.base_delay = std::chrono::milliseconds(1);
    p.max_delay = std::chrono::milliseconds(4);
    return p;
}

AssessmentPrompt prompt_for(const std::string& text, CaregiverRole role = CaregiverRole::Mother) {
    const auto r = ingest_report(text, {"c1", "r1", "2016-02-01", "en"});
    return build_assessment_prompt(r, role, default_assessment_template());
}

BackendDescriptor remote(const FakeChatServer& server) {
    BackendDescriptor d;
    d.kind = BackendKind::Remote;
    d.endpoint_url = server.url();
    d.timeout = std::chrono::seconds(5);
    return d;
}

/// Fails the first `failures` calls with EndpointUnavailable.
class FlakyBackend final : public ChatBackend {
public:
    explicit FlakyBackend(int failures) : failures_(failures) {}
    ChatResponse complete(const ChatRequest&) override {
        ++calls;
        if (calls <= failures_) throw Error(ErrorCode::EndpointUnavailable, "down");
        return {"<think>x</think>answer", "stop", {}, {}, false};
    }
    BackendDescriptor descriptor() const override { return {}; }
    int calls = 0;

private:
    int failures_;
};

}  // namespace

TEST_CASE("split_reasoning separates thinking from the final answer") {
    auto s = split_reasoning("<think>\nweigh things\n</think>\n\nFinal: no evidence.");
    CHECK(s.thinking == "weigh things");
    CHECK(s.final_answer == "Final: no evidence.");
    CHECK_FALSE(s.unterminated);

    s = split_reasoning("  plain answer  ");
    CHECK(s.thinking.empty());
    CHECK(s.final_answer == "plain answer");

    s = split_reasoning("prefilled reasoning</think>answer");
    CHECK(s.thinking == "prefilled reasoning");
    CHECK(s.final_answer == "answer");

    s = split_reasoning("<think>a</think>mid<think>b</think>end");
    CHECK(s.thinking == "a\nb");
    CHECK(s.final_answer == "midend");

    s = split_reasoning("[[r]]thought[[/r]] done", {"[[r]]", "[[/r]]", false});
    CHECK(s.thinking == "thought");
    CHECK(s.final_answer == "done");
}

TEST_CASE("split_reasoning errors") {
    CHECK(code_of([] { split_reasoning("   \n"); }) == ErrorCode::InvalidInput);
    CHECK(code_of([] { split_reasoning("<think>never closed"); }) == ErrorCode::UnterminatedThinking);
    const auto lenient = split_reasoning("<think>never closed", {"<think>", "</think>", true});
    CHECK(lenient.unterminated);
    CHECK(lenient.final_answer == "never closed");
    CHECK(code_of([] { split_reasoning("x", {"", "</think>", false}); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("split_reasoning property: well-formed outputs split exactly") {
    Rng rng(99);
    const std::string alphabet = "abc xyz.\n<>/t";
    auto random_text = [&](std::size_t max_len) {
        std::string s;
        const auto n = rng.between(1, max_len);
        for (std::size_t i = 0; i < n; ++i) s += alphabet[rng.between(0, alphabet.size() - 1)];
        return s;
    };
    int checked = 0;
    for (int i = 0; i < 3000; ++i) {
        auto thinking = random_text(40);
        auto answer = random_text(40);
        if (thinking.find("<think>") != std::string::npos || thinking.find("</think>") != std::string::npos) continue;
        if (answer.find("<think>") != std::string::npos || answer.find("</think>") != std::string::npos) continue;
        if (text::trim(answer).empty()) continue;
        const auto s = split_reasoning("<think>" + thinking + "</think>" + answer);
        CHECK(s.thinking == text::trim(thinking));
        CHECK(s.final_answer == text::trim(answer));
        ++checked;
    }
    CHECK(checked > 1000);
}

TEST_CASE("split_reasoning property: answers never contain delimiters") {
    Rng rng(5);
    const std::vector<std::string> pieces{"<think>", "</think>", "word", " ", "\n", "answer."};
    for (int i = 0; i < 3000; ++i) {
        std::string s;
        const auto n = rng.between(1, 12);
        for (std::size_t k = 0; k < n; ++k) s += pieces[rng.between(0, pieces.size() - 1)];
        if (text::trim(s).empty()) continue;
        const auto out = split_reasoning(s, {"<think>", "</think>", true});
        CHECK(out.final_answer.find("<think>") == std::string::npos);
        CHECK(out.final_answer.find("</think>") == std::string::npos);
    }
}

TEST_CASE("mock backend answers through the inference client") {
    MockBackend backend;
    InferenceClient::Options opt;
    opt.retry = fast_retry();
    InferenceClient client(backend, opt, nullptr);
    const auto p = prompt_for("The mother did not attend the scheduled meeting at the school.");
    const auto out = client.classify_report(p);
    CHECK(out.report_id == "r1");
    CHECK(out.caregiver == CaregiverRole::Mother);
    CHECK(out.template_version == p.template_id + "@" + p.template_version);
    CHECK(out.prompt_hash == p.content_hash);
    CHECK(out.full_text.find("<think>") == 0);
    CHECK(out.final_answer.find("<think>") == std::string::npos);
    CHECK(text::to_lower_ascii(out.final_answer).find("lack of cooperation") != std::string::npos);
    CHECK(out.thinking.size() > 0);
    CHECK(client.stats().backend_calls == 1);
}

TEST_CASE("mock output is a pure function of text and caregiver") {
    const auto& rules = MockRuleSet::default_rules();
    const std::string t = "The father attended every appointment. The mother did not respond to letters.";
    CHECK(mock_classify(t, CaregiverRole::Father, rules) == mock_classify(t, CaregiverRole::Father, rules));
    CHECK(mock_classify(t, CaregiverRole::Father, rules) != mock_classify(t, CaregiverRole::Mother, rules));
}

TEST_CASE("raw outputs round-trip through JSON") {
    RawModelOutput o;
    o.report_id = "r9";
    o.caregiver = CaregiverRole::Father;
    o.template_version = "t@1";
    o.config_digest = "abc";
    o.prompt_hash = "ff";
    o.full_text = "<think>a</think>b \"quoted\"\n";
    o.thinking = "a";
    o.final_answer = "b";
    o.latency_ms = 12;
    o.token_usage = TokenUsage{10, 20};
    o.server_seed = -3;
    CHECK(raw_output_from_json(to_json_line(o)) == o);
    o.token_usage.reset();
    o.server_seed.reset();
    CHECK(raw_output_from_json(to_json_line(o)) == o);
}

TEST_CASE("cache makes repeated classification free") {
    TempDir dir;
    const auto path = dir / "assessments.jsonl";
    const auto p = prompt_for("The parents cancelled the home visit twice.", CaregiverRole::Father);
    RawModelOutput first;
    {
        MockBackend backend;
        KeyedJsonlStore cache(path);
        InferenceClient client(backend, {}, &cache);
        first = client.classify_report(p);
        const auto again = client.classify_report(p);
        CHECK(again == first);
        CHECK(client.stats().backend_calls == 1);
        CHECK(client.stats().cache_hits == 1);
        CHECK(cache.size() == 1);
    }
    MockBackend backend;
    KeyedJsonlStore reopened(path);
    InferenceClient client(backend, {}, &reopened);
    CHECK(client.classify_report(p) == first);
    CHECK(client.stats().backend_calls == 0);

    InferenceClient::Options other;
    other.sampling.temperature = 0.1;
    InferenceClient changed(backend, other, &reopened);
    CHECK(changed.config_digest() != client.config_digest());
    changed.classify_report(p);
    CHECK(changed.stats().backend_calls == 1);
}

TEST_CASE("retry backs off on transient failures only") {
    ChatRequest req;
    FlakyBackend two(2);
    std::atomic<std::uint64_t> retries{0};
    CHECK(complete_with_retry(two, req, fast_retry(3), &retries).content == "<think>x</think>answer");
    CHECK(two.calls == 3);
    CHECK(retries == 2);

    FlakyBackend always(100);
    CHECK(code_of([&] { complete_with_retry(always, req, fast_retry(4)); }) == ErrorCode::EndpointUnavailable);
    CHECK(always.calls == 4);
}

TEST_CASE("remote response parsing") {
    const std::string golden = R"({
      "id": "cmpl-7", "object": "chat.completion", "seed": 42,
      "choices": [{"index": 0, "finish_reason": "stop",
                   "message": {"role": "assistant", "content": "<think>r</think>Final: no evidence."}}],
      "usage": {"prompt_tokens": 812, "completion_tokens": 77, "total_tokens": 889}
    })";
    const auto r = RemoteBackend::parse_response(golden);
    CHECK(r.content == "<think>r</think>Final: no evidence.");
    CHECK(r.finish_reason == "stop");
    REQUIRE(r.usage);
    CHECK(r.usage->prompt == 812);
    CHECK(r.usage->completion == 77);
    CHECK(r.seed == 42);

    const auto split_field = RemoteBackend::parse_response(
        R"({"choices":[{"finish_reason":"stop","message":{"content":"answer","reasoning_content":"why"}}]})");
    CHECK(split_field.content == "<think>why</think>answer");

    CHECK(code_of([] { RemoteBackend::parse_response("not json"); }) == ErrorCode::MalformedResponse);
    CHECK(code_of([] { RemoteBackend::parse_response(R"({"choices":[]})"); }) == ErrorCode::MalformedResponse);
    CHECK(code_of([] { RemoteBackend::parse_response(R"({"choices":[{"message":{"content":5}}]})"); }) ==
          ErrorCode::MalformedResponse);
}

TEST_CASE("remote request bodies carry the sampling settings") {
    ChatRequest req;
    req.messages = {{"user", "hello"}};
    req.sampling.model_name = "m";
    const auto body = nlohmann::json::parse(RemoteBackend::request_body(req, true));
    CHECK(body["model"] == "m");
    CHECK(body["temperature"].get<double>() == doctest::Approx(0.6));
    CHECK(body["top_k"] == 20);
    CHECK(body["top_p"].get<double>() == doctest::Approx(0.95));
    CHECK(body["max_tokens"] == 8000);
    CHECK(body["messages"][0]["content"] == "hello");
    CHECK_FALSE(nlohmann::json::parse(RemoteBackend::request_body(req, false)).contains("top_k"));
}

TEST_CASE("remote backend against a loopback server") {
    FakeChatServer server;
    RemoteBackend backend(remote(server), "secret");
    InferenceClient::Options opt;
    opt.retry = fast_retry(3);
    InferenceClient client(backend, opt, nullptr);
    const auto p = prompt_for("The mother attended the meeting.");

    SUBCASE("success") {
        server.script({{200, completion_body("<think>ok</think>Final: cooperation present or emerged.")}});
        const auto out = client.classify_report(p);
        CHECK(out.final_answer == "Final: cooperation present or emerged.");
        REQUIRE(server.request_count() == 1);
        const auto req = server.requests().front();
        CHECK(req.authorization == "Bearer secret");
        CHECK(nlohmann::json::parse(req.body)["messages"][0]["content"] == p.rendered_text);
    }
    SUBCASE("503 is retried then reported") {
        server.set_fallback([](const auto&) { return FakeReply{503, "busy"}; });
        CHECK(code_of([&] { client.classify_report(p); }) == ErrorCode::EndpointUnavailable);
        CHECK(server.request_count() == 3);
        CHECK(client.stats().retries == 2);
    }
    SUBCASE("transient failure recovers") {
        server.script({{503, ""}, {429, ""}, {200, completion_body("<think>t</think>Final: no evidence.")}});
        CHECK(client.classify_report(p).final_answer == "Final: no evidence.");
        CHECK(server.request_count() == 3);
    }
    SUBCASE("length finish is a truncation") {
        server.script({{200, completion_body("<think>endless", "length")}});
        CHECK(code_of([&] { client.classify_report(p); }) == ErrorCode::OutputTruncated);
    }
    SUBCASE("4xx is permanent") {
        server.script({{400, R"({"error":"bad"})"}});
        CHECK(code_of([&] { client.classify_report(p); }) == ErrorCode::RequestRejected);
        CHECK(server.request_count() == 1);
    }
    SUBCASE("missing closing delimiter is strict by default") {
        server.script({{200, completion_body("<think>no end")}});
        CHECK(code_of([&] { client.classify_report(p); }) == ErrorCode::UnterminatedThinking);
    }
}

TEST_CASE("top_k is dropped only when allowed") {
    FakeChatServer server;
    server.script({{400, R"({"error":"unsupported parameter top_k"})"},
                   {200, completion_body("<think>t</think>Final: no evidence.")}});
    auto d = remote(server);
    d.drop_unsupported_top_k = true;
    RemoteBackend backend(d, "");
    ChatRequest req;
    req.messages = {{"user", "x"}};
    const auto r = backend.complete(req);
    CHECK(r.top_k_dropped);
    REQUIRE(server.request_count() == 2);
    CHECK(nlohmann::json::parse(server.requests()[0].body).contains("top_k"));
    CHECK_FALSE(nlohmann::json::parse(server.requests()[1].body).contains("top_k"));
    CHECK(server.requests()[1].authorization.empty());
}

TEST_CASE("unreachable endpoint is transient") {
    BackendDescriptor d;
    d.kind = BackendKind::Remote;
    d.endpoint_url = "http://127.0.0.1:1/v1/chat/completions";
    d.timeout = std::chrono::seconds(2);
    RemoteBackend backend(d, "");
    ChatRequest req;
    req.messages = {{"user", "x"}};
    CHECK(code_of([&] { backend.complete(req); }) == ErrorCode::EndpointUnavailable);
}
