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

#include "test_support.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace coop::testing {

TempDir::TempDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "coop-test-XXXXXX").string();
    if (!::mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
}

TempDir::~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

std::pair<std::vector<BinaryLabel>, std::vector<BinaryLabel>> realize(const ConfusionMatrix& cm) {
    std::vector<BinaryLabel> pred;
    std::vector<BinaryLabel> truth;
    auto add = [&](std::uint64_t n, BinaryLabel p, BinaryLabel t) {
        for (std::uint64_t i = 0; i < n; ++i) {
            pred.push_back(p);
            truth.push_back(t);
        }
    };
    add(cm.tp, BinaryLabel::Lack, BinaryLabel::Lack);
    add(cm.fp, BinaryLabel::Lack, BinaryLabel::NoDocumentedLack);
    add(cm.fn, BinaryLabel::NoDocumentedLack, BinaryLabel::Lack);
    add(cm.tn, BinaryLabel::NoDocumentedLack, BinaryLabel::NoDocumentedLack);
    return {pred, truth};
}

std::string completion_body(const std::string& content, const std::string& finish_reason) {
    return nlohmann::json{{"id", "cmpl-1"},
                          {"object", "chat.completion"},
                          {"choices", {{{"index", 0},
                                        {"message", {{"role", "assistant"}, {"content", content}}},
                                        {"finish_reason", finish_reason}}}},
                          {"usage", {{"prompt_tokens", 12}, {"completion_tokens", 34}}}}
        .dump();
}

struct FakeChatServer::Impl {
    httplib::Server server;
    std::thread thread;
    int port = 0;
    mutable std::mutex mu;
    std::vector<FakeReply> script;
    std::size_t next = 0;
    std::function<FakeReply(const FakeRequest&)> fallback;
    std::vector<FakeRequest> seen;
};

FakeChatServer::FakeChatServer() : impl_(std::make_unique<Impl>()) {
    impl_->fallback = [](const FakeRequest&) { return FakeReply{200, completion_body("<think>x</think>\n\nok")}; };
    impl_->server.Post(".*", [this](const httplib::Request& req, httplib::Response& res) {
        FakeRequest r{req.path, req.get_header_value("Authorization"), req.body};
        FakeReply reply;
        {
            std::lock_guard lock(impl_->mu);
            impl_->seen.push_back(r);
            if (impl_->next < impl_->script.size()) {
                reply = impl_->script[impl_->next++];
            } else {
                reply = impl_->fallback(r);
            }
        }
        res.status = reply.status;
        res.set_content(reply.body, "application/json");
    });
    impl_->port = impl_->server.bind_to_any_port("127.0.0.1");
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
}

FakeChatServer::~FakeChatServer() {
    impl_->server.stop();
    impl_->thread.join();
}

void FakeChatServer::script(std::vector<FakeReply> replies) {
    std::lock_guard lock(impl_->mu);
    impl_->script = std::move(replies);
    impl_->next = 0;
}

void FakeChatServer::set_fallback(std::function<FakeReply(const FakeRequest&)> fn) {
    std::lock_guard lock(impl_->mu);
    impl_->fallback = std::move(fn);
}

std::string FakeChatServer::url() const {
    return "http://127.0.0.1:" + std::to_string(impl_->port) + "/v1/chat/completions";
}

std::vector<FakeRequest> FakeChatServer::requests() const {
    std::lock_guard lock(impl_->mu);
    return impl_->seen;
}

std::size_t FakeChatServer::request_count() const {
    std::lock_guard lock(impl_->mu);
    return impl_->seen.size();
}

}  // namespace coop::testing
