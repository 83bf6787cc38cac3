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
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "coop/category.hpp"
#include "coop/metrics.hpp"

namespace coop::testing {

/// Directory removed on destruction.
class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& content);

/// Label vectors (predicted, truth) whose confusion matrix is `cm`.
std::pair<std::vector<BinaryLabel>, std::vector<BinaryLabel>> realize(const ConfusionMatrix& cm);

struct FakeReply {
    int status = 200;
    std::string body;
};

struct FakeRequest {
    std::string path;
    std::string authorization;
    std::string body;
};

/// Loopback chat-completions server. Replies come from the script in order;
/// once it is exhausted `fallback` answers.
class FakeChatServer {
public:
    FakeChatServer();
    ~FakeChatServer();

    void script(std::vector<FakeReply> replies);
    void set_fallback(std::function<FakeReply(const FakeRequest&)> fn);

    std::string url() const;  // http://127.0.0.1:<port>/v1/chat/completions
    std::vector<FakeRequest> requests() const;
    std::size_t request_count() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Chat-completions JSON body with one choice.
std::string completion_body(const std::string& content, const std::string& finish_reason = "stop");

}  // namespace coop::testing
