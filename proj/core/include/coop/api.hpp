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

#include <functional>
#include <memory>
#include <string>

#include "coop/config.hpp"
#include "coop/metrics.hpp"
#include "coop/sampling.hpp"

namespace coop {

/// HTTP status for an error code (404 NotInSample, 409 DuplicateAnnotation, ...).
int http_status(ErrorCode code) noexcept;

/// JSON API for the review workflow:
///   GET  /sample                      sampled items with stratum and text
///   GET  /reports/{id}                one sampled report
///   GET  /annotations                 annotations visible to X-Reviewer-Id
///   PUT  /annotations                 record an annotation as X-Reviewer-Id
///   GET  /disagreements?scheme=three|binary
///   GET  /consensus                   decisions and unresolved count
///   POST /consensus                   record a consensus decision
///   POST /benchmark                   finalize and write the benchmark CSV
///   GET  /benchmark                   benchmark CSV
///   GET  /metrics                     metrics report (finalized benchmark)
class ApiServer {
public:
    struct Options {
        std::string host = "127.0.0.1";
        int port = 0;  // 0 picks a free port
        bool allow_remote_bind = false;
        /// Benchmark CSV written by POST /benchmark; empty disables the file.
        std::string benchmark_path;
    };

    /// `corpus` supplies case ids and dates for /reports; `metrics`
    /// computes the report from the finalized benchmark.
    ApiServer(ValidationStore& store, const Corpus& corpus, std::function<MetricsReport()> metrics, Options options);
    ~ApiServer();
    ApiServer(const ApiServer&) = delete;
    ApiServer& operator=(const ApiServer&) = delete;

    /// Binds and serves on a background thread; returns the bound port.
    /// Throws ConfigInvalid for a non-loopback host without
    /// allow_remote_bind and IoError when binding fails.
    int start();
    /// Serves on the calling thread until stop().
    void run();
    void stop();
    int port() const;

private:
    void bind();

    struct Impl;
    std::unique_ptr<Impl> impl_;
};

bool is_loopback_host(std::string_view host) noexcept;

}  // namespace coop
