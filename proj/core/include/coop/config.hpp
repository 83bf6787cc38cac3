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

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "coop/backend.hpp"
#include "coop/inference.hpp"
#include "coop/reasoning.hpp"
#include "coop/sampling.hpp"
#include "coop/synthetic.hpp"

namespace coop {

enum class CorpusSource { Synthetic, Jsonl, Manifest, Normalized };

std::string_view to_string(CorpusSource source) noexcept;

struct CorpusConfig {
    CorpusSource source = CorpusSource::Synthetic;
    std::string path;      // jsonl / manifest / normalized corpus file
    std::string text_dir;  // manifest only
    SyntheticConfig synthetic;

    bool operator==(const CorpusConfig&) const = default;
};

struct TemplateConfig {
    std::string assessment;  // file path; empty selects the bundled template
    std::string extraction;
    std::string language = "en";

    bool operator==(const TemplateConfig&) const = default;
};

struct ApiConfig {
    std::string host = "127.0.0.1";
    int port = 8080;
    bool allow_remote_bind = false;

    bool operator==(const ApiConfig&) const = default;
};

struct PipelineConfig {
    std::uint64_t seed = 7;
    std::string output_dir = "coop-run";
    CorpusConfig corpus;
    TemplateConfig templates;
    BackendDescriptor assessment_backend;
    SamplingConfig assessment_sampling;
    DelimiterConfig delimiters;
    BackendDescriptor extraction_backend;
    SamplingConfig extraction_sampling = default_extraction_sampling();
    bool extraction_fallback = false;
    RetryPolicy retry;
    std::size_t concurrency = 4;
    double failure_threshold = 0.02;
    double min_coverage = 0.98;
    std::vector<StratumSpec> strata = default_strata();
    std::array<std::string, 2> reviewers{"ehr1", "ehr2"};
    ApiConfig api;

    bool operator==(const PipelineConfig&) const = default;
};

/// Parses a JSON config; absent keys keep their defaults. Unknown keys and
/// invalid values throw ConfigInvalid naming the key path (e.g.
/// "assessment.sampling.top_q").
PipelineConfig parse_config(std::string_view json_text);
PipelineConfig load_config(const std::filesystem::path& path);

/// Throws ConfigInvalid.
void validate(const PipelineConfig& config);

/// Every field, as JSON accepted by parse_config.
std::string to_json(const PipelineConfig& config);

/// Hash over everything that affects results; output_dir, concurrency and
/// api settings are excluded so a resumed run keeps its digest.
std::string config_digest(const PipelineConfig& config);
/// "run-" followed by the first 12 digest characters.
std::string run_id(const PipelineConfig& config);

}  // namespace coop
