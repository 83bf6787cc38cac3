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
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "coop/backend.hpp"
#include "coop/config.hpp"
#include "coop/corpus.hpp"
#include "coop/extraction.hpp"
#include "coop/labeling.hpp"
#include "coop/metrics.hpp"
#include "coop/sampling.hpp"

namespace coop {

enum class Stage { Ingest, Assess, Extract, Label };

inline constexpr std::array<Stage, 4> kStages{Stage::Ingest, Stage::Assess, Stage::Extract, Stage::Label};

std::string_view to_string(Stage stage) noexcept;
std::optional<Stage> parse_stage(std::string_view text) noexcept;

/// File layout under the output directory.
struct RunPaths {
    explicit RunPaths(const std::filesystem::path& root);

    std::filesystem::path root;
    std::filesystem::path lock;
    std::filesystem::path run_info;     // run.json: run id and config digest
    std::filesystem::path corpus;       // normalized corpus, JSONL
    std::filesystem::path ground_truth; // synthetic sources only
    std::filesystem::path assessments;  // raw model outputs, JSONL
    std::filesystem::path extractions;  // extracted categories, JSONL
    std::filesystem::path errors;       // per-item failures, JSONL
    std::filesystem::path manifest;     // latest RunManifest
    std::filesystem::path manifest_log; // every RunManifest, JSONL
    std::filesystem::path validation;   // sample, annotations, consensus
    std::filesystem::path sample;
    std::filesystem::path exports;
};

struct StageCounts {
    std::size_t total = 0;      // items the stage had to cover
    std::size_t computed = 0;   // produced by a backend call in this invocation
    std::size_t resumed = 0;    // already persisted by an earlier invocation
    std::size_t skipped = 0;    // inputs missing because an earlier stage failed
    std::size_t errors = 0;
    std::uint64_t backend_calls = 0;

    bool operator==(const StageCounts&) const = default;
};

struct RunManifest {
    std::string run_id;
    std::string config_digest;
    std::string assessment_template;  // "<id>@<version>"
    std::string extraction_template;
    std::string assessment_backend;   // canonical descriptor JSON
    std::string extraction_backend;
    std::string assessment_sampling;  // canonical sampling JSON
    std::string extraction_sampling;
    std::string started_at;
    std::string finished_at;
    std::string status;  // "complete", "interrupted", "failed"
    std::map<std::string, StageCounts> stages;
    std::map<std::string, std::size_t> error_tally;  // by error code

    std::size_t total_errors() const;
};

std::string to_json(const RunManifest& manifest);

struct PipelineHooks {
    /// Builds backends; defaults to make_backend.
    std::function<std::unique_ptr<ChatBackend>(const BackendDescriptor&)> backend_factory;
    /// Backend calls allowed in this invocation across all stages; the next
    /// call raises Interrupted. Used to simulate a crash.
    std::optional<std::uint64_t> interrupt_after_calls;
    /// Checked between items; setting it stops the run with Interrupted.
    const std::atomic<bool>* cancel = nullptr;
};

/// Runs ingest -> assess -> extract -> label up to `last`, then writes
/// the Table-5 style exports. Completed items found on disk are skipped.
/// Throws ConfigInvalid, RunLocked, Interrupted, FailureThresholdExceeded
/// and IncompleteRun; a manifest is written in every case.
RunManifest run_pipeline(const PipelineConfig& config, const PipelineHooks& hooks = {}, Stage last = Stage::Label);

/// Loads the normalized corpus of a run (after ingest).
Corpus load_run_corpus(const PipelineConfig& config);

/// Extraction results of the run for every (report, caregiver) that has one.
std::vector<ExtractionResult> load_run_extractions(const PipelineConfig& config);

/// Draws the validation sample from the run's labels and stores it; an
/// existing sample is returned unchanged.
std::vector<SampleItem> create_validation_sample(const PipelineConfig& config);

std::unique_ptr<ValidationStore> open_validation_store(const PipelineConfig& config);

/// Aligns model, reviewer and consensus labels for every benchmark item.
/// Throws UnresolvedRemaining / IncompleteAnnotations via export_benchmark
/// and IncompleteRun when a model label is missing.
MetricsReport validation_metrics(const ValidationStore& store, std::span<const ExtractionResult> extractions);

struct ExportResult {
    std::vector<std::filesystem::path> written;
    /// Export name -> reason it was not written.
    std::map<std::string, std::string> refused;
};

/// Writes table5.csv, summary.json, corpus_stats.json and case_labels.csv,
/// plus benchmark.csv, table2-4.csv and metrics.json once the consensus
/// benchmark is final. Throws IncompleteRun when labels are missing.
ExportResult export_reports(const PipelineConfig& config);

}  // namespace coop
