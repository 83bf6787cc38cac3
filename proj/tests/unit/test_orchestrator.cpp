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
#include <filesystem>
#include <map>
#include <mutex>
#include <nlohmann/json.hpp>
#include <string>
#include <unistd.h>

#include "coop/backend.hpp"
#include "coop/config.hpp"
#include "coop/digest.hpp"
#include "coop/error.hpp"
#include "coop/pipeline.hpp"
#include "coop/sampling.hpp"
#include "coop/synthetic.hpp"
#include "coop/tables.hpp"
#include "test_support.hpp"

using namespace coop;
using coop::testing::read_text;
using coop::testing::TempDir;
using coop::testing::write_text;
namespace fs = std::filesystem;

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

std::string message_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.what();
    }
    return {};
}

/// Call log shared by every backend a factory hands out.
struct CallLog {
    std::mutex mu;
    std::map<std::string, int> by_request;
    int total = 0;
    void add(const ChatRequest& r) {
        std::lock_guard lock(mu);
        ++total;
        ++by_request[std::to_string(static_cast<int>(r.purpose)) + "|" +
                     (r.caregiver ? std::string(to_string(*r.caregiver)) : "") + "|" + sha256_hex(r.subject)];
    }
    std::map<std::string, int> snapshot() {
        std::lock_guard lock(mu);
        return by_request;
    }
};

class LoggingBackend final : public ChatBackend {
public:
    LoggingBackend(CallLog& log, std::string poison = {}) : log_(log), poison_(std::move(poison)) {}
    ChatResponse complete(const ChatRequest& request) override {
        log_.add(request);
        if (!poison_.empty() && request.subject.find(poison_) != std::string_view::npos) {
            throw Error(ErrorCode::RequestRejected, "poisoned report");
        }
        return inner_.complete(request);
    }
    BackendDescriptor descriptor() const override { return inner_.descriptor(); }

private:
    CallLog& log_;
    std::string poison_;
    MockBackend inner_;
};

PipelineHooks logging_hooks(CallLog& log, std::string poison = {}) {
    PipelineHooks h;
    h.backend_factory = [&log, poison](const BackendDescriptor&) -> std::unique_ptr<ChatBackend> {
        return std::make_unique<LoggingBackend>(log, poison);
    };
    return h;
}

PipelineConfig small_config(const fs::path& out, std::size_t cases = 30) {
    PipelineConfig c;
    c.output_dir = out.string();
    c.corpus.synthetic.n_cases = cases;
    c.concurrency = 2;
    c.retry.base_delay = std::chrono::milliseconds(1);
    c.strata = {{Stratum::BothLack, 2}, {Stratum::NeitherLack, 3}, {Stratum::MotherOnlyLack, 2},
                {Stratum::FatherOnlyLack, 2}};
    return c;
}

std::map<std::string, std::string> exports_of(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::directory_iterator(root / "exports")) out[e.path().filename().string()] = read_text(e.path());
    return out;
}

}  // namespace

TEST_CASE("config defaults and round trip") {
    const auto c = parse_config("{}");
    CHECK(c == PipelineConfig{});
    CHECK(c.seed == 7);
    CHECK(c.assessment_sampling.temperature == 0.6);
    CHECK(c.assessment_sampling.top_k == 20);
    CHECK(c.assessment_sampling.top_p == 0.95);
    CHECK(c.assessment_sampling.max_output_tokens == 8000);
    CHECK(c.failure_threshold == 0.02);

    auto custom = small_config("/tmp/x");
    custom.seed = 99;
    custom.delimiters = {"<r>", "</r>", true};
    custom.reviewers = {"alice", "bob"};
    custom.api.port = 9000;
    CHECK(parse_config(to_json(custom)) == custom);
}

TEST_CASE("config errors name the key path") {
    CHECK(message_of([] { parse_config(R"({"assessment":{"sampling":{"top_q":1}}})"); }) ==
          "ConfigInvalid: assessment.sampling.top_q: unknown key");
    CHECK(message_of([] { parse_config(R"({"bogus":1})"); }).find("bogus: unknown key") != std::string::npos);
    CHECK(message_of([] { parse_config(R"({"seed":"seven"})"); }).find("seed") != std::string::npos);
    for (const char* bad : {"not json", R"({"concurrency":0})", R"({"failure_threshold":1.5})",
                            R"({"validation":{"reviewers":["a","a"]}})",
                            R"({"validation":{"strata":[{"stratum":"both_lack","target":1},{"stratum":"both_lack","target":2}]}})",
                            R"({"validation":{"strata":[{"stratum":"some","target":1}]}})",
                            R"({"corpus":{"source":"jsonl"}})", R"({"corpus":{"source":"manifest","path":"m.csv"}})",
                            R"({"assessment":{"sampling":{"temperature":-1}}})", R"({"api":{"port":70000}})"}) {
        CAPTURE(bad);
        CHECK(code_of([&] { parse_config(bad); }) == ErrorCode::ConfigInvalid);
    }
    CHECK(code_of([] { load_config("/nonexistent/config.json"); }) == ErrorCode::ConfigInvalid);
}

TEST_CASE("config digest tracks results-relevant fields only") {
    auto a = small_config("/tmp/a");
    auto b = small_config("/tmp/b");
    b.concurrency = 8;
    b.api.port = 1;
    CHECK(config_digest(a) == config_digest(b));
    CHECK(run_id(a).starts_with("run-"));
    CHECK(run_id(a).size() == 16);
    b.seed = 8;
    CHECK(config_digest(a) != config_digest(b));
    b = a;
    b.assessment_sampling.top_p = 0.9;
    CHECK(config_digest(a) != config_digest(b));
}

TEST_CASE("pipeline runs and resumes without recomputation") {
    TempDir dir;
    CallLog log;
    const auto cfg = small_config(dir / "run");
    const auto m = run_pipeline(cfg, logging_hooks(log));
    CHECK(m.status == "complete");
    const auto n = m.stages.at("ingest").total;
    CHECK(n > 30);
    CHECK(m.stages.at("assess").computed == 2 * n);
    CHECK(m.stages.at("extract").computed == 2 * n);
    CHECK(m.stages.at("assess").backend_calls == 2 * n);
    CHECK(log.total == static_cast<int>(4 * n));
    CHECK(m.total_errors() == 0);
    const RunPaths paths(cfg.output_dir);
    for (const auto& p : {paths.corpus, paths.ground_truth, paths.assessments, paths.extractions, paths.manifest,
                          paths.run_info, paths.exports / "table5.csv", paths.exports / "summary.json"}) {
        CHECK(fs::exists(p));
    }
    CHECK_FALSE(fs::exists(paths.lock));
    const auto first = exports_of(paths.root);

    const auto again = run_pipeline(cfg, logging_hooks(log));
    CHECK(again.stages.at("assess").resumed == 2 * n);
    CHECK(again.stages.at("assess").computed == 0);
    CHECK(again.stages.at("extract").backend_calls == 0);
    CHECK(log.total == static_cast<int>(4 * n));
    CHECK(exports_of(paths.root) == first);

    const auto manifest = nlohmann::json::parse(read_text(paths.manifest));
    CHECK(manifest["status"] == "complete");
    CHECK(manifest["run_id"] == run_id(cfg));
    CHECK(read_text(paths.manifest_log).find('\n') < read_text(paths.manifest_log).size() - 1);
}

TEST_CASE("interrupted runs resume to identical exports") {
    TempDir dir;
    CallLog clean_log;
    const auto clean = small_config(dir / "clean");
    run_pipeline(clean, logging_hooks(clean_log));

    for (std::uint64_t budget : {0u, 7u, 50u, 130u}) {
        CAPTURE(budget);
        CallLog log;
        const auto cfg = small_config(dir / ("cut" + std::to_string(budget)));
        auto hooks = logging_hooks(log);
        hooks.interrupt_after_calls = budget;
        CHECK(code_of([&] { run_pipeline(cfg, hooks); }) == ErrorCode::Interrupted);
        const auto partial = nlohmann::json::parse(read_text(RunPaths(cfg.output_dir).manifest));
        CHECK(partial["status"] == "interrupted");
        CHECK_FALSE(fs::exists(RunPaths(cfg.output_dir).lock));

        const auto resumed = run_pipeline(cfg, logging_hooks(log));
        CHECK(resumed.status == "complete");
        // Identical final answers legitimately repeat across reports, so
        // compare per-request call counts with the clean run.
        CHECK(log.snapshot() == clean_log.snapshot());
        CHECK(log.total == clean_log.total);
        CHECK(exports_of(cfg.output_dir) == exports_of(clean.output_dir));
    }
}

TEST_CASE("cancellation stops between items") {
    TempDir dir;
    CallLog log;
    std::atomic<bool> cancel{true};
    auto hooks = logging_hooks(log);
    hooks.cancel = &cancel;
    CHECK(code_of([&] { run_pipeline(small_config(dir / "run"), hooks); }) == ErrorCode::Interrupted);
    CHECK(log.total == 0);
}

TEST_CASE("stage-limited runs stop early") {
    TempDir dir;
    CallLog log;
    const auto cfg = small_config(dir / "run");
    const auto m = run_pipeline(cfg, logging_hooks(log), Stage::Assess);
    CHECK(m.stages.contains("assess"));
    CHECK_FALSE(m.stages.contains("extract"));
    CHECK_FALSE(fs::exists(RunPaths(cfg.output_dir).exports / "table5.csv"));
}

TEST_CASE("run directory guards") {
    TempDir dir;
    CallLog log;
    auto cfg = small_config(dir / "run");
    run_pipeline(cfg, logging_hooks(log), Stage::Ingest);

    auto other = cfg;
    other.seed = 1234;
    CHECK(code_of([&] { run_pipeline(other, logging_hooks(log)); }) == ErrorCode::ConfigInvalid);

    const RunPaths paths(cfg.output_dir);
    write_text(paths.lock, std::to_string(::getpid()) + "\n");
    CHECK(code_of([&] { run_pipeline(cfg, logging_hooks(log), Stage::Ingest); }) == ErrorCode::RunLocked);
    write_text(paths.lock, "999999999\n");
    CHECK(run_pipeline(cfg, logging_hooks(log), Stage::Ingest).status == "complete");
}

TEST_CASE("per-item failures are logged and bounded by the threshold") {
    TempDir dir;
    SyntheticConfig syn;
    syn.n_cases = 30;
    const auto corpus = generate_synthetic_corpus(syn).corpus;
    const auto victim = corpus.ordered().front();
    // The report header line carries the id, so exactly one report is poisoned.
    const auto poison = victim->report_id;

    SUBCASE("within threshold") {
        CallLog log;
        auto cfg = small_config(dir / "ok");
        cfg.failure_threshold = 0.2;
        cfg.min_coverage = 0.9;
        const auto m = run_pipeline(cfg, logging_hooks(log, poison));
        CHECK(m.status == "complete");
        CHECK(m.stages.at("assess").errors == 2);
        CHECK(m.stages.at("extract").skipped == 2);
        CHECK(m.error_tally.at("RequestRejected") == 2);
        const auto errors = read_text(RunPaths(cfg.output_dir).errors);
        CHECK(errors.find(poison) != std::string::npos);
    }
    SUBCASE("over threshold") {
        CallLog log;
        auto cfg = small_config(dir / "bad");
        cfg.failure_threshold = 0.0;
        CHECK(code_of([&] { run_pipeline(cfg, logging_hooks(log, poison)); }) == ErrorCode::FailureThresholdExceeded);
        const auto manifest = nlohmann::json::parse(read_text(RunPaths(cfg.output_dir).manifest));
        CHECK(manifest["status"] == "failed");
    }
}

TEST_CASE("validation exports wait for a final benchmark") {
    TempDir dir;
    CallLog log;
    auto cfg = small_config(dir / "run", 40);
    cfg.corpus.synthetic.profile.mother = {0.4, 0.3};
    cfg.corpus.synthetic.profile.father = {0.4, 0.3};
    run_pipeline(cfg, logging_hooks(log));
    auto result = export_reports(cfg);
    CHECK(result.refused.at("table2.csv") == "no validation sample");

    const auto sample = create_validation_sample(cfg);
    CHECK(sample.size() == 9);
    CHECK(create_validation_sample(cfg) == sample);

    auto store = open_validation_store(cfg);
    result = export_reports(cfg);
    CHECK(result.refused.contains("metrics.json"));
    CHECK_FALSE(fs::exists(RunPaths(cfg.output_dir).exports / "table3.csv"));

    // Reviewer 1 copies the model, reviewer 2 says "no evidence" everywhere.
    const auto extractions = load_run_extractions(cfg);
    std::map<std::pair<std::string, CaregiverRole>, CooperationCategory> model;
    for (const auto& e : extractions) model[{e.report_id, e.caregiver}] = e.category;
    for (const auto& s : sample) {
        for (auto role : kCaregivers) {
            AnnotationRecord a;
            a.report_id = s.report_id;
            a.caregiver = role;
            a.reviewer_id = "ehr1";
            a.category = model.at({s.report_id, role});
            store->record_annotation(a);
            a.reviewer_id = "ehr2";
            a.category = CooperationCategory::NoEvidence;
            store->record_annotation(a);
        }
    }
    result = export_reports(cfg);
    CHECK(result.refused.at("benchmark.csv").find("UnresolvedRemaining") == 0);
    for (const auto& d : store->list_disagreements().items) {
        store->resolve_consensus({d.report_id, d.caregiver}, d.categories[0], "sided with reviewer 1");
    }
    store.reset();
    result = export_reports(cfg);
    CHECK(result.refused.empty());
    const auto t3 = parse_table3_csv(read_text(RunPaths(cfg.output_dir).exports / "table3.csv"));
    // Consensus equals the model everywhere: no off-diagonal counts.
    CHECK(t3.at("both").fp == 0);
    CHECK(t3.at("both").fn == 0);
    CHECK(t3.at("both").n() == 18);
    const auto bench = parse_benchmark_csv(read_text(RunPaths(cfg.output_dir).exports / "benchmark.csv"));
    CHECK(bench.size() == 18);
}

TEST_CASE("helpers require a finished run") {
    TempDir dir;
    const auto cfg = small_config(dir / "empty");
    CHECK(code_of([&] { load_run_corpus(cfg); }) == ErrorCode::IncompleteRun);
    CHECK(code_of([&] { create_validation_sample(cfg); }) == ErrorCode::IncompleteRun);
}
