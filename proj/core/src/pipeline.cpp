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

#include "coop/pipeline.hpp"

#include <fcntl.h>
#include <signal.h>
#include <unistd.h>

#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <spdlog/spdlog.h>

#include "coop/error.hpp"
#include "coop/inference.hpp"
#include "coop/prompting.hpp"
#include "coop/synthetic.hpp"
#include "coop/tables.hpp"
#include "jsonl.hpp"
#include "timestamp.hpp"

namespace coop {

using jsonl::Json;

std::string_view to_string(Stage stage) noexcept {
    switch (stage) {
        case Stage::Ingest: return "ingest";
        case Stage::Assess: return "assess";
        case Stage::Extract: return "extract";
        case Stage::Label: return "label";
    }
    return "";
}

std::optional<Stage> parse_stage(std::string_view text) noexcept {
    for (auto s : kStages) {
        if (to_string(s) == text) return s;
    }
    return std::nullopt;
}

RunPaths::RunPaths(const std::filesystem::path& r)
    : root(r),
      lock(r / ".lock"),
      run_info(r / "run.json"),
      corpus(r / "corpus.jsonl"),
      ground_truth(r / "ground_truth.jsonl"),
      assessments(r / "assessments.jsonl"),
      extractions(r / "extractions.jsonl"),
      errors(r / "errors.jsonl"),
      manifest(r / "manifest.json"),
      manifest_log(r / "manifests.jsonl"),
      validation(r / "validation"),
      sample(r / "validation" / "sample.jsonl"),
      exports(r / "exports") {}

std::size_t RunManifest::total_errors() const {
    std::size_t n = 0;
    for (const auto& [code, count] : error_tally) n += count;
    return n;
}

std::string to_json(const RunManifest& m) {
    Json stages = Json::object();
    for (const auto& [name, c] : m.stages) {
        stages[name] = Json{{"total", c.total},     {"computed", c.computed}, {"resumed", c.resumed},
                            {"skipped", c.skipped}, {"errors", c.errors},     {"backend_calls", c.backend_calls}};
    }
    return Json{{"run_id", m.run_id},
                {"config_digest", m.config_digest},
                {"templates", Json{{"assessment", m.assessment_template}, {"extraction", m.extraction_template}}},
                {"backends", Json{{"assessment", Json::parse(m.assessment_backend.empty() ? "null" : m.assessment_backend)},
                                  {"extraction", Json::parse(m.extraction_backend.empty() ? "null" : m.extraction_backend)}}},
                {"sampling", Json{{"assessment", Json::parse(m.assessment_sampling.empty() ? "null" : m.assessment_sampling)},
                                  {"extraction", Json::parse(m.extraction_sampling.empty() ? "null" : m.extraction_sampling)}}},
                {"started_at", m.started_at},
                {"finished_at", m.finished_at},
                {"status", m.status},
                {"stages", stages},
                {"error_tally", m.error_tally}}
        .dump(2);
}

namespace {

class RunLock {
public:
    explicit RunLock(const std::filesystem::path& path) : path_(path) {
        for (int attempt = 0; attempt < 2; ++attempt) {
            const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
            if (fd >= 0) {
                const auto pid = std::to_string(::getpid()) + "\n";
                [[maybe_unused]] auto n = ::write(fd, pid.data(), pid.size());
                ::close(fd);
                return;
            }
            if (holder_alive()) break;
            std::filesystem::remove(path_);  // stale lock from a dead process
        }
        throw Error(ErrorCode::RunLocked, "another run holds " + path_.string());
    }
    ~RunLock() {
        std::error_code ec;
        std::filesystem::remove(path_, ec);
    }
    RunLock(const RunLock&) = delete;
    RunLock& operator=(const RunLock&) = delete;

private:
    bool holder_alive() const {
        std::ifstream in(path_);
        long pid = 0;
        if (!(in >> pid) || pid <= 0) return false;
        return ::kill(static_cast<pid_t>(pid), 0) == 0 || errno == EPERM;
    }

    std::filesystem::path path_;
};

/// Counts calls and simulates a crash after a budget.
class MeteredBackend final : public ChatBackend {
public:
    MeteredBackend(ChatBackend& inner, std::atomic<std::uint64_t>& calls, std::optional<std::uint64_t> budget)
        : inner_(inner), calls_(calls), budget_(budget) {}

    ChatResponse complete(const ChatRequest& request) override {
        if (budget_) {
            auto n = calls_.load();
            do {
                if (n >= *budget_) throw Error(ErrorCode::Interrupted, "call budget exhausted");
            } while (!calls_.compare_exchange_weak(n, n + 1));
        } else {
            ++calls_;
        }
        return inner_.complete(request);
    }
    BackendDescriptor descriptor() const override { return inner_.descriptor(); }

private:
    ChatBackend& inner_;
    std::atomic<std::uint64_t>& calls_;
    std::optional<std::uint64_t> budget_;
};

struct ItemFailure {
    std::string report_id;
    CaregiverRole caregiver = CaregiverRole::Mother;
    std::string code;
    std::string message;
};

struct FanOutResult {
    std::vector<ItemFailure> failures;
    std::size_t succeeded = 0;
    bool interrupted = false;
    bool aborted = false;
};

struct WorkItem {
    const ReportRecord* report = nullptr;
    CaregiverRole caregiver = CaregiverRole::Mother;
};

FanOutResult fan_out(const std::vector<WorkItem>& items, std::size_t workers, std::size_t allowed_errors,
                     const std::atomic<bool>* cancel, const std::function<void(const WorkItem&)>& fn) {
    FanOutResult result;
    std::atomic<std::size_t> next{0};
    std::atomic<bool> stop{false};
    std::mutex mu;

    auto worker = [&] {
        while (!stop.load()) {
            if (cancel && cancel->load()) {
                std::lock_guard lock(mu);
                result.interrupted = true;
                stop = true;
                break;
            }
            const auto i = next.fetch_add(1);
            if (i >= items.size()) break;
            const auto& item = items[i];
            std::optional<ItemFailure> failure;
            try {
                fn(item);
                std::lock_guard lock(mu);
                ++result.succeeded;
            } catch (const Error& e) {
                if (e.code() == ErrorCode::Interrupted) {
                    std::lock_guard lock(mu);
                    result.interrupted = true;
                    stop = true;
                    break;
                }
                failure = ItemFailure{item.report->report_id, item.caregiver, std::string(to_string(e.code())), e.what()};
            } catch (const std::exception& e) {
                failure = ItemFailure{item.report->report_id, item.caregiver, "Internal", e.what()};
            }
            if (failure) {
                spdlog::warn("{} ({}): {}", failure->report_id, to_string(failure->caregiver), failure->message);
                std::lock_guard lock(mu);
                result.failures.push_back(std::move(*failure));
                if (result.failures.size() > allowed_errors) {
                    result.aborted = true;
                    stop = true;
                }
            }
        }
    };

    const auto n = std::max<std::size_t>(1, std::min(workers, items.size()));
    std::vector<std::jthread> threads;
    for (std::size_t t = 1; t < n; ++t) threads.emplace_back(worker);
    worker();
    threads.clear();
    return result;
}

PromptTemplate assessment_template(const PipelineConfig& c) {
    auto t = c.templates.assessment.empty() ? default_assessment_template(c.templates.language)
                                            : load_prompt_template(c.templates.assessment);
    if (const auto v = validate_template(t); !v.empty()) {
        std::string msg;
        for (const auto& x : v) msg += (msg.empty() ? "" : ", ") + x.describe();
        throw Error(ErrorCode::ConfigInvalid, "templates.assessment: " + msg);
    }
    return t;
}

ExtractionTemplate extraction_template(const PipelineConfig& c) {
    auto t = c.templates.extraction.empty() ? default_extraction_template() : load_extraction_template(c.templates.extraction);
    if (const auto v = validate_template(t); !v.empty()) {
        std::string msg;
        for (const auto& x : v) msg += (msg.empty() ? "" : ", ") + x.describe();
        throw Error(ErrorCode::ConfigInvalid, "templates.extraction: " + msg);
    }
    return t;
}

std::string pair_key(std::string_view report_id, CaregiverRole role) {
    return std::string(report_id) + "|" + std::string(to_string(role));
}

std::map<std::string, RawModelOutput> load_assessments(const RunPaths& paths) {
    std::map<std::string, RawModelOutput> out;
    if (!std::filesystem::exists(paths.assessments)) return out;
    KeyedJsonlStore store(paths.assessments);
    for (const auto& line : store.lines()) {
        auto o = raw_output_from_json(line);
        out.insert_or_assign(pair_key(o.report_id, o.caregiver), std::move(o));
    }
    return out;
}

std::map<std::string, ExtractionResult> load_extractions(const RunPaths& paths) {
    std::map<std::string, ExtractionResult> out;
    if (!std::filesystem::exists(paths.extractions)) return out;
    KeyedJsonlStore store(paths.extractions);
    for (const auto& line : store.lines()) {
        auto r = extraction_from_json(line);
        out.insert_or_assign(pair_key(r.report_id, r.caregiver), std::move(r));
    }
    return out;
}

std::vector<WorkItem> work_items(const Corpus& corpus) {
    std::vector<WorkItem> items;
    for (const auto* rec : corpus.ordered()) {
        for (auto role : kCaregivers) items.push_back({rec, role});
    }
    return items;
}

std::string template_ref(std::string_view id, std::string_view version) {
    return std::string(id) + "@" + std::string(version);
}

void check_run_info(const RunPaths& paths, const RunManifest& m) {
    const Json info{{"run_id", m.run_id},
                    {"config_digest", m.config_digest},
                    {"assessment_template", m.assessment_template},
                    {"extraction_template", m.extraction_template}};
    if (std::filesystem::exists(paths.run_info)) {
        const auto existing = Json::parse(jsonl::read_file(paths.run_info));
        if (existing != info) {
            throw Error(ErrorCode::ConfigInvalid, "output directory " + paths.root.string() + " belongs to " +
                                                      existing.value("run_id", "another run") +
                                                      " with a different configuration or template");
        }
        return;
    }
    jsonl::write_file_atomic(paths.run_info, info.dump(2) + "\n");
}

Corpus build_corpus(const PipelineConfig& c, const RunPaths& paths) {
    switch (c.corpus.source) {
        case CorpusSource::Synthetic: {
            auto syn = c.corpus.synthetic;
            syn.seed = c.seed;
            auto generated = generate_synthetic_corpus(syn);
            std::ostringstream gt;
            save_ground_truth(generated.truth, gt);
            jsonl::write_file_atomic(paths.ground_truth, gt.str());
            return std::move(generated.corpus);
        }
        case CorpusSource::Jsonl: return ingest_jsonl(std::filesystem::path(c.corpus.path));
        case CorpusSource::Manifest: return ingest_manifest(c.corpus.path, c.corpus.text_dir, c.concurrency);
        case CorpusSource::Normalized: return load_corpus(std::filesystem::path(c.corpus.path));
    }
    throw Error(ErrorCode::ConfigInvalid, "corpus.source");
}

class Run {
public:
    Run(const PipelineConfig& config, const PipelineHooks& hooks)
        : config_(config), hooks_(hooks), paths_(config.output_dir) {
        validate(config_);
        std::filesystem::create_directories(paths_.root);
        assessment_tmpl_ = assessment_template(config_);
        extraction_tmpl_ = extraction_template(config_);

        auto factory = hooks_.backend_factory ? hooks_.backend_factory : make_backend;
        assessment_inner_ = factory(config_.assessment_backend);
        extraction_inner_ = factory(config_.extraction_backend);
        assessment_backend_ = std::make_unique<MeteredBackend>(*assessment_inner_, calls_, hooks_.interrupt_after_calls);
        extraction_backend_ = std::make_unique<MeteredBackend>(*extraction_inner_, calls_, hooks_.interrupt_after_calls);

        manifest_.run_id = run_id(config_);
        manifest_.config_digest = config_digest(config_);
        manifest_.assessment_template = template_ref(assessment_tmpl_.template_id, assessment_tmpl_.version);
        manifest_.extraction_template = template_ref(extraction_tmpl_.template_id, extraction_tmpl_.version);
        manifest_.assessment_backend = canonical_json(assessment_inner_->descriptor());
        manifest_.extraction_backend = canonical_json(extraction_inner_->descriptor());
        manifest_.assessment_sampling = canonical_json(config_.assessment_sampling);
        manifest_.extraction_sampling = canonical_json(config_.extraction_sampling);
        manifest_.started_at = utc_timestamp();
        manifest_.status = "running";
    }

    RunManifest execute(Stage last) {
        RunLock lock(paths_.lock);
        check_run_info(paths_, manifest_);
        spdlog::info("{}: output in {}", manifest_.run_id, paths_.root.string());
        try {
            for (auto stage : kStages) {
                run_stage(stage);
                if (stage == last) break;
            }
            if (last == Stage::Label) export_reports(config_);
        } catch (const Error& e) {
            finish(e.code() == ErrorCode::Interrupted ? "interrupted" : "failed");
            throw;
        }
        finish("complete");
        return manifest_;
    }

private:
    void run_stage(Stage stage) {
        spdlog::info("stage {}", to_string(stage));
        switch (stage) {
            case Stage::Ingest: ingest(); break;
            case Stage::Assess: assess(); break;
            case Stage::Extract: extract(); break;
            case Stage::Label: label(); break;
        }
    }

    void ingest() {
        auto& counts = manifest_.stages["ingest"];
        if (std::filesystem::exists(paths_.corpus)) {
            const auto corpus = load_corpus(paths_.corpus);
            counts.total = counts.resumed = corpus.size();
            return;
        }
        const auto corpus = build_corpus(config_, paths_);
        std::ostringstream out;
        save_corpus(corpus, out);
        jsonl::write_file_atomic(paths_.corpus, out.str());
        counts.total = counts.computed = corpus.size();
    }

    std::size_t allowed_errors(std::size_t total) const {
        return static_cast<std::size_t>(std::floor(config_.failure_threshold * static_cast<double>(total)));
    }

    void settle(const std::string& stage, StageCounts& counts, const FanOutResult& r) {
        counts.errors = r.failures.size();
        if (!r.failures.empty()) {
            std::ofstream err(paths_.errors, std::ios::binary | std::ios::app);
            for (const auto& f : r.failures) {
                ++manifest_.error_tally[f.code];
                err << Json{{"run_id", manifest_.run_id}, {"stage", stage},         {"report_id", f.report_id},
                            {"caregiver", to_string(f.caregiver)}, {"code", f.code}, {"message", f.message}}
                           .dump()
                    << '\n';
            }
        }
        if (r.interrupted) throw Error(ErrorCode::Interrupted, "run interrupted during " + stage);
        if (r.aborted) {
            throw Error(ErrorCode::FailureThresholdExceeded,
                        stage + ": " + std::to_string(r.failures.size()) + " of " + std::to_string(counts.total) +
                            " items failed");
        }
    }

    void assess() {
        const auto corpus = load_corpus(paths_.corpus);
        const auto items = work_items(corpus);
        KeyedJsonlStore cache(paths_.assessments);
        InferenceClient client(*assessment_backend_,
                               {config_.assessment_sampling, config_.delimiters, config_.retry, config_.concurrency},
                               &cache);
        auto& counts = manifest_.stages["assess"];
        counts.total = items.size();
        const auto calls_before = calls_.load();
        const auto result = fan_out(items, config_.concurrency, allowed_errors(items.size()), hooks_.cancel,
                                    [&](const WorkItem& item) {
                                        const auto prompt =
                                            build_assessment_prompt(*item.report, item.caregiver, assessment_tmpl_);
                                        (void)client.classify_report(prompt);
                                    });
        counts.resumed = client.stats().cache_hits.load();
        counts.computed = result.succeeded - counts.resumed;
        counts.backend_calls = calls_.load() - calls_before;
        settle("assess", counts, result);
    }

    void extract() {
        const auto corpus = load_corpus(paths_.corpus);
        const auto assessments = load_assessments(paths_);
        std::vector<WorkItem> items;
        auto& counts = manifest_.stages["extract"];
        for (const auto& item : work_items(corpus)) {
            if (assessments.contains(pair_key(item.report->report_id, item.caregiver))) {
                items.push_back(item);
            } else {
                ++counts.skipped;
            }
        }
        counts.total = items.size();
        const auto calls_before = calls_.load();

        KeyedJsonlStore cache(paths_.extractions);
        Extractor extractor(*extraction_backend_, extraction_tmpl_,
                            {config_.extraction_sampling, config_.retry, config_.extraction_fallback}, &cache);
        const auto result = fan_out(items, config_.concurrency, allowed_errors(items.size() + counts.skipped),
                                    hooks_.cancel, [&](const WorkItem& item) {
                                        const auto& a = assessments.at(pair_key(item.report->report_id, item.caregiver));
                                        (void)extractor.extract(a.report_id, a.caregiver, a.final_answer);
                                    });
        counts.resumed = extractor.stats().cache_hits.load();
        counts.computed = result.succeeded - counts.resumed;
        counts.backend_calls = calls_.load() - calls_before;
        settle("extract", counts, result);
    }

    void label() {
        const auto corpus = load_corpus(paths_.corpus);
        const auto extractions = load_run_extractions(config_);
        const auto summary = corpus_summary(extractions, corpus, config_.min_coverage);
        auto& counts = manifest_.stages["label"];
        counts.total = 2 * corpus.size();
        counts.computed = extractions.size();
        counts.skipped = summary.missing_pairs;
    }

    void finish(const std::string& status) {
        manifest_.status = status;
        manifest_.finished_at = utc_timestamp();
        const auto text = to_json(manifest_);
        try {
            jsonl::write_file_atomic(paths_.manifest, text + "\n");
            std::ofstream log(paths_.manifest_log, std::ios::binary | std::ios::app);
            log << Json::parse(text).dump() << '\n';
        } catch (const std::exception& e) {
            spdlog::error("cannot write manifest: {}", e.what());
        }
    }

    const PipelineConfig& config_;
    const PipelineHooks& hooks_;
    RunPaths paths_;
    PromptTemplate assessment_tmpl_;
    ExtractionTemplate extraction_tmpl_;
    std::atomic<std::uint64_t> calls_{0};
    std::unique_ptr<ChatBackend> assessment_inner_;
    std::unique_ptr<ChatBackend> extraction_inner_;
    std::unique_ptr<ChatBackend> assessment_backend_;
    std::unique_ptr<ChatBackend> extraction_backend_;
    RunManifest manifest_;
};

std::string case_labels_csv(const CorpusSummary& summary) {
    std::string out = "case_id,caregiver,lack_ever,n_reports,n_lack_reports\n";
    for (const auto& c : summary.case_labels) {
        out += c.case_id + "," + std::string(to_string(c.caregiver)) + "," + (c.lack_ever ? "true" : "false") + "," +
               std::to_string(c.n_reports) + "," + std::to_string(c.n_lack_reports) + "\n";
    }
    return out;
}

}  // namespace

RunManifest run_pipeline(const PipelineConfig& config, const PipelineHooks& hooks, Stage last) {
    Run run(config, hooks);
    return run.execute(last);
}

Corpus load_run_corpus(const PipelineConfig& config) {
    const RunPaths paths(config.output_dir);
    if (!std::filesystem::exists(paths.corpus)) {
        throw Error(ErrorCode::IncompleteRun, "no ingested corpus in " + paths.root.string());
    }
    return load_corpus(paths.corpus);
}

std::vector<ExtractionResult> load_run_extractions(const PipelineConfig& config) {
    const RunPaths paths(config.output_dir);
    const auto corpus = load_run_corpus(config);
    const auto assessments = load_assessments(paths);
    const auto extractions = load_extractions(paths);
    std::vector<ExtractionResult> out;
    for (const auto& item : work_items(corpus)) {
        const auto key = pair_key(item.report->report_id, item.caregiver);
        if (assessments.contains(key)) {
            if (auto it = extractions.find(key); it != extractions.end()) out.push_back(it->second);
        }
    }
    return out;
}

std::vector<SampleItem> create_validation_sample(const PipelineConfig& config) {
    const RunPaths paths(config.output_dir);
    if (std::filesystem::exists(paths.sample)) return load_sample(paths.sample);

    const auto extractions = load_run_extractions(config);
    if (extractions.empty()) throw Error(ErrorCode::IncompleteRun, "no labels to sample from; run the pipeline first");
    std::map<std::string, std::array<std::optional<BinaryLabel>, 2>> labels;
    for (const auto& r : extractions) labels[r.report_id][static_cast<std::size_t>(r.caregiver)] = to_binary(r.category);
    std::vector<ClassifiedReport> population;
    for (const auto& [id, pair] : labels) {
        if (pair[0] && pair[1]) population.push_back({id, *pair[0], *pair[1]});
    }
    auto sample = build_stratified_sample(population, config.strata, config.seed);
    std::filesystem::create_directories(paths.validation);
    save_sample(sample, paths.sample);
    return sample;
}

std::unique_ptr<ValidationStore> open_validation_store(const PipelineConfig& config) {
    const RunPaths paths(config.output_dir);
    if (!std::filesystem::exists(paths.sample)) {
        throw Error(ErrorCode::IncompleteRun, "no validation sample in " + paths.validation.string());
    }
    const auto corpus = load_run_corpus(config);
    return std::make_unique<ValidationStore>(load_sample(paths.sample), corpus, config.reviewers, paths.validation);
}

MetricsReport validation_metrics(const ValidationStore& store, std::span<const ExtractionResult> extractions) {
    const auto benchmark = store.export_benchmark();
    std::map<std::string, CooperationCategory> model;
    for (const auto& r : extractions) model[pair_key(r.report_id, r.caregiver)] = r.category;

    const auto& reviewers = store.reviewers();
    std::vector<RatedItem> items;
    items.reserve(benchmark.size());
    for (const auto& b : benchmark) {
        auto it = model.find(pair_key(b.report_id, b.caregiver));
        if (it == model.end()) {
            throw Error(ErrorCode::IncompleteRun, "no model label for " + pair_key(b.report_id, b.caregiver));
        }
        const ItemKey key{b.report_id, b.caregiver};
        const auto r1 = store.annotation(key, reviewers[0], reviewers[0]);
        const auto r2 = store.annotation(key, reviewers[1], reviewers[1]);
        items.push_back({b.report_id, b.caregiver, it->second, r1->category, r2->category, b.category});
    }
    return build_metrics_report(items);
}

ExportResult export_reports(const PipelineConfig& config) {
    const RunPaths paths(config.output_dir);
    const auto corpus = load_run_corpus(config);
    const auto extractions = load_run_extractions(config);
    const auto summary = corpus_summary(extractions, corpus, config.min_coverage);
    const auto id = run_id(config);

    ExportResult result;
    std::filesystem::create_directories(paths.exports);
    auto write = [&](const char* name, const std::string& content) {
        const auto path = paths.exports / name;
        jsonl::write_file_atomic(path, content);
        result.written.push_back(path);
    };
    write("table5.csv", table5_csv(summary));
    write("summary.json", summary_json(summary, id));
    write("corpus_stats.json", stats_to_json(corpus_stats(corpus)) + "\n");
    write("case_labels.csv", case_labels_csv(summary));

    constexpr std::array<const char*, 5> kValidationExports{"benchmark.csv", "table2.csv", "table3.csv", "table4.csv",
                                                            "metrics.json"};
    auto refuse = [&](const std::string& reason) {
        for (const auto* name : kValidationExports) result.refused[name] = reason;
    };
    if (!std::filesystem::exists(paths.sample)) {
        refuse("no validation sample");
        return result;
    }
    const auto store = open_validation_store(config);
    try {
        const auto benchmark = store->export_benchmark();
        const auto report = validation_metrics(*store, extractions);
        write("benchmark.csv", benchmark_csv(benchmark));
        write("table2.csv", table2_csv(report));
        write("table3.csv", table3_csv(report));
        write("table4.csv", table4_csv(report));
        write("metrics.json", metrics_json(report, id));
    } catch (const Error& e) {
        if (e.code() != ErrorCode::UnresolvedRemaining && e.code() != ErrorCode::IncompleteAnnotations) throw;
        refuse(e.what());
    }
    return result;
}

}  // namespace coop
