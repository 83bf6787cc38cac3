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

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "coop/api.hpp"
#include "coop/config.hpp"
#include "coop/error.hpp"
#include "coop/metrics.hpp"
#include "coop/pipeline.hpp"
#include "coop/synthetic.hpp"
#include "coop/tables.hpp"

namespace {

struct GlobalFlags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string backend;
    std::optional<std::size_t> concurrency;
    std::string output_dir;
    std::string log_level = "info";
};

coop::PipelineConfig resolve_config(const GlobalFlags& g) {
    auto c = g.config.empty() ? coop::PipelineConfig{} : coop::load_config(g.config);
    if (g.seed) c.seed = *g.seed;
    if (g.concurrency) c.concurrency = *g.concurrency;
    if (!g.output_dir.empty()) c.output_dir = g.output_dir;
    if (!g.backend.empty()) {
        if (g.backend != "mock" && g.backend != "remote") {
            throw coop::Error(coop::ErrorCode::ConfigInvalid, "--backend must be mock or remote");
        }
        const auto kind = g.backend == "mock" ? coop::BackendKind::Mock : coop::BackendKind::Remote;
        c.assessment_backend.kind = kind;
        c.extraction_backend.kind = kind;
    }
    coop::validate(c);
    return c;
}

void print_manifest(const coop::RunManifest& m) {
    std::cout << m.run_id << " " << m.status << "\n";
    for (const auto& [stage, c] : m.stages) {
        std::printf("  %-8s total %zu  computed %zu  resumed %zu  skipped %zu  errors %zu  calls %llu\n", stage.c_str(),
                    c.total, c.computed, c.resumed, c.skipped, c.errors, static_cast<unsigned long long>(c.backend_calls));
    }
}

void print_exports(const coop::ExportResult& r) {
    for (const auto& p : r.written) std::cout << "wrote " << p.string() << "\n";
    for (const auto& [name, reason] : r.refused) std::cout << "skipped " << name << ": " << reason << "\n";
}

coop::ConfusionMatrix parse_confusion(const std::string& text) {
    std::vector<std::uint64_t> v;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
        try {
            std::size_t used = 0;
            v.push_back(std::stoull(part, &used));
            if (used != part.size()) throw std::invalid_argument(part);
        } catch (const std::exception&) {
            throw coop::Error(coop::ErrorCode::InvalidInput, "--from-confusion expects tp,fp,fn,tn");
        }
    }
    if (v.size() != 4) throw coop::Error(coop::ErrorCode::InvalidInput, "--from-confusion expects tp,fp,fn,tn");
    return {v[0], v[1], v[2], v[3]};
}

void print_stats(const coop::ConfusionMatrix& cm) {
    const auto s = coop::classification_metrics(cm);
    using coop::format_fixed;
    std::cout << "n                   " << cm.n() << "\n"
              << "accuracy            " << format_fixed(s.accuracy, 4) << "\n"
              << "precision_weighted  " << format_fixed(s.precision_weighted, 4) << "\n"
              << "recall_weighted     " << format_fixed(s.recall_weighted, 4) << "\n"
              << "f1_weighted         " << format_fixed(s.f1_weighted, 4) << "\n"
              << "kappa               " << format_fixed(s.kappa, 4) << " (" << coop::to_string(s.kappa_band)
              << (s.kappa_degenerate ? ", degenerate" : "") << ")\n"
              << "sensitivity         " << format_fixed(100.0 * s.sensitivity, 2) << "%\n"
              << "specificity         " << format_fixed(100.0 * s.specificity, 2) << "%\n"
              << "false_positive_rate " << format_fixed(100.0 * s.false_positive_rate, 2) << "%\n";
}

int exit_code(coop::ErrorCode code) {
    switch (code) {
        case coop::ErrorCode::ConfigInvalid:
        case coop::ErrorCode::InvalidConfig: return 2;
        case coop::ErrorCode::Interrupted: return 3;
        case coop::ErrorCode::RunLocked: return 4;
        default: return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Per-caregiver cooperation classification and validation pipeline"};
    app.require_subcommand(1);
    GlobalFlags g;
    app.add_option("--config", g.config, "Pipeline config (JSON)")->check(CLI::ExistingFile);
    app.add_option("--seed", g.seed, "Seed for synthetic corpora and sampling");
    app.add_option("--backend", g.backend, "Backend for both model calls")->check(CLI::IsMember({"mock", "remote"}));
    app.add_option("--concurrency", g.concurrency, "In-flight model calls")->check(CLI::PositiveNumber);
    app.add_option("--output-dir", g.output_dir, "Run directory");
    app.add_option("--log-level", g.log_level, "trace, debug, info, warn, error, off");

    std::map<std::string, coop::Stage> stage_verbs{{"ingest", coop::Stage::Ingest},
                                                   {"assess", coop::Stage::Assess},
                                                   {"extract", coop::Stage::Extract},
                                                   {"label", coop::Stage::Label},
                                                   {"run", coop::Stage::Label}};
    std::map<std::string, CLI::App*> stage_cmds;
    stage_cmds["ingest"] = app.add_subcommand("ingest", "Normalize and store the corpus");
    stage_cmds["assess"] = app.add_subcommand("assess", "Ingest, then run reasoning assessments");
    stage_cmds["extract"] = app.add_subcommand("extract", "Run up to category extraction");
    stage_cmds["label"] = app.add_subcommand("label", "Run up to labeling and write summary exports");
    stage_cmds["run"] = app.add_subcommand("run", "Run every stage (same as label)");

    auto* sample = app.add_subcommand("sample", "Draw the stratified validation sample");

    auto* serve = app.add_subcommand("serve", "Serve the review API");
    std::string host;
    int port = -1;
    bool allow_remote = false;
    serve->add_option("--host", host, "Bind address (loopback by default)");
    serve->add_option("--port", port, "Port");
    serve->add_flag("--allow-remote-bind", allow_remote, "Permit a non-loopback bind address");

    auto* metrics = app.add_subcommand("metrics", "Print agreement metrics");
    std::string from_confusion;
    metrics->add_option("--from-confusion", from_confusion, "Compute from counts tp,fp,fn,tn instead of a run");

    auto* exp = app.add_subcommand("export", "Write table exports for a finished run");

    auto* show_config = app.add_subcommand("config", "Print the effective config as JSON");

    auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus with ground truth");
    std::size_t n_cases = 100;
    std::string synth_out;
    std::string language = "en";
    synth->add_option("--cases", n_cases, "Number of cases")->check(CLI::PositiveNumber);
    synth->add_option("--language", language, "en or de")->check(CLI::IsMember({"en", "de"}));
    synth->add_option("--out", synth_out, "Directory for corpus.jsonl and ground_truth.jsonl")->required();

    CLI11_PARSE(app, argc, argv);

    spdlog::set_default_logger(spdlog::stderr_color_mt("coop"));
    spdlog::set_level(spdlog::level::from_str(g.log_level));

    try {
        for (const auto& [verb, cmd] : stage_cmds) {
            if (!cmd->parsed()) continue;
            const auto config = resolve_config(g);
            const auto manifest = coop::run_pipeline(config, {}, stage_verbs.at(verb));
            print_manifest(manifest);
            return 0;
        }

        if (sample->parsed()) {
            const auto config = resolve_config(g);
            const auto items = coop::create_validation_sample(config);
            std::map<coop::Stratum, std::size_t> counts;
            for (const auto& i : items) ++counts[i.stratum];
            for (const auto& [stratum, n] : counts) std::cout << coop::to_string(stratum) << " " << n << "\n";
            std::cout << items.size() << " reports sampled\n";
            return 0;
        }

        if (serve->parsed()) {
            auto config = resolve_config(g);
            const auto corpus = coop::load_run_corpus(config);
            const auto extractions = coop::load_run_extractions(config);
            auto store = coop::open_validation_store(config);
            coop::ApiServer::Options options;
            options.host = host.empty() ? config.api.host : host;
            options.port = port >= 0 ? port : config.api.port;
            options.allow_remote_bind = allow_remote || config.api.allow_remote_bind;
            options.benchmark_path = (std::filesystem::path(config.output_dir) / "exports" / "benchmark.csv").string();
            coop::ApiServer server(
                *store, corpus, [&] { return coop::validation_metrics(*store, extractions); }, options);
            server.run();
            return 0;
        }

        if (metrics->parsed()) {
            if (!from_confusion.empty()) {
                print_stats(parse_confusion(from_confusion));
                return 0;
            }
            const auto config = resolve_config(g);
            const auto store = coop::open_validation_store(config);
            const auto extractions = coop::load_run_extractions(config);
            std::cout << coop::metrics_json(coop::validation_metrics(*store, extractions), coop::run_id(config));
            return 0;
        }

        if (show_config->parsed()) {
            std::cout << coop::to_json(resolve_config(g));
            return 0;
        }

        if (exp->parsed()) {
            print_exports(coop::export_reports(resolve_config(g)));
            return 0;
        }

        if (synth->parsed()) {
            coop::SyntheticConfig sc;
            sc.seed = g.seed.value_or(7);
            sc.n_cases = n_cases;
            sc.profile.language = language;
            const auto generated = coop::generate_synthetic_corpus(sc);
            std::filesystem::create_directories(synth_out);
            coop::save_corpus(generated.corpus, std::filesystem::path(synth_out) / "corpus.jsonl");
            coop::save_ground_truth(generated.truth, std::filesystem::path(synth_out) / "ground_truth.jsonl");
            std::cout << generated.corpus.size() << " reports in " << n_cases << " cases written to " << synth_out << "\n";
            return 0;
        }
    } catch (const coop::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
