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

#include "coop/config.hpp"

#include <cstdlib>
#include <set>

#include "coop/digest.hpp"
#include "coop/error.hpp"
#include "jsonl.hpp"

namespace coop {

using jsonl::Json;

std::string_view to_string(CorpusSource source) noexcept {
    switch (source) {
        case CorpusSource::Synthetic: return "synthetic";
        case CorpusSource::Jsonl: return "jsonl";
        case CorpusSource::Manifest: return "manifest";
        case CorpusSource::Normalized: return "normalized";
    }
    return "";
}

namespace {

[[noreturn]] void invalid(const std::string& path, const std::string& what) {
    throw Error(ErrorCode::ConfigInvalid, path + ": " + what);
}

/// Reads keys from one JSON object and rejects the ones nobody asked for.
class Section {
public:
    Section(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) invalid(path_.empty() ? "<root>" : path_, "expected an object");
    }

    std::string key_path(std::string_view key) const {
        return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
    }

    const Json* find(const char* key) {
        seen_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    void read(const char* key, std::string& out) {
        if (const auto* v = find(key)) {
            if (!v->is_string()) invalid(key_path(key), "expected a string");
            out = v->get<std::string>();
        }
    }
    void read(const char* key, bool& out) {
        if (const auto* v = find(key)) {
            if (!v->is_boolean()) invalid(key_path(key), "expected a boolean");
            out = v->get<bool>();
        }
    }
    void read(const char* key, double& out) {
        if (const auto* v = find(key)) {
            if (!v->is_number()) invalid(key_path(key), "expected a number");
            out = v->get<double>();
        }
    }
    void read(const char* key, int& out) {
        if (const auto* v = find(key)) {
            if (!v->is_number_integer()) invalid(key_path(key), "expected an integer");
            out = v->get<int>();
        }
    }
    template <typename U>
        requires std::is_unsigned_v<U> && (!std::is_same_v<U, bool>)
    void read(const char* key, U& out) {
        if (const auto* v = find(key)) {
            if (!v->is_number_unsigned()) invalid(key_path(key), "expected a non-negative integer");
            out = static_cast<U>(v->get<std::uint64_t>());
        }
    }
    void read_ms(const char* key, std::chrono::milliseconds& out) {
        std::uint64_t ms = static_cast<std::uint64_t>(out.count());
        read(key, ms);
        out = std::chrono::milliseconds(ms);
    }

    template <typename Fn>
    void section(const char* key, Fn&& fn) {
        if (const auto* v = find(key)) {
            Section s(*v, key_path(key));
            fn(s);
            s.finish();
        }
    }

    void finish() const {
        for (const auto& [k, v] : j_.items()) {
            if (!seen_.contains(k)) invalid(key_path(k), "unknown key");
        }
    }

private:
    const Json& j_;
    std::string path_;
    std::set<std::string, std::less<>> seen_;
};

void read_backend(Section& s, BackendDescriptor& b) {
    std::string kind(to_string(b.kind));
    s.read("kind", kind);
    if (kind == "mock") {
        b.kind = BackendKind::Mock;
    } else if (kind == "remote") {
        b.kind = BackendKind::Remote;
    } else {
        invalid(s.key_path("kind"), "expected \"mock\" or \"remote\"");
    }
    s.read("endpoint_url", b.endpoint_url);
    s.read("credential_env", b.credential_env);
    s.read("rule_set", b.rule_set);
    s.read("drop_unsupported_top_k", b.drop_unsupported_top_k);
    s.read_ms("timeout_ms", b.timeout);
}

void read_sampling(Section& s, SamplingConfig& c) {
    s.read("temperature", c.temperature);
    s.read("top_k", c.top_k);
    s.read("top_p", c.top_p);
    s.read("max_output_tokens", c.max_output_tokens);
    s.read("model_name", c.model_name);
}

void read_rates(Section& s, CategoryRates& r) {
    s.read("lack", r.lack);
    s.read("present", r.present);
}

Json backend_json(const BackendDescriptor& b) {
    return Json{{"kind", to_string(b.kind)},
                {"endpoint_url", b.endpoint_url},
                {"credential_env", b.credential_env},
                {"rule_set", b.rule_set},
                {"drop_unsupported_top_k", b.drop_unsupported_top_k},
                {"timeout_ms", b.timeout.count()}};
}

Json sampling_json(const SamplingConfig& c) {
    return Json{{"temperature", c.temperature},
                {"top_k", c.top_k},
                {"top_p", c.top_p},
                {"max_output_tokens", c.max_output_tokens},
                {"model_name", c.model_name}};
}

Json rates_json(const CategoryRates& r) { return Json{{"lack", r.lack}, {"present", r.present}}; }

Json config_json(const PipelineConfig& c, bool for_digest) {
    const auto& syn = c.corpus.synthetic;
    const auto& p = syn.profile;
    Json strata = Json::array();
    for (const auto& s : c.strata) strata.push_back(Json{{"stratum", to_string(s.stratum)}, {"target", s.target_count}});

    Json j{
        {"seed", c.seed},
        {"corpus",
         Json{{"source", to_string(c.corpus.source)},
              {"path", c.corpus.path},
              {"text_dir", c.corpus.text_dir},
              {"synthetic", Json{{"n_cases", syn.n_cases},
                                 {"min_reports_per_case", syn.min_reports_per_case},
                                 {"max_reports_per_case", syn.max_reports_per_case},
                                 {"start_date", syn.start_date},
                                 {"language", p.language},
                                 {"mother", rates_json(p.mother)},
                                 {"father", rates_json(p.father)},
                                 {"trajectory_fraction", p.trajectory_fraction},
                                 {"collective_fraction", p.collective_fraction},
                                 {"min_fillers", p.min_fillers},
                                 {"max_fillers", p.max_fillers}}}}},
        {"templates", Json{{"assessment", c.templates.assessment},
                           {"extraction", c.templates.extraction},
                           {"language", c.templates.language}}},
        {"assessment", Json{{"backend", backend_json(c.assessment_backend)},
                            {"sampling", sampling_json(c.assessment_sampling)},
                            {"delimiters", Json{{"open", c.delimiters.open},
                                                {"close", c.delimiters.close},
                                                {"lenient", c.delimiters.lenient}}}}},
        {"extraction", Json{{"backend", backend_json(c.extraction_backend)},
                            {"sampling", sampling_json(c.extraction_sampling)},
                            {"fallback", c.extraction_fallback}}},
        {"retry", Json{{"max_attempts", c.retry.max_attempts},
                       {"base_delay_ms", c.retry.base_delay.count()},
                       {"max_delay_ms", c.retry.max_delay.count()}}},
        {"failure_threshold", c.failure_threshold},
        {"min_coverage", c.min_coverage},
        {"validation", Json{{"strata", strata}, {"reviewers", c.reviewers}}},
    };
    if (!for_digest) {
        j["output_dir"] = c.output_dir;
        j["concurrency"] = c.concurrency;
        j["api"] = Json{{"host", c.api.host}, {"port", c.api.port}, {"allow_remote_bind", c.api.allow_remote_bind}};
    }
    return j;
}

}  // namespace

PipelineConfig parse_config(std::string_view json_text) {
    Json root;
    try {
        root = Json::parse(json_text);
    } catch (const Json::parse_error& e) {
        throw Error(ErrorCode::ConfigInvalid, std::string("config is not valid JSON: ") + e.what());
    }

    PipelineConfig c;
    Section s(root, "");
    s.read("seed", c.seed);
    s.read("output_dir", c.output_dir);
    s.read("concurrency", c.concurrency);
    s.read("failure_threshold", c.failure_threshold);
    s.read("min_coverage", c.min_coverage);

    s.section("corpus", [&](Section& cs) {
        std::string source(to_string(c.corpus.source));
        cs.read("source", source);
        if (source == "synthetic") c.corpus.source = CorpusSource::Synthetic;
        else if (source == "jsonl") c.corpus.source = CorpusSource::Jsonl;
        else if (source == "manifest") c.corpus.source = CorpusSource::Manifest;
        else if (source == "normalized") c.corpus.source = CorpusSource::Normalized;
        else invalid(cs.key_path("source"), "expected synthetic, jsonl, manifest or normalized");
        cs.read("path", c.corpus.path);
        cs.read("text_dir", c.corpus.text_dir);
        cs.section("synthetic", [&](Section& ss) {
            auto& syn = c.corpus.synthetic;
            auto& p = syn.profile;
            ss.read("n_cases", syn.n_cases);
            ss.read("min_reports_per_case", syn.min_reports_per_case);
            ss.read("max_reports_per_case", syn.max_reports_per_case);
            ss.read("start_date", syn.start_date);
            ss.read("language", p.language);
            ss.section("mother", [&](Section& r) { read_rates(r, p.mother); });
            ss.section("father", [&](Section& r) { read_rates(r, p.father); });
            ss.read("trajectory_fraction", p.trajectory_fraction);
            ss.read("collective_fraction", p.collective_fraction);
            ss.read("min_fillers", p.min_fillers);
            ss.read("max_fillers", p.max_fillers);
        });
    });
    s.section("templates", [&](Section& ts) {
        ts.read("assessment", c.templates.assessment);
        ts.read("extraction", c.templates.extraction);
        ts.read("language", c.templates.language);
    });
    s.section("assessment", [&](Section& as) {
        as.section("backend", [&](Section& b) { read_backend(b, c.assessment_backend); });
        as.section("sampling", [&](Section& b) { read_sampling(b, c.assessment_sampling); });
        as.section("delimiters", [&](Section& d) {
            d.read("open", c.delimiters.open);
            d.read("close", c.delimiters.close);
            d.read("lenient", c.delimiters.lenient);
        });
    });
    s.section("extraction", [&](Section& es) {
        es.section("backend", [&](Section& b) { read_backend(b, c.extraction_backend); });
        es.section("sampling", [&](Section& b) { read_sampling(b, c.extraction_sampling); });
        es.read("fallback", c.extraction_fallback);
    });
    s.section("retry", [&](Section& rs) {
        rs.read("max_attempts", c.retry.max_attempts);
        rs.read_ms("base_delay_ms", c.retry.base_delay);
        rs.read_ms("max_delay_ms", c.retry.max_delay);
    });
    s.section("validation", [&](Section& vs) {
        if (const auto* strata = vs.find("strata")) {
            if (!strata->is_array()) invalid(vs.key_path("strata"), "expected an array");
            c.strata.clear();
            for (std::size_t i = 0; i < strata->size(); ++i) {
                Section e((*strata)[i], vs.key_path("strata") + "[" + std::to_string(i) + "]");
                std::string name;
                std::size_t target = 0;
                e.read("stratum", name);
                e.read("target", target);
                e.finish();
                auto st = parse_stratum(name);
                if (!st) invalid(e.key_path("stratum"), "unknown stratum '" + name + "'");
                c.strata.push_back({*st, target});
            }
        }
        if (const auto* reviewers = vs.find("reviewers")) {
            if (!reviewers->is_array() || reviewers->size() != 2 || !(*reviewers)[0].is_string() ||
                !(*reviewers)[1].is_string()) {
                invalid(vs.key_path("reviewers"), "expected two reviewer ids");
            }
            c.reviewers = {(*reviewers)[0].get<std::string>(), (*reviewers)[1].get<std::string>()};
        }
    });
    s.section("api", [&](Section& as) {
        as.read("host", c.api.host);
        as.read("port", c.api.port);
        as.read("allow_remote_bind", c.api.allow_remote_bind);
    });
    s.finish();

    validate(c);
    return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw Error(ErrorCode::ConfigInvalid, "config file " + path.string() + " not found");
    return parse_config(jsonl::read_file(path));
}

void validate(const PipelineConfig& c) {
    try {
        validate(c.assessment_sampling);
        validate(c.extraction_sampling);
        if (c.corpus.source == CorpusSource::Synthetic) validate(c.corpus.synthetic);
    } catch (const Error& e) {
        throw Error(ErrorCode::ConfigInvalid, e.what());
    }
    if (c.corpus.source != CorpusSource::Synthetic && c.corpus.path.empty()) invalid("corpus.path", "required");
    if (c.corpus.source == CorpusSource::Manifest && c.corpus.text_dir.empty()) invalid("corpus.text_dir", "required");
    if (c.output_dir.empty()) invalid("output_dir", "must not be empty");
    if (c.concurrency == 0) invalid("concurrency", "must be at least 1");
    if (!(c.failure_threshold >= 0.0 && c.failure_threshold <= 1.0)) invalid("failure_threshold", "must be in [0, 1]");
    if (!(c.min_coverage >= 0.0 && c.min_coverage <= 1.0)) invalid("min_coverage", "must be in [0, 1]");
    if (c.retry.max_attempts < 1) invalid("retry.max_attempts", "must be at least 1");
    if (c.delimiters.open.empty() || c.delimiters.close.empty()) invalid("assessment.delimiters", "must not be empty");
    if (c.reviewers[0].empty() || c.reviewers[1].empty() || c.reviewers[0] == c.reviewers[1]) {
        invalid("validation.reviewers", "two distinct non-empty ids required");
    }
    std::set<Stratum> seen;
    for (const auto& s : c.strata) {
        if (!seen.insert(s.stratum).second) invalid("validation.strata", "stratum listed twice");
    }
    for (const auto* b : {&c.assessment_backend, &c.extraction_backend}) {
        if (b->kind == BackendKind::Remote && b->endpoint_url.empty() && std::getenv("COOP_ENDPOINT_URL") == nullptr) {
            invalid(b == &c.assessment_backend ? "assessment.backend.endpoint_url" : "extraction.backend.endpoint_url",
                    "required for remote backends");
        }
    }
    if (c.api.port < 0 || c.api.port > 65535) invalid("api.port", "out of range");
}

std::string to_json(const PipelineConfig& config) { return config_json(config, false).dump(2) + "\n"; }

std::string config_digest(const PipelineConfig& config) { return sha256_hex(config_json(config, true).dump()); }

std::string run_id(const PipelineConfig& config) { return "run-" + config_digest(config).substr(0, 12); }

}  // namespace coop
