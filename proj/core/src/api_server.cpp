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

#include "coop/api.hpp"

#include <thread>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "coop/error.hpp"
#include "coop/tables.hpp"
#include "jsonl.hpp"

namespace coop {

using jsonl::Json;

int http_status(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::NotInSample:
        case ErrorCode::UnknownItem: return 404;
        case ErrorCode::DuplicateAnnotation:
        case ErrorCode::UnresolvedRemaining:
        case ErrorCode::IncompleteAnnotations:
        case ErrorCode::IncompleteRun: return 409;
        case ErrorCode::Forbidden:
        case ErrorCode::UnknownReviewer: return 403;
        case ErrorCode::PassageNotInReport:
        case ErrorCode::NoteRequired:
        case ErrorCode::CategoryUnknown: return 422;
        case ErrorCode::InvalidInput: return 400;
        default: return 500;
    }
}

bool is_loopback_host(std::string_view host) noexcept {
    return host == "127.0.0.1" || host == "localhost" || host == "::1" || host.starts_with("127.");
}

namespace {

constexpr const char* kJson = "application/json";

void send(httplib::Response& res, int status, const Json& body) {
    res.status = status;
    res.set_content(body.dump(), kJson);
}

void send_error(httplib::Response& res, int status, std::string_view code, std::string_view message) {
    send(res, status, Json{{"error", Json{{"code", code}, {"message", message}}}});
}

Json annotation_json(const AnnotationRecord& r) {
    Json j{{"report_id", r.report_id},
           {"caregiver", to_string(r.caregiver)},
           {"reviewer_id", r.reviewer_id},
           {"category", to_token(r.category)},
           {"passages", r.passages},
           {"timestamp", r.timestamp}};
    j["justification"] = r.justification ? Json(*r.justification) : Json(nullptr);
    return j;
}

Json consensus_json(const ConsensusRecord& r) {
    return Json{{"report_id", r.report_id},
                {"caregiver", to_string(r.caregiver)},
                {"category", to_token(r.category)},
                {"source", to_string(r.source)},
                {"notes", r.notes}};
}

std::string body_string(const Json& body, const char* field, bool required = true) {
    auto it = body.find(field);
    if (it == body.end() || it->is_null()) {
        if (required) throw Error(ErrorCode::InvalidInput, std::string("missing field '") + field + "'");
        return {};
    }
    if (!it->is_string()) throw Error(ErrorCode::InvalidInput, std::string("field '") + field + "' must be a string");
    return it->get<std::string>();
}

CaregiverRole caregiver_of(std::string_view text) {
    auto role = parse_caregiver(text);
    if (!role) throw Error(ErrorCode::InvalidInput, "caregiver must be \"mother\" or \"father\"");
    return *role;
}

CooperationCategory category_of(std::string_view text) {
    auto cat = parse_category_token(text);
    if (!cat) throw Error(ErrorCode::CategoryUnknown, "unknown category '" + std::string(text) + "'");
    return *cat;
}

Json parse_body(const httplib::Request& req) {
    try {
        auto j = Json::parse(req.body);
        if (!j.is_object()) throw Error(ErrorCode::InvalidInput, "request body must be a JSON object");
        return j;
    } catch (const Json::parse_error&) {
        throw Error(ErrorCode::InvalidInput, "request body is not valid JSON");
    }
}

}  // namespace

struct ApiServer::Impl {
    ValidationStore& store;
    const Corpus& corpus;
    std::function<MetricsReport()> metrics;
    Options options;
    httplib::Server server;
    std::thread thread;
    int bound_port = -1;
    std::mutex consensus_mu;  // consensus phase is single-writer

    Impl(ValidationStore& s, const Corpus& c, std::function<MetricsReport()> m, Options o)
        : store(s), corpus(c), metrics(std::move(m)), options(std::move(o)) {
        routes();
    }

    using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

    static Handler guarded(Handler h) {
        return [h = std::move(h)](const httplib::Request& req, httplib::Response& res) {
            try {
                h(req, res);
            } catch (const Error& e) {
                send_error(res, http_status(e.code()), to_string(e.code()), e.what());
            } catch (const std::exception& e) {
                spdlog::error("{} {}: {}", req.method, req.path, e.what());
                send_error(res, 500, "Internal", e.what());
            }
        };
    }

    /// Reviewer id from the X-Reviewer-Id header; must be registered.
    std::string reviewer(const httplib::Request& req) const {
        const auto id = req.get_header_value("X-Reviewer-Id");
        if (id.empty()) throw Error(ErrorCode::UnknownReviewer, "X-Reviewer-Id header is required");
        const auto& rs = store.reviewers();
        if (id != rs[0] && id != rs[1]) throw Error(ErrorCode::UnknownReviewer, "reviewer '" + id + "' is not registered");
        return id;
    }

    Json sample_item(const SampleItem& item) const {
        Json j{{"report_id", item.report_id}, {"stratum", to_string(item.stratum)}, {"text", store.report_text(item.report_id)}};
        if (const auto* rec = corpus.find(item.report_id)) {
            j["case_id"] = rec->case_id;
            j["report_date"] = format_date(rec->report_date);
            j["word_count"] = rec->word_count;
        }
        return j;
    }

    void routes() {
        server.Get("/sample", guarded([this](const httplib::Request&, httplib::Response& res) {
            Json items = Json::array();
            for (const auto& item : store.sample()) items.push_back(sample_item(item));
            send(res, 200,
                 Json{{"items", items},
                      {"reviewers", store.reviewers()},
                      {"consensus_open", store.consensus_open()}});
        }));

        server.Get(R"(/reports/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
            const std::string id = req.matches[1];
            const auto it = std::find_if(store.sample().begin(), store.sample().end(),
                                         [&](const SampleItem& s) { return s.report_id == id; });
            if (it == store.sample().end()) throw Error(ErrorCode::NotInSample, "report '" + id + "' is not sampled");
            send(res, 200, sample_item(*it));
        }));

        server.Get("/annotations", guarded([this](const httplib::Request& req, httplib::Response& res) {
            const auto requester = reviewer(req);
            const auto report_id = req.get_param_value("report_id");
            const auto caregiver = req.get_param_value("caregiver");
            const auto author = req.get_param_value("reviewer");
            if (!author.empty() && author != requester && !store.consensus_open()) {
                throw Error(ErrorCode::Forbidden, "annotations of other reviewers are hidden until the consensus phase");
            }
            if (!report_id.empty() && !store.in_sample(report_id)) {
                throw Error(ErrorCode::NotInSample, "report '" + report_id + "' is not sampled");
            }
            std::optional<CaregiverRole> role;
            if (!caregiver.empty()) role = caregiver_of(caregiver);
            Json items = Json::array();
            for (const auto& a : store.visible_annotations(requester)) {
                if (!report_id.empty() && a.report_id != report_id) continue;
                if (role && a.caregiver != *role) continue;
                if (!author.empty() && a.reviewer_id != author) continue;
                items.push_back(annotation_json(a));
            }
            send(res, 200, Json{{"items", items}});
        }));

        server.Put("/annotations", guarded([this](const httplib::Request& req, httplib::Response& res) {
            const auto requester = reviewer(req);
            const auto body = parse_body(req);
            AnnotationRecord rec;
            rec.reviewer_id = requester;
            if (auto claimed = body_string(body, "reviewer_id", false); !claimed.empty() && claimed != requester) {
                throw Error(ErrorCode::Forbidden, "reviewer_id does not match X-Reviewer-Id");
            }
            rec.report_id = body_string(body, "report_id");
            rec.caregiver = caregiver_of(body_string(body, "caregiver"));
            rec.category = category_of(body_string(body, "category"));
            if (auto it = body.find("passages"); it != body.end() && !it->is_null()) {
                if (!it->is_array()) throw Error(ErrorCode::InvalidInput, "passages must be an array of strings");
                for (const auto& p : *it) {
                    if (!p.is_string()) throw Error(ErrorCode::InvalidInput, "passages must be an array of strings");
                    rec.passages.push_back(p.get<std::string>());
                }
            }
            if (auto j = body_string(body, "justification", false); !j.empty()) rec.justification = j;
            send(res, 201, annotation_json(store.record_annotation(std::move(rec))));
        }));

        server.Get("/disagreements", guarded([this](const httplib::Request& req, httplib::Response& res) {
            auto scheme = parse_scheme(req.get_param_value("scheme"));
            if (!scheme) throw Error(ErrorCode::InvalidInput, "scheme must be \"three\" or \"binary\"");
            const auto list = store.list_disagreements(*scheme);
            Json incomplete = Json::array();
            for (const auto& k : list.incomplete) {
                incomplete.push_back(Json{{"report_id", k.report_id}, {"caregiver", to_string(k.caregiver)}});
            }
            if (!store.consensus_open()) {
                send(res, 409,
                     Json{{"error", Json{{"code", "IncompleteAnnotations"},
                                         {"message", "consensus opens once every item has both annotations"}}},
                          {"incomplete", incomplete}});
                return;
            }
            const auto& rs = store.reviewers();
            Json items = Json::array();
            for (const auto& d : list.items) {
                items.push_back(Json{{"report_id", d.report_id},
                                     {"caregiver", to_string(d.caregiver)},
                                     {"categories", Json{{rs[0], to_token(d.categories[0])}, {rs[1], to_token(d.categories[1])}}}});
            }
            send(res, 200, Json{{"scheme", to_string(*scheme)}, {"items", items}, {"incomplete", incomplete}});
        }));

        server.Get("/consensus", guarded([this](const httplib::Request&, httplib::Response& res) {
            Json decisions = Json::array();
            for (const auto& d : store.decisions()) decisions.push_back(consensus_json(d));
            send(res, 200,
                 Json{{"decisions", decisions},
                      {"unresolved", store.unresolved_count()},
                      {"consensus_open", store.consensus_open()}});
        }));

        server.Post("/consensus", guarded([this](const httplib::Request& req, httplib::Response& res) {
            const auto body = parse_body(req);
            const ItemKey key{body_string(body, "report_id"), caregiver_of(body_string(body, "caregiver"))};
            const auto category = category_of(body_string(body, "category"));
            std::lock_guard lock(consensus_mu);
            send(res, 201, consensus_json(store.resolve_consensus(key, category, body_string(body, "notes", false))));
        }));

        server.Post("/benchmark", guarded([this](const httplib::Request&, httplib::Response& res) {
            std::lock_guard lock(consensus_mu);
            const auto records = store.export_benchmark();
            if (!options.benchmark_path.empty()) {
                std::filesystem::create_directories(std::filesystem::path(options.benchmark_path).parent_path());
                jsonl::write_file_atomic(options.benchmark_path, benchmark_csv(records));
            }
            Json items = Json::array();
            for (const auto& r : records) items.push_back(consensus_json(r));
            send(res, 200, Json{{"finalized", true}, {"items", items}});
        }));

        server.Get("/benchmark", guarded([this](const httplib::Request&, httplib::Response& res) {
            const auto records = store.export_benchmark();
            res.status = 200;
            res.set_content(benchmark_csv(records), "text/csv");
        }));

        server.Get("/metrics", guarded([this](const httplib::Request&, httplib::Response& res) {
            res.status = 200;
            res.set_content(metrics_json(metrics()), kJson);
        }));
    }
};

ApiServer::ApiServer(ValidationStore& store, const Corpus& corpus, std::function<MetricsReport()> metrics, Options options)
    : impl_(std::make_unique<Impl>(store, corpus, std::move(metrics), std::move(options))) {}

ApiServer::~ApiServer() { stop(); }

void ApiServer::bind() {
    const auto& o = impl_->options;
    if (!o.allow_remote_bind && !is_loopback_host(o.host)) {
        throw Error(ErrorCode::ConfigInvalid, "refusing to bind " + o.host + " without allow_remote_bind");
    }
    auto& s = impl_->server;
    impl_->bound_port = o.port == 0 ? s.bind_to_any_port(o.host) : (s.bind_to_port(o.host, o.port) ? o.port : -1);
    if (impl_->bound_port < 0) throw Error(ErrorCode::IoError, "cannot bind " + o.host + ":" + std::to_string(o.port));
}

int ApiServer::start() {
    bind();
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return impl_->bound_port;
}

void ApiServer::run() {
    bind();
    spdlog::info("serving on http://{}:{}", impl_->options.host, impl_->bound_port);
    impl_->server.listen_after_bind();
}

void ApiServer::stop() {
    if (!impl_) return;
    impl_->server.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

int ApiServer::port() const { return impl_->bound_port; }

}  // namespace coop
