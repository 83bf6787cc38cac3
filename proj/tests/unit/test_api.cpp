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

#include <httplib.h>

#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "coop/api.hpp"
#include "coop/corpus.hpp"
#include "coop/error.hpp"
#include "coop/sampling.hpp"
#include "coop/tables.hpp"
#include "test_support.hpp"

using namespace coop;
using coop::testing::read_text;
using coop::testing::TempDir;
using Json = nlohmann::json;

namespace {

constexpr const char* kText = "The mother missed the meeting. The father called back promptly.";

struct ApiFixture {
    TempDir dir;
    Corpus corpus;
    std::unique_ptr<ValidationStore> store;
    std::unique_ptr<ApiServer> server;
    std::unique_ptr<httplib::Client> client;

    ApiFixture() {
        std::vector<SampleItem> sample;
        for (int i = 0; i < 2; ++i) {
            const auto id = "s" + std::to_string(i);
            corpus.ingest(kText, {"c" + std::to_string(i), id, "2012-04-0" + std::to_string(i + 1), "en"});
            sample.push_back({id, i == 0 ? Stratum::BothLack : Stratum::NeitherLack});
        }
        corpus.ingest("other", {"c9", "x9", "2012-05-01", "en"});
        store = std::make_unique<ValidationStore>(sample, corpus, std::array<std::string, 2>{"ehr1", "ehr2"},
                                                  dir / "validation");
        ApiServer::Options opt;
        opt.benchmark_path = (dir / "exports" / "benchmark.csv").string();
        server = std::make_unique<ApiServer>(*store, corpus, [this] { return metrics(); }, opt);
        const int port = server->start();
        client = std::make_unique<httplib::Client>("127.0.0.1", port);
    }

    MetricsReport metrics() const {
        std::vector<RatedItem> items;
        for (const auto& b : store->export_benchmark()) {
            const ItemKey key{b.report_id, b.caregiver};
            items.push_back({b.report_id, b.caregiver, b.category,
                             store->annotation(key, "ehr1", "ehr1")->category,
                             store->annotation(key, "ehr2", "ehr2")->category, b.category});
        }
        return build_metrics_report(items);
    }

    httplib::Result put_annotation(const std::string& reviewer, Json body) {
        return client->Put("/annotations", {{"X-Reviewer-Id", reviewer}}, body.dump(), "application/json");
    }

    void annotate_all() {
        for (const char* id : {"s0", "s1"}) {
            for (const char* role : {"mother", "father"}) {
                for (const char* reviewer : {"ehr1", "ehr2"}) {
                    const bool split = std::string(id) == "s1" && std::string(role) == "father" &&
                                       std::string(reviewer) == "ehr2";
                    const auto res = put_annotation(
                        reviewer, {{"report_id", id}, {"caregiver", role},
                                   {"category", split ? "no_evidence" : "lack_of_cooperation"},
                                   {"passages", {"The mother missed the meeting."}}});
                    REQUIRE(res);
                    REQUIRE(res->status == 201);
                }
            }
        }
    }
};

Json body_of(const httplib::Result& res) {
    REQUIRE(res);
    return Json::parse(res->body);
}

std::string error_code(const httplib::Result& res) { return body_of(res)["error"]["code"].get<std::string>(); }

}  // namespace

TEST_CASE("status mapping") {
    CHECK(http_status(ErrorCode::NotInSample) == 404);
    CHECK(http_status(ErrorCode::DuplicateAnnotation) == 409);
    CHECK(http_status(ErrorCode::UnresolvedRemaining) == 409);
    CHECK(http_status(ErrorCode::Forbidden) == 403);
    CHECK(http_status(ErrorCode::PassageNotInReport) == 422);
    CHECK(http_status(ErrorCode::InvalidInput) == 400);
    CHECK(http_status(ErrorCode::IoError) == 500);
    CHECK(is_loopback_host("127.0.0.1"));
    CHECK(is_loopback_host("localhost"));
    CHECK_FALSE(is_loopback_host("0.0.0.0"));
}

TEST_CASE("non-loopback binds need an explicit opt-in") {
    Corpus corpus;
    corpus.ingest(kText, {"c0", "s0", "2012-04-01", "en"});
    ValidationStore store({{"s0", Stratum::BothLack}}, corpus, {"a", "b"});
    ApiServer::Options opt;
    opt.host = "0.0.0.0";
    ApiServer server(store, corpus, [] { return MetricsReport{}; }, opt);
    try {
        server.start();
        FAIL("expected ConfigInvalid");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ConfigInvalid);
    }
}

TEST_CASE("sample and report endpoints") {
    ApiFixture f;
    const auto sample = body_of(f.client->Get("/sample"));
    REQUIRE(sample["items"].size() == 2);
    CHECK(sample["items"][0]["report_id"] == "s0");
    CHECK(sample["items"][0]["stratum"] == "both_lack");
    CHECK(sample["items"][0]["text"] == kText);
    CHECK(sample["items"][0]["case_id"] == "c0");
    CHECK(sample["items"][0]["report_date"] == "2012-04-01");
    CHECK(sample["reviewers"] == Json::array({"ehr1", "ehr2"}));
    CHECK(sample["consensus_open"] == false);

    CHECK(body_of(f.client->Get("/reports/s1"))["stratum"] == "neither_lack");
    const auto missing = f.client->Get("/reports/x9");
    CHECK(missing->status == 404);
    CHECK(error_code(missing) == "NotInSample");
}

TEST_CASE("annotation endpoint validation") {
    ApiFixture f;
    const Json good{{"report_id", "s0"}, {"caregiver", "mother"}, {"category", "no_evidence"}, {"passages", Json::array()}};
    auto res = f.put_annotation("ehr1", good);
    CHECK(res->status == 201);
    CHECK(body_of(res)["reviewer_id"] == "ehr1");
    CHECK_FALSE(body_of(res)["timestamp"].get<std::string>().empty());

    CHECK(f.put_annotation("ehr1", good)->status == 409);
    CHECK(f.put_annotation("nobody", good)->status == 403);
    CHECK(f.client->Put("/annotations", good.dump(), "application/json")->status == 403);

    auto other = good;
    other["reviewer_id"] = "ehr1";
    CHECK(f.put_annotation("ehr2", other)->status == 403);

    auto not_sampled = good;
    not_sampled["report_id"] = "x9";
    CHECK(f.put_annotation("ehr2", not_sampled)->status == 404);

    auto bad_passage = good;
    bad_passage["passages"] = {"nowhere in the text"};
    res = f.put_annotation("ehr2", bad_passage);
    CHECK(res->status == 422);
    CHECK(error_code(res) == "PassageNotInReport");

    auto bad_category = good;
    bad_category["category"] = "maybe";
    CHECK(f.put_annotation("ehr2", bad_category)->status == 422);

    auto bad_role = good;
    bad_role["caregiver"] = "aunt";
    CHECK(f.put_annotation("ehr2", bad_role)->status == 400);

    CHECK(f.client->Put("/annotations", {{"X-Reviewer-Id", "ehr2"}}, "{", "application/json")->status == 400);
}

TEST_CASE("reviewers cannot see each other before consensus") {
    ApiFixture f;
    f.put_annotation("ehr1", {{"report_id", "s0"}, {"caregiver", "mother"}, {"category", "no_evidence"}});
    const httplib::Headers as_ehr2{{"X-Reviewer-Id", "ehr2"}};
    CHECK(body_of(f.client->Get("/annotations", as_ehr2))["items"].empty());
    CHECK(f.client->Get("/annotations?reviewer=ehr1", as_ehr2)->status == 403);
    CHECK(body_of(f.client->Get("/annotations", {{"X-Reviewer-Id", "ehr1"}}))["items"].size() == 1);
    CHECK(f.client->Get("/annotations")->status == 403);

    const auto early = f.client->Get("/disagreements");
    CHECK(early->status == 409);
    CHECK(body_of(early)["incomplete"].size() == 4);
    CHECK(f.client->Post("/consensus", Json{{"report_id", "s0"}, {"caregiver", "mother"}, {"category", "no_evidence"}}.dump(),
                         "application/json")
              ->status == 409);
    CHECK(f.client->Post("/benchmark", "", "application/json")->status == 409);
}

TEST_CASE("full consensus pass over HTTP") {
    ApiFixture f;
    f.annotate_all();
    CHECK(body_of(f.client->Get("/sample"))["consensus_open"] == true);
    const httplib::Headers as_ehr2{{"X-Reviewer-Id", "ehr2"}};
    CHECK(body_of(f.client->Get("/annotations?report_id=s0&caregiver=mother", as_ehr2))["items"].size() == 2);

    const auto dis = body_of(f.client->Get("/disagreements?scheme=three"));
    REQUIRE(dis["items"].size() == 1);
    CHECK(dis["items"][0]["report_id"] == "s1");
    CHECK(dis["items"][0]["categories"]["ehr1"] == "lack_of_cooperation");
    CHECK(dis["items"][0]["categories"]["ehr2"] == "no_evidence");
    CHECK(f.client->Get("/disagreements?scheme=four")->status == 400);

    auto res = f.client->Post("/benchmark", "", "application/json");
    CHECK(res->status == 409);
    CHECK(error_code(res) == "UnresolvedRemaining");

    const Json override_agreed{{"report_id", "s0"}, {"caregiver", "mother"}, {"category", "no_evidence"}};
    res = f.client->Post("/consensus", override_agreed.dump(), "application/json");
    CHECK(res->status == 422);
    CHECK(error_code(res) == "NoteRequired");

    res = f.client->Post("/consensus",
                         Json{{"report_id", "s1"}, {"caregiver", "father"}, {"category", "lack_of_cooperation"},
                              {"notes", "documented refusal"}}
                             .dump(),
                         "application/json");
    CHECK(res->status == 201);
    CHECK(body_of(res)["source"] == "resolved_by_discussion");
    CHECK(body_of(f.client->Get("/consensus"))["unresolved"] == 0);
    CHECK(f.client->Post("/consensus", Json{{"report_id", "zz"}, {"caregiver", "father"}, {"category", "no_evidence"}}.dump(),
                         "application/json")
              ->status == 404);

    res = f.client->Post("/benchmark", "", "application/json");
    CHECK(res->status == 200);
    CHECK(body_of(res)["items"].size() == 4);
    const auto csv = read_text(f.dir / "exports" / "benchmark.csv");
    CHECK(f.client->Get("/benchmark")->body == csv);
    CHECK(csv == benchmark_csv(f.store->export_benchmark()));

    const auto metrics = body_of(f.client->Get("/metrics"));
    CHECK(metrics.dump() == Json::parse(metrics_json(f.metrics())).dump());
}
