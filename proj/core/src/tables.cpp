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

#include "coop/tables.hpp"

#include <cstdio>
#include <sstream>

#include "coop/error.hpp"
#include "csv.hpp"
#include "jsonl.hpp"

namespace coop {

using jsonl::Json;

std::string format_fixed(double value, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
    std::string s = buf;
    if (s.starts_with("-") && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
    return s;
}

std::string table2_csv(const MetricsReport& report) {
    std::string out = "block,n,accuracy,precision,recall,f1\n";
    for (const auto& b : report.blocks) {
        out += b.name + "," + std::to_string(b.n) + "," + format_fixed(b.stats.accuracy, 2) + "," +
               format_fixed(b.stats.precision_weighted, 2) + "," + format_fixed(b.stats.recall_weighted, 2) + "," +
               format_fixed(b.stats.f1_weighted, 2) + "\n";
    }
    return out;
}

std::string table3_csv(const MetricsReport& report) {
    std::string out = "block,truth,predicted_lack,predicted_no_documented_lack\n";
    for (const auto& b : report.blocks) {
        const auto& c = b.confusion;
        out += b.name + ",lack," + std::to_string(c.tp) + "," + std::to_string(c.fn) + "\n";
        out += b.name + ",no_documented_lack," + std::to_string(c.fp) + "," + std::to_string(c.tn) + "\n";
    }
    return out;
}

std::map<std::string, ConfusionMatrix> parse_table3_csv(std::string_view csv_text) {
    std::map<std::string, ConfusionMatrix> out;
    std::istringstream in{std::string(csv_text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = csv::parse_line(line);
        if (line_no == 1) continue;
        if (f.size() != 4) throw Error(ErrorCode::InvalidInput, "table 3 line " + std::to_string(line_no));
        std::uint64_t lack = 0;
        std::uint64_t no_lack = 0;
        try {
            lack = std::stoull(f[2]);
            no_lack = std::stoull(f[3]);
        } catch (const std::exception&) {
            throw Error(ErrorCode::InvalidInput, "table 3 line " + std::to_string(line_no) + ": bad count");
        }
        auto& cm = out[f[0]];
        if (f[1] == "lack") {
            cm.tp = lack;
            cm.fn = no_lack;
        } else if (f[1] == "no_documented_lack") {
            cm.fp = lack;
            cm.tn = no_lack;
        } else {
            throw Error(ErrorCode::InvalidInput, "table 3 line " + std::to_string(line_no) + ": bad truth label");
        }
    }
    return out;
}

std::string table4_csv(const MetricsReport& report) {
    std::string out = "block,rater_a,rater_b,percent_agreement,kappa\n";
    for (const auto& b : report.blocks) {
        const auto& t = b.raters;
        for (std::size_t i = 0; i < t.raters.size(); ++i) {
            for (std::size_t j = i + 1; j < t.raters.size(); ++j) {
                out += b.name + "," + csv::escape(t.raters[i]) + "," + csv::escape(t.raters[j]) + "," +
                       format_fixed(t.agreement[i][j], 2) + "," + format_fixed(t.kappa[i][j], 2) + "\n";
            }
        }
    }
    return out;
}

namespace {

constexpr std::array<std::string_view, 3> kRowNames{"mother", "father", "either"};

Json level_json(const LevelCount& c) {
    return Json{{"n_lack", c.n_lack}, {"n_evaluated", c.n_evaluated}, {"percent", c.percent()}};
}

Json rater_table_json(const MultiRaterTable& t) {
    return Json{{"raters", t.raters}, {"agreement", t.agreement}, {"kappa", t.kappa}};
}

Json stats_json(const AgreementStats& s) {
    auto cls = [](const ClassMetrics& m) {
        return Json{{"precision", m.precision},         {"recall", m.recall},
                    {"f1", m.f1},                       {"support", m.support},
                    {"precision_defined", m.precision_defined}, {"recall_defined", m.recall_defined},
                    {"f1_defined", m.f1_defined}};
    };
    return Json{{"accuracy", s.accuracy},
                {"precision_weighted", s.precision_weighted},
                {"recall_weighted", s.recall_weighted},
                {"f1_weighted", s.f1_weighted},
                {"percent_agreement", s.percent_agreement},
                {"kappa", s.kappa},
                {"kappa_band", to_string(s.kappa_band)},
                {"kappa_degenerate", s.kappa_degenerate},
                {"sensitivity", s.sensitivity},
                {"specificity", s.specificity},
                {"false_positive_rate", s.false_positive_rate},
                {"classes", Json{{"lack", cls(s.lack)}, {"no_documented_lack", cls(s.no_lack)}}}};
}

}  // namespace

std::string table5_csv(const CorpusSummary& summary) {
    std::string out = "row,reports_n,reports_percent,cases_n,cases_percent\n";
    for (std::size_t i = 0; i < kRowNames.size(); ++i) {
        const auto& r = summary.reports[i];
        const auto& c = summary.cases[i];
        out += std::string(kRowNames[i]) + "," + std::to_string(r.n_lack) + "," + format_fixed(r.percent(), 1) + "," +
               std::to_string(c.n_lack) + "," + format_fixed(c.percent(), 1) + "\n";
    }
    out += "total," + std::to_string(summary.total_reports) + ",100.0," + std::to_string(summary.total_cases) + ",100.0\n";
    return out;
}

std::string summary_json(const CorpusSummary& summary, std::string_view run_id) {
    Json reports = Json::object();
    Json cases = Json::object();
    for (std::size_t i = 0; i < kRowNames.size(); ++i) {
        reports[std::string(kRowNames[i])] = level_json(summary.reports[i]);
        cases[std::string(kRowNames[i])] = level_json(summary.cases[i]);
    }
    Json j{{"total_reports", summary.total_reports},
           {"total_cases", summary.total_cases},
           {"missing_pairs", summary.missing_pairs},
           {"coverage", summary.coverage},
           {"reports", reports},
           {"cases", cases}};
    if (!run_id.empty()) j["run_id"] = run_id;
    return j.dump(2) + "\n";
}

std::string metrics_json(const MetricsReport& report, std::string_view run_id) {
    Json blocks = Json::array();
    for (const auto& b : report.blocks) {
        const auto& c = b.confusion;
        const auto& s = b.sensitivity;
        blocks.push_back(Json{
            {"name", b.name},
            {"n", b.n},
            {"confusion", Json{{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}, {"tn", c.tn}}},
            {"stats", stats_json(b.stats)},
            {"raters", rater_table_json(b.raters)},
            {"raters_three_category", rater_table_json(b.raters_three_category)},
            {"sensitivity", Json{{"three_category_accuracy", s.three_category_accuracy},
                                 {"three_category_kappa", s.three_category_kappa},
                                 {"binary_accuracy", s.binary.accuracy},
                                 {"binary_kappa", s.binary.kappa},
                                 {"delta_accuracy", s.delta_accuracy},
                                 {"delta_kappa", s.delta_kappa}}}});
    }
    Json j{{"blocks", blocks}};
    if (!run_id.empty()) j["run_id"] = run_id;
    return j.dump(2) + "\n";
}

}  // namespace coop
