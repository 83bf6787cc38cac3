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

#include "coop/corpus.hpp"

#include <algorithm>
#include <atomic>
#include <tuple>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "coop/error.hpp"
#include "coop/text.hpp"
#include "csv.hpp"
#include "jsonl.hpp"

namespace coop {

using jsonl::Json;

Date parse_date(std::string_view iso) {
    auto bad = [&] { return Error(ErrorCode::InvalidInput, "invalid date '" + std::string(iso) + "'"); };
    if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') throw bad();
    int y = 0;
    unsigned m = 0;
    unsigned d = 0;
    auto parse = [&](std::string_view part, auto& value) {
        auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), value);
        if (ec != std::errc{} || ptr != part.data() + part.size()) throw bad();
    };
    parse(iso.substr(0, 4), y);
    parse(iso.substr(5, 2), m);
    parse(iso.substr(8, 2), d);
    Date date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!date.ok()) throw bad();
    return date;
}

std::string format_date(const Date& date) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(date.year()),
                  static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
    return buf;
}

ReportRecord ingest_report(std::string_view raw_text, const ReportMeta& meta) {
    if (meta.case_id.empty()) throw Error(ErrorCode::InvalidInput, "case_id is empty");
    if (meta.report_id.empty()) throw Error(ErrorCode::InvalidInput, "report_id is empty");
    if (!text::is_valid_utf8(raw_text)) {
        throw Error(ErrorCode::InvalidEncoding, "report " + meta.report_id + " is not valid UTF-8");
    }
    ReportRecord record;
    record.report_id = meta.report_id;
    record.case_id = meta.case_id;
    record.report_date = parse_date(meta.report_date);
    record.text = text::normalize(raw_text);
    if (record.text.empty()) {
        throw Error(ErrorCode::EmptyDocument, "report " + meta.report_id + " is empty after normalization");
    }
    record.word_count = text::word_count(record.text);
    record.language_tag = meta.language_tag;
    return record;
}

Corpus::Corpus(Corpus&& other) noexcept {
    std::lock_guard lock(other.mu_);
    by_id_ = std::move(other.by_id_);
}

Corpus& Corpus::operator=(Corpus&& other) noexcept {
    if (this != &other) {
        std::scoped_lock lock(mu_, other.mu_);
        by_id_ = std::move(other.by_id_);
    }
    return *this;
}

const ReportRecord& Corpus::ingest(std::string_view raw_text, const ReportMeta& meta) {
    return insert(ingest_report(raw_text, meta));
}

const ReportRecord& Corpus::insert(ReportRecord record) {
    if (record.case_id.empty()) throw Error(ErrorCode::InvalidInput, "case_id is empty");
    std::lock_guard lock(mu_);
    auto [it, inserted] = by_id_.try_emplace(record.report_id, std::move(record));
    if (!inserted) throw Error(ErrorCode::DuplicateReportId, "report_id '" + it->first + "' already in corpus");
    return it->second;
}

const ReportRecord* Corpus::find(std::string_view report_id) const {
    std::lock_guard lock(mu_);
    auto it = by_id_.find(report_id);
    return it == by_id_.end() ? nullptr : &it->second;
}

std::size_t Corpus::size() const {
    std::lock_guard lock(mu_);
    return by_id_.size();
}

std::vector<const ReportRecord*> Corpus::ordered() const {
    std::lock_guard lock(mu_);
    std::vector<const ReportRecord*> out;
    out.reserve(by_id_.size());
    for (const auto& [id, rec] : by_id_) out.push_back(&rec);
    std::sort(out.begin(), out.end(), [](const ReportRecord* a, const ReportRecord* b) {
        return std::tie(a->case_id, a->report_id) < std::tie(b->case_id, b->report_id);
    });
    return out;
}

CorpusStats corpus_stats(const Corpus& corpus) {
    const auto records = corpus.ordered();
    if (records.empty()) throw Error(ErrorCode::EmptyCorpus, "corpus has no reports");

    CorpusStats stats;
    stats.n_reports = records.size();
    std::map<std::string_view, std::size_t> per_case;
    double sum = 0.0;
    for (const auto* r : records) {
        sum += static_cast<double>(r->word_count);
        ++per_case[r->case_id];
    }
    stats.n_cases = per_case.size();
    stats.mean_words = sum / static_cast<double>(stats.n_reports);
    double sq = 0.0;
    for (const auto* r : records) {
        const double d = static_cast<double>(r->word_count) - stats.mean_words;
        sq += d * d;
    }
    stats.sd_words = std::sqrt(sq / static_cast<double>(stats.n_reports));
    for (const auto& [id, n] : per_case) ++stats.reports_per_case[n];
    return stats;
}

std::string stats_to_json(const CorpusStats& stats) {
    Json hist = Json::object();
    for (const auto& [k, v] : stats.reports_per_case) hist[std::to_string(k)] = v;
    Json j{{"n_reports", stats.n_reports},
           {"n_cases", stats.n_cases},
           {"mean_words", stats.mean_words},
           {"sd_words", stats.sd_words},
           {"reports_per_case", hist}};
    return j.dump(2) + "\n";
}

namespace {

Json record_to_json(const ReportRecord& r) {
    return Json{{"report_id", r.report_id},   {"case_id", r.case_id},
                {"report_date", format_date(r.report_date)}, {"text", r.text},
                {"word_count", r.word_count}, {"language_tag", r.language_tag}};
}

}  // namespace

void save_corpus(const Corpus& corpus, std::ostream& out) {
    for (const auto* r : corpus.ordered()) out << record_to_json(*r).dump() << '\n';
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
    std::ostringstream ss;
    save_corpus(corpus, ss);
    jsonl::write_file_atomic(path, ss.str());
}

Corpus load_corpus(std::istream& in) {
    Corpus corpus;
    jsonl::for_each(in, [&](const Json& obj, std::size_t line) {
        ReportRecord r;
        r.report_id = jsonl::require_string(obj, "report_id", line);
        r.case_id = jsonl::require_string(obj, "case_id", line);
        r.report_date = parse_date(jsonl::require_string(obj, "report_date", line));
        r.text = jsonl::require_string(obj, "text", line);
        r.language_tag = obj.value("language_tag", std::string("de"));
        r.word_count = text::word_count(r.text);
        if (obj.contains("word_count") && obj["word_count"].get<std::size_t>() != r.word_count) {
            throw Error(ErrorCode::InvalidInput,
                        "line " + std::to_string(line) + ": word_count does not match text");
        }
        if (r.text.empty()) throw Error(ErrorCode::EmptyDocument, "report " + r.report_id + " has no text");
        corpus.insert(std::move(r));
    });
    return corpus;
}

Corpus load_corpus(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    return load_corpus(in);
}

Corpus ingest_jsonl(std::istream& in) {
    static const std::set<std::string> kFields{"case_id", "report_id", "report_date", "text"};
    Corpus corpus;
    jsonl::for_each(in, [&](const Json& obj, std::size_t line) {
        for (const auto& [key, value] : obj.items()) {
            if (!kFields.contains(key)) {
                throw Error(ErrorCode::InvalidInput,
                            "line " + std::to_string(line) + ": unexpected field '" + key + "'");
            }
        }
        ReportMeta meta;
        meta.case_id = jsonl::require_string(obj, "case_id", line);
        meta.report_id = jsonl::require_string(obj, "report_id", line);
        meta.report_date = jsonl::require_string(obj, "report_date", line);
        corpus.ingest(jsonl::require_string(obj, "text", line), meta);
    });
    return corpus;
}

Corpus ingest_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    return ingest_jsonl(in);
}

namespace {

struct ManifestRow {
    ReportMeta meta;
    std::string file;
};

std::vector<ManifestRow> read_manifest(const std::filesystem::path& manifest) {
    std::vector<ManifestRow> rows;
    if (manifest.extension() == ".jsonl" || manifest.extension() == ".ndjson") {
        jsonl::for_each_file(manifest, [&](const Json& obj, std::size_t line) {
            ManifestRow row;
            row.meta.case_id = jsonl::require_string(obj, "case_id", line);
            row.meta.report_id = jsonl::require_string(obj, "report_id", line);
            row.meta.report_date = jsonl::require_string(obj, "report_date", line);
            row.file = obj.value("file", row.meta.report_id + ".txt");
            rows.push_back(std::move(row));
        });
        return rows;
    }

    std::ifstream in(manifest, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + manifest.string());
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::InvalidInput, "manifest has no header");
    const auto header = csv::parse_line(line);
    auto column = [&](std::string_view name) -> std::ptrdiff_t {
        auto it = std::find(header.begin(), header.end(), name);
        return it == header.end() ? -1 : it - header.begin();
    };
    const auto c_case = column("case_id");
    const auto c_report = column("report_id");
    const auto c_date = column("report_date");
    const auto c_file = column("file");
    if (c_case < 0 || c_report < 0 || c_date < 0) {
        throw Error(ErrorCode::InvalidInput, "manifest header needs case_id, report_id, report_date");
    }
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        auto fields = csv::parse_line(line);
        if (fields.size() != header.size()) {
            throw Error(ErrorCode::InvalidInput, "manifest line " + std::to_string(line_no) + ": expected " +
                                                     std::to_string(header.size()) + " fields");
        }
        ManifestRow row;
        row.meta.case_id = fields[c_case];
        row.meta.report_id = fields[c_report];
        row.meta.report_date = fields[c_date];
        row.file = c_file >= 0 && !fields[c_file].empty() ? fields[c_file] : row.meta.report_id + ".txt";
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

Corpus ingest_manifest(const std::filesystem::path& manifest, const std::filesystem::path& text_dir,
                       std::size_t workers) {
    const auto rows = read_manifest(manifest);
    Corpus corpus;
    std::atomic<std::size_t> next{0};
    std::mutex err_mu;
    std::exception_ptr first_error;

    auto work = [&] {
        for (std::size_t i = next++; i < rows.size(); i = next++) {
            try {
                const auto content = jsonl::read_file(text_dir / rows[i].file);
                corpus.ingest(content, rows[i].meta);
            } catch (...) {
                std::lock_guard lock(err_mu);
                if (!first_error) first_error = std::current_exception();
                next = rows.size();
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 1; w < std::max<std::size_t>(1, workers); ++w) pool.emplace_back(work);
        work();
    }
    if (first_error) std::rethrow_exception(first_error);
    return corpus;
}

}  // namespace coop
