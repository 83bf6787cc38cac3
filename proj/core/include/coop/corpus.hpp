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

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

namespace coop {

using Date = std::chrono::year_month_day;

/// Parses strict ISO "YYYY-MM-DD"; throws InvalidInput.
Date parse_date(std::string_view iso);
std::string format_date(const Date& date);

struct ReportMeta {
    std::string case_id;
    std::string report_id;
    std::string report_date;  // ISO date
    std::string language_tag = "de";
};

struct ReportRecord {
    std::string report_id;
    std::string case_id;
    Date report_date;
    std::string text;  // normalized
    std::size_t word_count = 0;
    std::string language_tag = "de";

    bool operator==(const ReportRecord&) const = default;
};

/// Normalizes `raw_text` and builds a record. Does not check uniqueness;
/// Corpus::ingest does.
ReportRecord ingest_report(std::string_view raw_text, const ReportMeta& meta);

/// Report store keyed by report_id. Inserts are serialized; reads are safe
/// once ingestion has finished.
class Corpus {
public:
    Corpus() = default;
    Corpus(Corpus&& other) noexcept;
    Corpus& operator=(Corpus&& other) noexcept;
    Corpus(const Corpus&) = delete;
    Corpus& operator=(const Corpus&) = delete;

    const ReportRecord& ingest(std::string_view raw_text, const ReportMeta& meta);
    const ReportRecord& insert(ReportRecord record);

    const ReportRecord* find(std::string_view report_id) const;
    bool contains(std::string_view report_id) const { return find(report_id) != nullptr; }
    std::size_t size() const;
    bool empty() const { return size() == 0; }

    /// Ordered by (case_id, report_id).
    std::vector<const ReportRecord*> ordered() const;

private:
    mutable std::mutex mu_;
    std::map<std::string, ReportRecord, std::less<>> by_id_;
};

struct CorpusStats {
    std::size_t n_reports = 0;
    std::size_t n_cases = 0;
    double mean_words = 0.0;
    double sd_words = 0.0;  // population SD
    /// reports-per-case -> number of cases
    std::map<std::size_t, std::size_t> reports_per_case;

    bool operator==(const CorpusStats&) const = default;
};

CorpusStats corpus_stats(const Corpus& corpus);
std::string stats_to_json(const CorpusStats& stats);

// Persistence. The normalized corpus is line-delimited JSON with fields
// report_id, case_id, report_date, text, word_count, language_tag.
void save_corpus(const Corpus& corpus, std::ostream& out);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);
Corpus load_corpus(std::istream& in);
Corpus load_corpus(const std::filesystem::path& path);

/// Raw input: one JSON object per line with exactly
/// {case_id, report_id, report_date, text}.
Corpus ingest_jsonl(std::istream& in);
Corpus ingest_jsonl(const std::filesystem::path& path);

/// Manifest (CSV with header, or .jsonl) listing case_id, report_id,
/// report_date and optionally `file`; texts are read from `text_dir`
/// (default file name `<report_id>.txt`). Files are read on `workers` threads.
Corpus ingest_manifest(const std::filesystem::path& manifest, const std::filesystem::path& text_dir,
                       std::size_t workers = 1);

}  // namespace coop
