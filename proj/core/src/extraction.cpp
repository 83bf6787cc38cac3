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

#include "coop/extraction.hpp"

#include "coop/digest.hpp"
#include "coop/error.hpp"
#include "coop/text.hpp"
#include "jsonl.hpp"

namespace coop {

using jsonl::Json;

std::string_view to_string(ExtractionMethod method) noexcept {
    return method == ExtractionMethod::Structured ? "structured" : "fallback";
}

std::string to_json_line(const ExtractionResult& r, std::string_view key) {
    return Json{{"key", key},
                {"report_id", r.report_id},
                {"caregiver", to_string(r.caregiver)},
                {"category", to_token(r.category)},
                {"extractor_model", r.extractor_model},
                {"raw_json", r.raw_json},
                {"method", to_string(r.method)}}
        .dump();
}

ExtractionResult extraction_from_json(std::string_view line) {
    const auto j = Json::parse(line);
    ExtractionResult r;
    r.report_id = j.at("report_id").get<std::string>();
    auto role = parse_caregiver(j.at("caregiver").get<std::string>());
    auto cat = parse_category_token(j.at("category").get<std::string>());
    if (!role || !cat) throw Error(ErrorCode::InvalidInput, "bad caregiver/category in extraction record");
    r.caregiver = *role;
    r.category = *cat;
    r.extractor_model = j.value("extractor_model", "");
    r.raw_json = j.value("raw_json", "");
    r.method = j.value("method", "structured") == "fallback" ? ExtractionMethod::Fallback : ExtractionMethod::Structured;
    return r;
}

CooperationCategory validate_extraction_schema(std::string_view raw_json) {
    auto body = text::trim(raw_json);
    if (body.starts_with("```")) {
        const auto first_nl = body.find('\n');
        const auto last_fence = body.rfind("```");
        if (first_nl == std::string_view::npos || last_fence <= first_nl) {
            throw Error(ErrorCode::ExtractionUnparseable, "unterminated code fence");
        }
        body = text::trim(body.substr(first_nl + 1, last_fence - first_nl - 1));
    }
    Json j;
    try {
        j = Json::parse(body);
    } catch (const Json::parse_error& e) {
        throw Error(ErrorCode::ExtractionUnparseable, std::string("extractor reply is not JSON: ") + e.what());
    }
    if (!j.is_object()) throw Error(ErrorCode::ExtractionUnparseable, "extractor reply is not a JSON object");
    auto it = j.find("category");
    if (it == j.end()) throw Error(ErrorCode::ExtractionUnparseable, "extractor reply lacks 'category'");
    if (!it->is_string()) throw Error(ErrorCode::ExtractionUnparseable, "'category' is not a string");
    const auto token = it->get<std::string>();
    auto category = parse_category_token(token);
    if (!category) throw Error(ErrorCode::CategoryUnknown, "unknown category token '" + token + "'");
    return *category;
}

std::optional<CooperationCategory> scan_category_phrases(std::string_view final_answer) {
    static const std::vector<std::pair<CooperationCategory, std::vector<std::string>>> kPhrases{
        {CooperationCategory::LackOfCooperation, {"lack of cooperation", "lack_of_cooperation", "mangelnde kooperation"}},
        {CooperationCategory::CooperationPresentOrEmerged,
         {"cooperation present or emerged", "cooperation_present_or_emerged", "kooperation vorhanden oder entstanden"}},
        {CooperationCategory::NoEvidence, {"no evidence", "no_evidence", "keine hinweise"}},
    };
    const auto lowered = text::to_lower_ascii(final_answer);
    std::optional<CooperationCategory> found;
    for (const auto& [category, phrases] : kPhrases) {
        for (const auto& p : phrases) {
            if (lowered.find(p) == std::string::npos) continue;
            if (found && *found != category) return std::nullopt;
            found = category;
        }
    }
    return found;
}

namespace {

ChatRequest make_request(std::string_view final_answer, const std::string& prompt, const SamplingConfig& sampling) {
    ChatRequest request;
    request.purpose = RequestPurpose::Extraction;
    request.messages = {{"user", prompt}};
    request.sampling = sampling;
    request.json_output = true;
    request.subject = final_answer;
    return request;
}

ExtractionResult interpret(std::string_view final_answer, ChatResponse response, const ExtractionOptions& options) {
    ExtractionResult result;
    result.extractor_model = options.sampling.model_name;
    result.raw_json = std::move(response.content);
    try {
        result.category = validate_extraction_schema(result.raw_json);
        result.method = ExtractionMethod::Structured;
    } catch (const Error& e) {
        if (e.code() != ErrorCode::ExtractionUnparseable || !options.fallback) throw;
        auto scanned = scan_category_phrases(final_answer);
        if (!scanned) {
            throw Error(ErrorCode::ExtractionUnparseable,
                        std::string(e.what()) + "; fallback found no unambiguous category phrase");
        }
        result.category = *scanned;
        result.method = ExtractionMethod::Fallback;
    }
    return result;
}

}  // namespace

ExtractionResult extract_category(std::string_view final_answer, ChatBackend& backend, const ExtractionTemplate& tmpl,
                                  const ExtractionOptions& options) {
    const auto prompt = build_extraction_prompt(final_answer, tmpl);
    auto response = complete_with_retry(backend, make_request(final_answer, prompt, options.sampling), options.retry);
    return interpret(final_answer, std::move(response), options);
}

std::string extraction_cache_key(std::string_view report_id, CaregiverRole caregiver, std::string_view template_version,
                                 std::string_view config_digest, std::string_view answer_hash) {
    std::string key(report_id);
    for (std::string_view part : {to_string(caregiver), template_version, config_digest, answer_hash}) {
        key += '|';
        key += part;
    }
    return key;
}

Extractor::Extractor(ChatBackend& backend, ExtractionTemplate tmpl, ExtractionOptions options, KeyedJsonlStore* cache)
    : backend_(backend), template_(std::move(tmpl)), options_(std::move(options)), cache_(cache) {
    validate(options_.sampling);
    const Json j{{"sampling", Json::parse(canonical_json(options_.sampling))},
                 {"backend", Json::parse(canonical_json(backend_.descriptor()))},
                 {"fallback", options_.fallback}};
    digest_ = sha256_hex(j.dump()).substr(0, 16);
}

ExtractionResult Extractor::extract(std::string_view report_id, CaregiverRole caregiver, std::string_view final_answer) {
    const auto key = extraction_cache_key(report_id, caregiver, template_.template_id + "@" + template_.version, digest_,
                                          sha256_hex(final_answer).substr(0, 16));
    if (cache_) {
        if (auto hit = cache_->find(key)) {
            ++stats_.cache_hits;
            return extraction_from_json(*hit);
        }
    }
    const auto prompt = build_extraction_prompt(final_answer, template_);
    const auto started = std::chrono::steady_clock::now();
    auto response =
        complete_with_retry(backend_, make_request(final_answer, prompt, options_.sampling), options_.retry, &stats_.retries);
    ++stats_.backend_calls;
    stats_.total_latency_ms += static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started).count());

    auto result = interpret(final_answer, std::move(response), options_);
    result.report_id = std::string(report_id);
    result.caregiver = caregiver;
    if (cache_ && !cache_->put(key, to_json_line(result, key))) return extraction_from_json(*cache_->find(key));
    return result;
}

}  // namespace coop
