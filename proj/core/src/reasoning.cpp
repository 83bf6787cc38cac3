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

#include "coop/reasoning.hpp"

#include "coop/error.hpp"
#include "coop/text.hpp"

namespace coop {

ReasoningSplit split_reasoning(std::string_view full_text, const DelimiterConfig& d) {
    if (text::trim(full_text).empty()) throw Error(ErrorCode::InvalidInput, "model output is empty");
    if (d.open.empty() || d.close.empty()) throw Error(ErrorCode::InvalidConfig, "thinking delimiters must be non-empty");

    ReasoningSplit out;
    std::string thinking;
    auto append_thinking = [&](std::string_view part) {
        part = text::trim(part);
        if (part.empty()) return;
        if (!thinking.empty()) thinking += "\n";
        thinking.append(part);
    };

    std::string_view rest = full_text;
    const auto first_open = rest.find(d.open);
    const auto first_close = rest.find(d.close);

    if (first_open == std::string_view::npos) {
        if (first_close == std::string_view::npos) {
            out.final_answer = std::string(text::trim(full_text));
            return out;
        }
        // Chat templates that pre-fill the opening tag emit only the closing one.
        append_thinking(rest.substr(0, first_close));
        rest.remove_prefix(first_close + d.close.size());
    } else if (first_close != std::string_view::npos && first_close < first_open) {
        append_thinking(rest.substr(0, first_close));
        rest.remove_prefix(first_close + d.close.size());
    }

    std::string final_answer;
    while (true) {
        const auto open = rest.find(d.open);
        if (open == std::string_view::npos) {
            final_answer.append(rest);
            break;
        }
        final_answer.append(rest.substr(0, open));
        rest.remove_prefix(open + d.open.size());
        const auto close = rest.find(d.close);
        if (close == std::string_view::npos) {
            if (!d.lenient) throw Error(ErrorCode::UnterminatedThinking, "thinking section has no closing delimiter");
            out.unterminated = true;
            final_answer.append(rest);
            break;
        }
        append_thinking(rest.substr(0, close));
        rest.remove_prefix(close + d.close.size());
    }

    // Stray delimiters never reach the answer.
    std::string cleaned(text::trim(final_answer));
    while (text::replace_all(cleaned, d.close, "") + text::replace_all(cleaned, d.open, "") > 0) {
    }
    out.thinking = std::move(thinking);
    out.final_answer = std::string(text::trim(cleaned));
    return out;
}

}  // namespace coop
