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

#include <string>
#include <string_view>

namespace coop {

struct DelimiterConfig {
    std::string open = "<think>";
    std::string close = "</think>";
    /// On a missing closing delimiter, fall back to the text after the
    /// opening one instead of failing.
    bool lenient = false;

    bool operator==(const DelimiterConfig&) const = default;
};

struct ReasoningSplit {
    std::string thinking;
    std::string final_answer;
    bool unterminated = false;
};

/// Separates the thinking section from the final answer.
///  - open...close found: thinking = enclosed text, final answer = the text
///    outside thinking blocks (normally just the remainder after the
///    closing delimiter). Several blocks are joined into `thinking`.
///  - only a closing delimiter: everything before it is thinking.
///  - no delimiter: thinking empty, final answer = whole text.
/// Both parts are trimmed. Throws InvalidInput on empty input and
/// UnterminatedThinking for an unclosed block unless `lenient`.
ReasoningSplit split_reasoning(std::string_view full_text, const DelimiterConfig& delimiters = {});

}  // namespace coop
