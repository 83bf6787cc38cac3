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

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace coop::text {

bool is_valid_utf8(std::string_view bytes) noexcept;

/// Unifies line endings, strips control characters (C0 except tab/newline,
/// DEL, C1), drops a leading BOM, trims trailing whitespace per line,
/// collapses runs of blank lines to one and trims blank lines at both ends.
std::string normalize(std::string_view raw);

/// Number of maximal runs of non-whitespace bytes.
std::size_t word_count(std::string_view text) noexcept;

std::string_view trim(std::string_view s) noexcept;
std::string to_lower_ascii(std::string_view s);

/// Count non-overlapping occurrences of `needle` in `haystack`.
std::size_t count_occurrences(std::string_view haystack, std::string_view needle) noexcept;

/// True when `word` occurs in `haystack` with non-letter bytes (or the ends)
/// on both sides. ASCII case-sensitive; callers lower-case first.
bool contains_word(std::string_view haystack, std::string_view word) noexcept;

/// Splits into sentences at '.', '!', '?' followed by whitespace or end, and
/// at newlines. Empty pieces are dropped.
std::vector<std::string_view> split_sentences(std::string_view text);

/// Replaces every `{{name}}` occurrence. Returns the number of replacements.
std::size_t replace_all(std::string& target, std::string_view from, std::string_view to);

}  // namespace coop::text
