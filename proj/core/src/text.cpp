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

#include "coop/text.hpp"

#include <algorithm>
#include <cstdint>

namespace coop::text {

namespace {

bool is_space(unsigned char c) noexcept {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_ascii_letter(unsigned char c) noexcept {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

// Multi-byte UTF-8 sequences count as letters for word-boundary purposes.
bool is_word_byte(unsigned char c) noexcept { return is_ascii_letter(c) || c >= 0x80; }

}  // namespace

bool is_valid_utf8(std::string_view bytes) noexcept {
    std::size_t i = 0;
    const std::size_t n = bytes.size();
    while (i < n) {
        const auto c = static_cast<unsigned char>(bytes[i]);
        std::size_t extra = 0;
        std::uint32_t cp = 0;
        if (c < 0x80) {
            ++i;
            continue;
        } else if ((c & 0xE0) == 0xC0) {
            extra = 1;
            cp = c & 0x1F;
        } else if ((c & 0xF0) == 0xE0) {
            extra = 2;
            cp = c & 0x0F;
        } else if ((c & 0xF8) == 0xF0) {
            extra = 3;
            cp = c & 0x07;
        } else {
            return false;
        }
        if (i + extra >= n) return false;
        for (std::size_t k = 1; k <= extra; ++k) {
            const auto cc = static_cast<unsigned char>(bytes[i + k]);
            if ((cc & 0xC0) != 0x80) return false;
            cp = (cp << 6) | (cc & 0x3F);
        }
        // Overlong forms, surrogates, out of range.
        if ((extra == 1 && cp < 0x80) || (extra == 2 && cp < 0x800) || (extra == 3 && cp < 0x10000) ||
            cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
            return false;
        }
        i += extra + 1;
    }
    return true;
}

std::string normalize(std::string_view raw) {
    if (raw.starts_with("\xEF\xBB\xBF")) raw.remove_prefix(3);

    std::string cleaned;
    cleaned.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const auto c = static_cast<unsigned char>(raw[i]);
        if (c == '\r') {
            cleaned.push_back('\n');
            if (i + 1 < raw.size() && raw[i + 1] == '\n') ++i;
        } else if (c == '\n' || c == '\t') {
            cleaned.push_back(static_cast<char>(c));
        } else if (c < 0x20 || c == 0x7F) {
            continue;
        } else if (c == 0xC2 && i + 1 < raw.size() &&
                   static_cast<unsigned char>(raw[i + 1]) >= 0x80 &&
                   static_cast<unsigned char>(raw[i + 1]) <= 0x9F) {
            ++i;  // C1 control
        } else {
            cleaned.push_back(static_cast<char>(c));
        }
    }

    std::string out;
    out.reserve(cleaned.size());
    bool pending_blank = false;
    std::size_t start = 0;
    while (start <= cleaned.size()) {
        std::size_t end = cleaned.find('\n', start);
        if (end == std::string::npos) end = cleaned.size();
        std::string_view line(cleaned.data() + start, end - start);
        while (!line.empty() && (line.back() == ' ' || line.back() == '\t')) line.remove_suffix(1);
        if (line.empty()) {
            pending_blank = !out.empty();
        } else {
            if (!out.empty()) out += pending_blank ? "\n\n" : "\n";
            out.append(line);
            pending_blank = false;
        }
        start = end + 1;
    }
    return out;
}

std::size_t word_count(std::string_view text) noexcept {
    std::size_t count = 0;
    bool in_word = false;
    for (char ch : text) {
        const bool space = is_space(static_cast<unsigned char>(ch));
        if (!space && !in_word) ++count;
        in_word = !space;
    }
    return count;
}

std::string_view trim(std::string_view s) noexcept {
    while (!s.empty() && is_space(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && is_space(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::string to_lower_ascii(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](char c) {
        return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
    });
    return out;
}

std::size_t count_occurrences(std::string_view haystack, std::string_view needle) noexcept {
    if (needle.empty()) return 0;
    std::size_t count = 0;
    for (std::size_t pos = haystack.find(needle); pos != std::string_view::npos;
         pos = haystack.find(needle, pos + needle.size())) {
        ++count;
    }
    return count;
}

bool contains_word(std::string_view haystack, std::string_view word) noexcept {
    if (word.empty()) return false;
    for (std::size_t pos = haystack.find(word); pos != std::string_view::npos;
         pos = haystack.find(word, pos + 1)) {
        const bool left_ok = pos == 0 || !is_word_byte(static_cast<unsigned char>(haystack[pos - 1]));
        const std::size_t after = pos + word.size();
        const bool right_ok =
            after >= haystack.size() || !is_word_byte(static_cast<unsigned char>(haystack[after]));
        if (left_ok && right_ok) return true;
    }
    return false;
}

std::vector<std::string_view> split_sentences(std::string_view text) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    auto flush = [&](std::size_t end) {
        auto piece = trim(text.substr(start, end - start));
        if (!piece.empty()) out.push_back(piece);
        start = end;
    };
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (c == '\n') {
            flush(i);
            start = i + 1;
        } else if ((c == '.' || c == '!' || c == '?') &&
                   (i + 1 == text.size() || is_space(static_cast<unsigned char>(text[i + 1])))) {
            flush(i + 1);
        }
    }
    flush(text.size());
    return out;
}

std::size_t replace_all(std::string& target, std::string_view from, std::string_view to) {
    if (from.empty()) return 0;
    std::size_t count = 0;
    for (std::size_t pos = target.find(from); pos != std::string::npos;
         pos = target.find(from, pos + to.size())) {
        target.replace(pos, from.size(), to);
        ++count;
    }
    return count;
}

}  // namespace coop::text
