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

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>

#include <nlohmann/json.hpp>

namespace coop::jsonl {

using Json = nlohmann::json;

/// Calls `fn(object, line_number)` for each non-empty line. A final line
/// without a newline that fails to parse is treated as a torn append and
/// skipped when `tolerate_torn_tail` is set; any other parse failure throws
/// InvalidInput.
void for_each(std::istream& in, const std::function<void(const Json&, std::size_t)>& fn,
              bool tolerate_torn_tail = false);

void for_each_file(const std::filesystem::path& path,
                   const std::function<void(const Json&, std::size_t)>& fn,
                   bool tolerate_torn_tail = false);

/// Reads a string field; throws InvalidInput naming the field.
std::string require_string(const Json& obj, const char* field, std::size_t line);

/// Writes `content` to `path` via a temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

}  // namespace coop::jsonl
