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

#include "jsonl.hpp"

#include <fstream>
#include <sstream>

#include "coop/error.hpp"

namespace coop::jsonl {

void for_each(std::istream& in, const std::function<void(const Json&, std::size_t)>& fn,
              bool tolerate_torn_tail) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const bool at_eof = in.eof();
        Json obj;
        try {
            obj = Json::parse(line);
        } catch (const Json::parse_error& e) {
            if (tolerate_torn_tail && at_eof) return;
            throw Error(ErrorCode::InvalidInput,
                        "line " + std::to_string(line_no) + ": invalid JSON (" + e.what() + ")");
        }
        if (!obj.is_object()) {
            throw Error(ErrorCode::InvalidInput, "line " + std::to_string(line_no) + ": expected an object");
        }
        fn(obj, line_no);
    }
}

void for_each_file(const std::filesystem::path& path,
                   const std::function<void(const Json&, std::size_t)>& fn, bool tolerate_torn_tail) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    for_each(in, fn, tolerate_torn_tail);
}

std::string require_string(const Json& obj, const char* field, std::size_t line) {
    auto it = obj.find(field);
    if (it == obj.end() || !it->is_string()) {
        throw Error(ErrorCode::InvalidInput,
                    "line " + std::to_string(line) + ": missing string field '" + field + "'");
    }
    return it->get<std::string>();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
        out << content;
        if (!out.flush()) throw Error(ErrorCode::IoError, "short write " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace coop::jsonl
