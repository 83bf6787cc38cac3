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

#include "coop/jsonl_store.hpp"

#include "coop/error.hpp"
#include "jsonl.hpp"

namespace coop {

KeyedJsonlStore::KeyedJsonlStore(std::filesystem::path path, std::string key_field)
    : path_(std::move(path)), key_field_(std::move(key_field)) {
    if (path_.empty()) return;
    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());

    if (std::filesystem::exists(path_)) {
        const auto content = jsonl::read_file(path_);
        std::size_t pos = 0;
        std::size_t valid_end = 0;
        std::size_t line_no = 0;
        while (pos < content.size()) {
            const auto nl = content.find('\n', pos);
            const bool terminated = nl != std::string::npos;
            const auto end = terminated ? nl : content.size();
            const std::string line = content.substr(pos, end - pos);
            ++line_no;
            if (!line.empty()) {
                jsonl::Json obj;
                try {
                    obj = jsonl::Json::parse(line);
                } catch (const jsonl::Json::parse_error&) {
                    if (!terminated) break;  // torn tail
                    throw Error(ErrorCode::InvalidInput,
                                path_.string() + ":" + std::to_string(line_no) + ": invalid JSON");
                }
                if (!terminated) break;  // complete JSON but no newline: still treated as torn
                auto it = obj.find(key_field_);
                if (it == obj.end() || !it->is_string()) {
                    throw Error(ErrorCode::InvalidInput,
                                path_.string() + ":" + std::to_string(line_no) + ": missing key field");
                }
                if (by_key_.emplace(it->get<std::string>(), line).second) order_.push_back(line);
            }
            valid_end = end + 1;
            pos = end + 1;
        }
        if (valid_end < content.size()) std::filesystem::resize_file(path_, valid_end);
    }
    out_.open(path_, std::ios::binary | std::ios::app);
    if (!out_) throw Error(ErrorCode::IoError, "cannot open " + path_.string() + " for append");
}

std::optional<std::string> KeyedJsonlStore::find(const std::string& key) const {
    std::lock_guard lock(mu_);
    auto it = by_key_.find(key);
    if (it == by_key_.end()) return std::nullopt;
    return it->second;
}

bool KeyedJsonlStore::put(const std::string& key, const std::string& json_line) {
    std::lock_guard lock(mu_);
    if (!by_key_.emplace(key, json_line).second) return false;
    order_.push_back(json_line);
    if (out_.is_open()) {
        out_ << json_line << '\n';
        out_.flush();
        if (!out_) throw Error(ErrorCode::IoError, "append to " + path_.string() + " failed");
    }
    return true;
}

std::size_t KeyedJsonlStore::size() const {
    std::lock_guard lock(mu_);
    return by_key_.size();
}

std::vector<std::string> KeyedJsonlStore::lines() const {
    std::lock_guard lock(mu_);
    return order_;
}

}  // namespace coop
