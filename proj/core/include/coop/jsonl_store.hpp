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
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace coop {

/// Append-only line-delimited JSON file indexed by a caller-supplied key.
/// Each line is stored and returned verbatim. A torn final line (crash
/// during append) is dropped on open. Safe for concurrent put/find.
class KeyedJsonlStore {
public:
    /// In-memory store when `path` is empty.
    explicit KeyedJsonlStore(std::filesystem::path path = {}, std::string key_field = "key");

    std::optional<std::string> find(const std::string& key) const;
    /// Returns false (and writes nothing) when the key already exists.
    bool put(const std::string& key, const std::string& json_line);
    std::size_t size() const;
    /// Lines in file order.
    std::vector<std::string> lines() const;
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
    std::string key_field_;
    mutable std::mutex mu_;
    std::map<std::string, std::string> by_key_;
    std::vector<std::string> order_;
    std::ofstream out_;
};

}  // namespace coop
