// Copyright (c) 2026 nnSpeech Authors
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

#ifndef NNSPEECH_UTIL_KVFILE_HPP_
#define NNSPEECH_UTIL_KVFILE_HPP_

#include <cstdint>
#include <map>
#include <string>

namespace nns {

// Human-readable `key = value` config files. Lines starting with '#' and
// blank lines are ignored. Keys are unique; later entries win.
class KvFile {
 public:
  KvFile() = default;

  static KvFile Parse(const std::string& text);
  static KvFile Load(const std::string& path);

  bool Has(const std::string& key) const { return entries_.count(key) > 0; }

  std::string GetString(const std::string& key,
                        const std::string& fallback) const;
  std::string RequireString(const std::string& key) const;
  int64_t GetInt(const std::string& key, int64_t fallback) const;
  double GetDouble(const std::string& key, double fallback) const;

  void Set(const std::string& key, const std::string& value) {
    entries_[key] = value;
  }
  void Set(const std::string& key, int64_t value);
  void Set(const std::string& key, double value);

  std::string Serialize() const;
  void Save(const std::string& path) const;

  const std::map<std::string, std::string>& entries() const {
    return entries_;
  }

 private:
  std::map<std::string, std::string> entries_;
};

}  // namespace nns

#endif  // NNSPEECH_UTIL_KVFILE_HPP_
