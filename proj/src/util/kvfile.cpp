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

#include "util/kvfile.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "util/error.hpp"

namespace nns {

namespace {

std::string Trim(const std::string& s) {
  const char* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

}  // namespace

KvFile KvFile::Parse(const std::string& text) {
  KvFile kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = Trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto eq = t.find('=');
    if (eq == std::string::npos) {
      ThrowInvalid("config line " + std::to_string(lineno) +
                   " is not `key = value`: " + t);
    }
    kv.entries_[Trim(t.substr(0, eq))] = Trim(t.substr(eq + 1));
  }
  return kv;
}

KvFile KvFile::Load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) ThrowIo("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return Parse(buf.str());
}

std::string KvFile::GetString(const std::string& key,
                              const std::string& fallback) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? fallback : it->second;
}

std::string KvFile::RequireString(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) ThrowInvalid("missing config key: " + key);
  return it->second;
}

int64_t KvFile::GetInt(const std::string& key, int64_t fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  try {
    size_t pos = 0;
    int64_t v = std::stoll(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument(key);
    return v;
  } catch (const std::exception&) {
    ThrowInvalid("config key `" + key + "` is not an integer: " + it->second);
  }
}

double KvFile::GetDouble(const std::string& key, double fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  try {
    size_t pos = 0;
    double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument(key);
    return v;
  } catch (const std::exception&) {
    ThrowInvalid("config key `" + key + "` is not a number: " + it->second);
  }
}

void KvFile::Set(const std::string& key, int64_t value) {
  entries_[key] = std::to_string(value);
}

void KvFile::Set(const std::string& key, double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  entries_[key] = buf;
}

std::string KvFile::Serialize() const {
  std::ostringstream out;
  for (const auto& [k, v] : entries_) out << k << " = " << v << "\n";
  return out.str();
}

void KvFile::Save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) ThrowIo("cannot write config file: " + path);
  out << Serialize();
  if (!out) ThrowIo("failed writing config file: " + path);
}

}  // namespace nns
