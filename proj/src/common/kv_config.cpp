// Copyright (c) 2026 The Karaoker Authors
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

#include "common/kv_config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "common/error.hpp"

namespace karaoker {

namespace {

std::string Trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

}  // namespace

KvConfig KvConfig::Parse(const std::string& text) {
  KvConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string trimmed = Trim(line);
    if (trimmed.empty() || trimmed[0] == '#') continue;
    const auto eq = trimmed.find('=');
    if (eq == std::string::npos) {
      Fail(ErrorCode::kConfig, "config line " + std::to_string(lineno) +
                                   ": expected 'key = value'");
    }
    const std::string key = Trim(trimmed.substr(0, eq));
    if (key.empty()) {
      Fail(ErrorCode::kConfig, "config line " + std::to_string(lineno) + ": empty key");
    }
    cfg.entries_[key] = Trim(trimmed.substr(eq + 1));
  }
  return cfg;
}

KvConfig KvConfig::Load(const std::string& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kIo, "cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return Parse(buf.str());
}

bool KvConfig::Has(const std::string& key) const { return entries_.count(key) > 0; }

void KvConfig::Set(const std::string& key, const std::string& value) {
  entries_[key] = value;
}

std::string KvConfig::GetString(const std::string& key,
                                const std::string& fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  read_.insert(key);
  return it->second;
}

double KvConfig::GetDouble(const std::string& key, double fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  read_.insert(key);
  try {
    size_t used = 0;
    const double v = std::stod(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument(it->second);
    return v;
  } catch (const std::exception&) {
    Fail(ErrorCode::kConfig, "config key '" + key + "' is not a number: " + it->second);
  }
}

int64_t KvConfig::GetInt(const std::string& key, int64_t fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  read_.insert(key);
  try {
    size_t used = 0;
    const long long v = std::stoll(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument(it->second);
    return v;
  } catch (const std::exception&) {
    Fail(ErrorCode::kConfig, "config key '" + key + "' is not an integer: " + it->second);
  }
}

bool KvConfig::GetBool(const std::string& key, bool fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  read_.insert(key);
  std::string v = it->second;
  std::transform(v.begin(), v.end(), v.begin(), ::tolower);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  Fail(ErrorCode::kConfig, "config key '" + key + "' is not a boolean: " + it->second);
}

std::set<std::string> KvConfig::UnreadKeys() const {
  std::set<std::string> out;
  for (const auto& [k, v] : entries_) {
    if (!read_.count(k)) out.insert(k);
  }
  return out;
}

std::string KvConfig::Serialize() const {
  std::ostringstream out;
  for (const auto& [k, v] : entries_) out << k << " = " << v << '\n';
  return out.str();
}

void KvConfig::Save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) Fail(ErrorCode::kIo, "cannot write config file: " + path);
  out << Serialize();
}

uint64_t Fnv1a64(const std::string& bytes) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string HexDigest(uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

std::string FormatKvDouble(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

}  // namespace karaoker
