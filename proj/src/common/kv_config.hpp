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

#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>

namespace karaoker {

// Flat `key = value` text configuration. Lines starting with '#' and blank
// lines are ignored; whitespace around keys and values is trimmed. Later
// assignments override earlier ones.
class KvConfig {
 public:
  static KvConfig Parse(const std::string& text);
  static KvConfig Load(const std::string& path);

  bool Has(const std::string& key) const;
  void Set(const std::string& key, const std::string& value);

  std::string GetString(const std::string& key, const std::string& fallback) const;
  double GetDouble(const std::string& key, double fallback) const;
  int64_t GetInt(const std::string& key, int64_t fallback) const;
  bool GetBool(const std::string& key, bool fallback) const;

  // Keys present in the file that no Get* call has read yet.
  std::set<std::string> UnreadKeys() const;

  // Canonical form: sorted `key = value` lines.
  std::string Serialize() const;
  void Save(const std::string& path) const;

  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
  mutable std::set<std::string> read_;
};

// Shortest round-trip text for a double ("%.17g").
std::string FormatKvDouble(double value);

// 64-bit FNV-1a, stable across platforms and runs.
uint64_t Fnv1a64(const std::string& bytes);
std::string HexDigest(uint64_t value);

}  // namespace karaoker
