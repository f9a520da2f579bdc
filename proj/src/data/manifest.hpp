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

// Manifest text format (UTF-8, one record per line, tab separated):
//
//   karaoker-manifest	1
//   tokenizer	<serialized tokenizer>
//   speaker	<index>	<id>	<p5 p95 for each of the 9 tracks, space separated>
//   utt	<id>	<speaker id>	<frames>	<cache path>	<textless 0|1>	<token ids>
//
// Cache paths are relative to the manifest's directory.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "common/log.hpp"
#include "data/tokenizer.hpp"
#include "features/feature_set.hpp"

namespace karaoker::data {

inline constexpr int kManifestVersion = 1;
// Feature settings used for the cache, written next to the manifest.
inline constexpr const char* kFeatureConfigFile = "features.txt";

struct UtteranceRecord {
  std::string id;
  std::string speaker_id;
  std::vector<int64_t> token_ids;
  std::string cache_path;
  int frames = 0;
  bool textless = false;

  void Validate() const;
};

struct SpeakerEntry {
  std::string id;
  features::SpeakerStats stats;
};

class SpeakerTable {
 public:
  // Returns the existing index if the id is already present.
  int Add(const std::string& id, const features::SpeakerStats& stats = {});
  int IndexOf(const std::string& id) const;
  bool Contains(const std::string& id) const { return index_.count(id) != 0; }
  const SpeakerEntry& at(int index) const;
  SpeakerEntry& at(int index);
  int size() const { return static_cast<int>(entries_.size()); }
  const std::vector<SpeakerEntry>& entries() const { return entries_; }

 private:
  std::vector<SpeakerEntry> entries_;
  std::map<std::string, int> index_;
};

struct Manifest {
  std::vector<UtteranceRecord> records;
  SpeakerTable speakers;
  Tokenizer tokenizer;
  // Directory cache paths are resolved against; set on read.
  std::string base_dir;

  std::string ResolveCache(const UtteranceRecord& rec) const;
};

struct PrepareOptions {
  features::FeatureConfig features;
  TokenizerConfig tokenizer = TokenizerConfig::DefaultGraphemes();
  // 0 picks the hardware concurrency.
  int threads = 0;
};

// Walks <corpus>/<speaker>/<utt>.wav + <utt>.txt, extracts features into
// <out>/cache/<speaker>/<utt>.kkf and writes <out>/manifest.txt. Utterances
// that cannot be read are skipped with a warning.
Manifest BuildManifest(const std::string& corpus_dir, const std::string& out_dir,
                       const PrepareOptions& opts, Diagnostics* diag = nullptr);

std::string SerializeManifest(const Manifest& m);
Manifest ParseManifest(const std::string& text, const std::string& base_dir);
void WriteManifest(const std::string& path, const Manifest& m);
Manifest ReadManifest(const std::string& path);

// Stats line helpers, shared with checkpoint metadata.
std::string FormatStats(const features::SpeakerStats& stats);
features::SpeakerStats ParseStats(const std::string& text);

}  // namespace karaoker::data
