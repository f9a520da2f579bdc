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

#include "data/manifest.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <sstream>
#include <thread>

#include "common/binary_io.hpp"
#include "common/error.hpp"
#include "features/feature_cache.hpp"
#include "features/waveform.hpp"

namespace fs = std::filesystem;

namespace karaoker::data {

namespace {

constexpr const char* kHeader = "karaoker-manifest";

std::vector<std::string> SplitTabs(const std::string& line) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    const auto end = line.find('\t', start);
    out.push_back(line.substr(start, end == std::string::npos ? std::string::npos : end - start));
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return out;
}

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool SafeField(const std::string& s) {
  return !s.empty() && s.find_first_of("\t\r\n") == std::string::npos;
}

std::string FormatDouble(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Job {
  std::string speaker;
  std::string utt;
  fs::path wav;
  fs::path txt;
};

struct JobResult {
  std::optional<features::FeatureSet> features;
  std::string error;
};

}  // namespace

void UtteranceRecord::Validate() const {
  Require(SafeField(id), "utterance id must be nonempty and tab-free", ErrorCode::kFormat);
  Require(SafeField(speaker_id), "speaker id must be nonempty and tab-free", ErrorCode::kFormat);
  Require(textless || !token_ids.empty(), "utterance " + id + " has no tokens",
          ErrorCode::kFormat);
  Require(frames > 0, "utterance " + id + " has no frames", ErrorCode::kFormat);
}

int SpeakerTable::Add(const std::string& id, const features::SpeakerStats& stats) {
  auto it = index_.find(id);
  if (it != index_.end()) return it->second;
  const int idx = size();
  entries_.push_back({id, stats});
  index_.emplace(id, idx);
  return idx;
}

int SpeakerTable::IndexOf(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) Fail(ErrorCode::kInvalidArgument, "unknown speaker: " + id);
  return it->second;
}

const SpeakerEntry& SpeakerTable::at(int index) const {
  Require(index >= 0 && index < size(), "speaker index out of range");
  return entries_[static_cast<size_t>(index)];
}

SpeakerEntry& SpeakerTable::at(int index) {
  Require(index >= 0 && index < size(), "speaker index out of range");
  return entries_[static_cast<size_t>(index)];
}

std::string Manifest::ResolveCache(const UtteranceRecord& rec) const {
  const fs::path p(rec.cache_path);
  if (p.is_absolute() || base_dir.empty()) return p.string();
  return (fs::path(base_dir) / p).string();
}

std::string FormatStats(const features::SpeakerStats& stats) {
  std::string out;
  for (int f = 0; f < features::kNumFeatures; ++f) {
    if (f) out += ' ';
    out += FormatDouble(stats.ranges[f].p5) + ' ' + FormatDouble(stats.ranges[f].p95);
  }
  return out;
}

features::SpeakerStats ParseStats(const std::string& text) {
  std::istringstream ss(text);
  features::SpeakerStats stats;
  for (auto& r : stats.ranges) {
    if (!(ss >> r.p5 >> r.p95)) Fail(ErrorCode::kFormat, "malformed speaker stats");
  }
  std::string extra;
  if (ss >> extra) Fail(ErrorCode::kFormat, "trailing data in speaker stats");
  return stats;
}

Manifest BuildManifest(const std::string& corpus_dir, const std::string& out_dir,
                       const PrepareOptions& opts, Diagnostics* diag) {
  opts.features.mel.Validate();
  Require(fs::is_directory(corpus_dir), "corpus is not a directory: " + corpus_dir, ErrorCode::kIo);

  std::vector<fs::path> speaker_dirs;
  for (const auto& e : fs::directory_iterator(corpus_dir)) {
    if (e.is_directory()) speaker_dirs.push_back(e.path());
  }
  std::sort(speaker_dirs.begin(), speaker_dirs.end());

  std::vector<Job> jobs;
  for (const auto& dir : speaker_dirs) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
      if (e.is_regular_file()) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    const std::string speaker = dir.filename().string();
    for (const auto& f : files) {
      const auto ext = f.extension().string();
      const auto stem = f.stem().string();
      fs::path other = f;
      if (ext == ".wav") {
        other.replace_extension(".txt");
        if (!fs::exists(other)) {
          WarnTo(diag, "skipping " + speaker + "/" + stem + ": missing transcript");
          continue;
        }
        jobs.push_back({speaker, stem, f, other});
      } else if (ext == ".txt") {
        other.replace_extension(".wav");
        if (!fs::exists(other)) WarnTo(diag, "skipping " + speaker + "/" + stem + ": missing audio");
      }
    }
  }
  if (jobs.empty()) Fail(ErrorCode::kNoData, "no utterances in " + corpus_dir);

  const fs::path cache_root = fs::path(out_dir) / "cache";
  fs::create_directories(cache_root);
  for (const auto& dir : speaker_dirs) fs::create_directories(cache_root / dir.filename());

  std::vector<JobResult> results(jobs.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i; (i = next.fetch_add(1)) < jobs.size();) {
      const Job& job = jobs[i];
      try {
        const auto wave = features::ReadWav(job.wav.string());
        features::CachedUtterance entry;
        entry.utterance_id = job.utt;
        entry.speaker_id = job.speaker;
        entry.sample_rate = opts.features.mel.sample_rate;
        entry.hop_length = opts.features.mel.hop_length;
        entry.data = features::AnalyzeWaveform(wave, opts.features);
        features::WriteFeatureCache((cache_root / job.speaker / (job.utt + ".kkf")).string(), entry);
        results[i].features = std::move(entry.data.features);
      } catch (const std::exception& e) {
        results[i].error = e.what();
      }
    }
  };
  int threads = opts.threads > 0 ? opts.threads : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, static_cast<int>(jobs.size()));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  Manifest m;
  m.tokenizer = Tokenizer(opts.tokenizer);
  m.base_dir = out_dir;
  std::map<std::string, std::vector<const features::FeatureSet*>> by_speaker;
  for (size_t i = 0; i < jobs.size(); ++i) {
    const Job& job = jobs[i];
    const std::string label = job.speaker + "/" + job.utt;
    if (!results[i].features) {
      WarnTo(diag, "skipping " + label + ": " + results[i].error);
      continue;
    }
    const std::string text = Trim(io::ReadFile(job.txt.string()));
    UtteranceRecord rec;
    rec.id = job.utt;
    rec.speaker_id = job.speaker;
    rec.token_ids = m.tokenizer.Encode(text);
    rec.frames = results[i].features->frames();
    rec.cache_path = (fs::path("cache") / job.speaker / (job.utt + ".kkf")).generic_string();
    if (rec.token_ids.empty()) {
      WarnTo(diag, "skipping " + label + ": empty transcript");
      continue;
    }
    m.records.push_back(std::move(rec));
    by_speaker[job.speaker].push_back(&*results[i].features);
  }
  if (m.records.empty()) Fail(ErrorCode::kNoData, "no utterances could be prepared from " + corpus_dir);

  for (const auto& [speaker, sets] : by_speaker) {
    m.speakers.Add(speaker, features::ComputeSpeakerStats(sets));
  }
  WriteManifest((fs::path(out_dir) / "manifest.txt").string(), m);
  KvConfig feature_kv;
  opts.features.ToKv(feature_kv);
  feature_kv.Save((fs::path(out_dir) / kFeatureConfigFile).string());
  return m;
}

std::string SerializeManifest(const Manifest& m) {
  std::ostringstream out;
  out << kHeader << '\t' << kManifestVersion << '\n';
  out << "tokenizer\t" << m.tokenizer.Serialize() << '\n';
  for (int i = 0; i < m.speakers.size(); ++i) {
    const auto& s = m.speakers.at(i);
    Require(SafeField(s.id), "speaker id must be nonempty and tab-free", ErrorCode::kFormat);
    out << "speaker\t" << i << '\t' << s.id << '\t' << FormatStats(s.stats) << '\n';
  }
  for (const auto& r : m.records) {
    r.Validate();
    Require(m.speakers.Contains(r.speaker_id), "record speaker missing from table: " + r.speaker_id);
    out << "utt\t" << r.id << '\t' << r.speaker_id << '\t' << r.frames << '\t' << r.cache_path
        << '\t' << (r.textless ? 1 : 0) << '\t';
    for (size_t k = 0; k < r.token_ids.size(); ++k) out << (k ? " " : "") << r.token_ids[k];
    out << '\n';
  }
  return out.str();
}

Manifest ParseManifest(const std::string& text, const std::string& base_dir) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) Fail(ErrorCode::kFormat, "empty manifest");
  const auto head = SplitTabs(line);
  if (head.size() != 2 || head[0] != kHeader) Fail(ErrorCode::kFormat, "not a manifest");
  if (head[1] != std::to_string(kManifestVersion)) {
    Fail(ErrorCode::kFormat, "unsupported manifest version " + head[1]);
  }
  Manifest m;
  m.base_dir = base_dir;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string where = "manifest line " + std::to_string(lineno);
    const auto tab = line.find('\t');
    const std::string kind = line.substr(0, tab);
    try {
      if (kind == "tokenizer") {
        m.tokenizer = Tokenizer::Deserialize(line.substr(tab + 1));
      } else if (kind == "speaker") {
        const auto f = SplitTabs(line);
        Require(f.size() == 4, "bad speaker record", ErrorCode::kFormat);
        Require(std::stoi(f[1]) == m.speakers.size(), "speaker indices not dense",
                ErrorCode::kFormat);
        Require(!m.speakers.Contains(f[2]), "duplicate speaker " + f[2], ErrorCode::kFormat);
        m.speakers.Add(f[2], ParseStats(f[3]));
      } else if (kind == "utt") {
        const auto f = SplitTabs(line);
        Require(f.size() == 7, "bad utterance record", ErrorCode::kFormat);
        UtteranceRecord r;
        r.id = f[1];
        r.speaker_id = f[2];
        r.frames = std::stoi(f[3]);
        r.cache_path = f[4];
        r.textless = f[5] == "1";
        std::istringstream toks(f[6]);
        for (int64_t t; toks >> t;) {
          Require(t >= 0 && t < m.tokenizer.vocab_size(), "token id out of range", ErrorCode::kFormat);
          r.token_ids.push_back(t);
        }
        r.Validate();
        Require(m.speakers.Contains(r.speaker_id), "unknown speaker " + r.speaker_id,
                ErrorCode::kFormat);
        m.records.push_back(std::move(r));
      } else {
        Fail(ErrorCode::kFormat, "unknown record kind '" + kind + "'");
      }
    } catch (const Error& e) {
      Fail(ErrorCode::kFormat, where + ": " + e.what());
    } catch (const std::logic_error& e) {
      Fail(ErrorCode::kFormat, where + ": malformed number");
    }
  }
  return m;
}

void WriteManifest(const std::string& path, const Manifest& m) {
  io::AtomicWriteFile(path, SerializeManifest(m));
}

Manifest ReadManifest(const std::string& path) {
  return ParseManifest(io::ReadFile(path), fs::path(path).parent_path().string());
}

}  // namespace karaoker::data
