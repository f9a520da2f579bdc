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

#include "features/feature_cache.hpp"

#include <sstream>

#include "common/binary_io.hpp"
#include "common/error.hpp"

namespace karaoker::features {

namespace {

constexpr uint32_t kMelFileVersion = 1;
constexpr uint32_t kMaxFrames = 1u << 24;

std::vector<float> ToFloat(const std::vector<double>& v) {
  return {v.begin(), v.end()};
}

}  // namespace

std::string SerializeFeatureCache(const CachedUtterance& entry) {
  const auto& fs = entry.data.features;
  const auto& mel = entry.data.mel;
  fs.Validate();
  Require(fs.frames() == mel.frames(), "cache: feature and mel frame counts differ");
  std::ostringstream out;
  out.write("KKFC", 4);
  io::WritePod<uint32_t>(out, kFeatureCacheVersion);
  io::WritePod<uint32_t>(out, static_cast<uint32_t>(entry.sample_rate));
  io::WritePod<uint32_t>(out, static_cast<uint32_t>(entry.hop_length));
  io::WritePod<uint32_t>(out, static_cast<uint32_t>(fs.frames()));
  io::WritePod<uint32_t>(out, kNumFeatures);
  io::WritePod<uint32_t>(out, static_cast<uint32_t>(mel.n_mels()));
  io::WriteString(out, entry.utterance_id);
  io::WriteString(out, entry.speaker_id);
  for (int f = 0; f < kNumFeatures; ++f) {
    io::WriteString(out, std::string(kFeatureNames[f]));
    io::WriteArray(out, ToFloat(fs.tracks[f].values));
    io::WriteArray(out, fs.tracks[f].voiced);
  }
  io::WriteArray(out, mel.data());
  return out.str();
}

CachedUtterance ParseFeatureCache(const std::string& bytes) {
  std::istringstream in(bytes);
  io::ExpectMagic(in, "KKFC", "feature cache");
  const auto version = io::ReadPod<uint32_t>(in);
  if (version != kFeatureCacheVersion) {
    Fail(ErrorCode::kFormat, "unsupported feature cache version " + std::to_string(version));
  }
  CachedUtterance entry;
  entry.sample_rate = static_cast<int>(io::ReadPod<uint32_t>(in));
  entry.hop_length = static_cast<int>(io::ReadPod<uint32_t>(in));
  const auto frames = io::ReadPod<uint32_t>(in);
  const auto tracks = io::ReadPod<uint32_t>(in);
  const auto bins = io::ReadPod<uint32_t>(in);
  if (tracks != kNumFeatures) Fail(ErrorCode::kFormat, "feature cache: expected 9 tracks");
  if (frames > kMaxFrames || bins == 0 || bins > 4096) {
    Fail(ErrorCode::kFormat, "feature cache: implausible dimensions");
  }
  entry.utterance_id = io::ReadString(in);
  entry.speaker_id = io::ReadString(in);
  const double hop_s = entry.sample_rate > 0
                           ? static_cast<double>(entry.hop_length) / entry.sample_rate
                           : 0.0;
  for (int f = 0; f < kNumFeatures; ++f) {
    const std::string name = io::ReadString(in);
    if (name != kFeatureNames[f]) {
      Fail(ErrorCode::kFormat, "feature cache: unexpected track '" + name + "'");
    }
    auto values = io::ReadArray<float>(in, frames);
    auto& tr = entry.data.features.tracks[f];
    tr.values.assign(values.begin(), values.end());
    tr.voiced = io::ReadArray<uint8_t>(in, frames);
    tr.hop_seconds = hop_s;
  }
  entry.data.mel = MelSpectrogram(static_cast<int>(bins), static_cast<int>(frames),
                                  io::ReadArray<float>(in, static_cast<size_t>(bins) * frames));
  return entry;
}

void WriteFeatureCache(const std::string& path, const CachedUtterance& entry) {
  io::AtomicWriteFile(path, SerializeFeatureCache(entry));
}

CachedUtterance ReadFeatureCache(const std::string& path) {
  return ParseFeatureCache(io::ReadFile(path));
}

void WriteMelFile(const std::string& path, const MelSpectrogram& mel) {
  std::ostringstream out;
  out.write("KKML", 4);
  io::WritePod<uint32_t>(out, kMelFileVersion);
  io::WritePod<uint32_t>(out, static_cast<uint32_t>(mel.n_mels()));
  io::WritePod<uint32_t>(out, static_cast<uint32_t>(mel.frames()));
  io::WriteArray(out, mel.data());
  io::AtomicWriteFile(path, out.str());
}

MelSpectrogram ReadMelFile(const std::string& path) {
  std::istringstream in(io::ReadFile(path));
  io::ExpectMagic(in, "KKML", "mel");
  const auto version = io::ReadPod<uint32_t>(in);
  if (version != kMelFileVersion) {
    Fail(ErrorCode::kFormat, "unsupported mel file version " + std::to_string(version));
  }
  const auto bins = io::ReadPod<uint32_t>(in);
  const auto frames = io::ReadPod<uint32_t>(in);
  if (frames > kMaxFrames || bins == 0 || bins > 4096) {
    Fail(ErrorCode::kFormat, "mel file: implausible dimensions");
  }
  return MelSpectrogram(static_cast<int>(bins), static_cast<int>(frames),
                        io::ReadArray<float>(in, static_cast<size_t>(bins) * frames));
}

}  // namespace karaoker::features
