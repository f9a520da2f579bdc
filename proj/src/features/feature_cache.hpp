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

// Per-utterance feature cache (".kkf"), little-endian:
//
//   char[4]  "KKFC"
//   u32      version (= 1)
//   u32      sample_rate
//   u32      hop_length (samples)
//   u32      frames T
//   u32      track count (= 9)
//   u32      mel bins
//   str      utterance id        (str = u32 byte length + bytes)
//   str      speaker id
//   9 x { str name; f32[T] values; u8[T] voiced }   in Feature order
//   f32[mel_bins * T]  log-mel, bin-major

#include <string>

#include "features/feature_set.hpp"

namespace karaoker::features {

inline constexpr uint32_t kFeatureCacheVersion = 1;

struct CachedUtterance {
  std::string utterance_id;
  std::string speaker_id;
  int sample_rate = 0;
  int hop_length = 0;
  Utterance data;
};

std::string SerializeFeatureCache(const CachedUtterance& entry);
CachedUtterance ParseFeatureCache(const std::string& bytes);

void WriteFeatureCache(const std::string& path, const CachedUtterance& entry);
CachedUtterance ReadFeatureCache(const std::string& path);

// Standalone mel container (".kkm"): "KKML", u32 version, u32 bins,
// u32 frames, f32[bins * frames] bin-major.
void WriteMelFile(const std::string& path, const MelSpectrogram& mel);
MelSpectrogram ReadMelFile(const std::string& path);

}  // namespace karaoker::features
