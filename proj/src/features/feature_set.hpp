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

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "common/kv_config.hpp"
#include "common/log.hpp"
#include "features/mel.hpp"
#include "features/vocal_features.hpp"

namespace karaoker::features {

// Fixed channel order of the conditioning tensor.
enum class Feature : int {
  kF0 = 0,
  kHnr = 1,
  kCpp = 2,
  kRms = 3,
  kF1 = 4,
  kF2 = 5,
  kF3 = 6,
  kF4 = 7,
  kOctave = 8,
};

inline constexpr int kNumFeatures = 9;
inline constexpr std::array<std::string_view, kNumFeatures> kFeatureNames = {
    "f0", "hnr", "cpp", "rms", "f1", "f2", "f3", "f4", "octave"};

std::optional<Feature> FeatureFromName(std::string_view name);

// Nine tracks, all of length frames() (the paired mel's T).
struct FeatureSet {
  std::array<FrameTrack, kNumFeatures> tracks;

  FrameTrack& operator[](Feature f) { return tracks[static_cast<int>(f)]; }
  const FrameTrack& operator[](Feature f) const { return tracks[static_cast<int>(f)]; }
  int frames() const { return static_cast<int>(tracks[0].values.size()); }

  // Throws unless all tracks share one length.
  void Validate() const;
};

struct FeatureConfig {
  MelConfig mel;
  PitchConfig pitch;
  CepstralConfig cepstral;
  FormantConfig formant;

  static FeatureConfig FromKv(const KvConfig& kv);
  void ToKv(KvConfig& kv) const;
};

struct Utterance {
  FeatureSet features;  // raw, un-normalised
  MelSpectrogram mel;
};

// Full analysis of one waveform. Resamples to the configured rate first.
Utterance AnalyzeWaveform(const Waveform& wave, const FeatureConfig& cfg);

// Robust per-feature range of one speaker.
struct FeatureRange {
  double p5 = 0.0;
  double p95 = 0.0;
};

struct SpeakerStats {
  std::array<FeatureRange, kNumFeatures> ranges;

  FeatureRange& operator[](Feature f) { return ranges[static_cast<int>(f)]; }
  const FeatureRange& operator[](Feature f) const { return ranges[static_cast<int>(f)]; }
};

// p5/p95 over the voiced frames of all given sets (all frames for RMS).
// Features with no voiced frames get the degenerate range [0, 0].
SpeakerStats ComputeSpeakerStats(const std::vector<const FeatureSet*>& sets);

// Bounds applied after normalisation.
inline constexpr double kNormMin = -0.5;
inline constexpr double kNormMax = 1.5;

// Maps each track so the speaker's [p5, p95] becomes [0, 1], clamps to
// [kNormMin, kNormMax] and zeroes unvoiced frames. A degenerate range gives
// 0.5 on voiced frames plus a warning.
FeatureSet NormalizeContours(const FeatureSet& fs, const SpeakerStats& stats,
                             Diagnostics* diag = nullptr);

}  // namespace karaoker::features
