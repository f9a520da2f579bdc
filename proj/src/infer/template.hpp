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
#include <string>

#include "common/log.hpp"
#include "features/feature_set.hpp"

namespace karaoker::infer {

inline constexpr double kMaxDeviation = 50.0;
inline constexpr int kTemplateMedianWindow = 5;

// Relative percentage change per feature, each within [-50, 50].
struct Deviations {
  std::array<double, features::kNumFeatures> percent{};

  // "f0=+5,rms=-10"; an empty string gives no deviations.
  static Deviations Parse(const std::string& text);
  void Validate() const;
  bool empty() const;
};

// Median filter (window 5) over each voiced run of F0 and F1..F4; octave is
// recomputed from the filtered F0.
features::FeatureSet SmoothTemplate(const features::FeatureSet& fs);

// Per feature, the affine map sending the template's own [p5, p95] onto the
// speaker's. A degenerate template range maps to the speaker's midpoint.
features::FeatureSet MapToSpeakerRange(const features::FeatureSet& fs, const features::SpeakerStats& stats,
                                       Diagnostics* diag = nullptr);

// MapToSpeakerRange followed by NormalizeContours.
features::FeatureSet MapTemplate(const features::FeatureSet& fs, const features::SpeakerStats& stats,
                                 Diagnostics* diag = nullptr);

// value * (1 + dev / 100) on voiced frames, clamped to the normalisation
// bounds.
features::FeatureSet ApplyDeviations(const features::FeatureSet& fs, const Deviations& devs);

}  // namespace karaoker::infer
