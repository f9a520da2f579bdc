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

#include "infer/template.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "common/error.hpp"
#include "features/dsp.hpp"
#include "features/vocal_features.hpp"

namespace karaoker::infer {

using features::Feature;
using features::FeatureSet;

Deviations Deviations::Parse(const std::string& text) {
  Deviations d;
  std::istringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    Require(eq != std::string::npos, "deviation must look like name=percent: " + item);
    const auto name = item.substr(0, eq);
    const auto f = features::FeatureFromName(name);
    Require(f.has_value(), "unknown feature in deviation: " + name);
    double value = 0.0;
    try {
      size_t used = 0;
      value = std::stod(item.substr(eq + 1), &used);
      Require(used == item.size() - eq - 1, "bad deviation value: " + item);
    } catch (const std::logic_error&) {
      Fail(ErrorCode::kInvalidArgument, "bad deviation value: " + item);
    }
    d.percent[static_cast<size_t>(*f)] = value;
  }
  d.Validate();
  return d;
}

void Deviations::Validate() const {
  for (int i = 0; i < features::kNumFeatures; ++i) {
    const double v = percent[static_cast<size_t>(i)];
    Require(std::isfinite(v) && v >= -kMaxDeviation && v <= kMaxDeviation,
            "deviation for " + std::string(features::kFeatureNames[static_cast<size_t>(i)]) +
                " must be within [-50, 50] percent");
  }
}

bool Deviations::empty() const {
  return std::all_of(percent.begin(), percent.end(), [](double v) { return v == 0.0; });
}

FeatureSet SmoothTemplate(const FeatureSet& fs) {
  FeatureSet out = fs;
  for (Feature f : {Feature::kF0, Feature::kF1, Feature::kF2, Feature::kF3, Feature::kF4}) {
    auto& tr = out[f];
    size_t t = 0;
    while (t < tr.size()) {
      if (!tr.voiced[t]) {
        ++t;
        continue;
      }
      size_t end = t;
      while (end < tr.size() && tr.voiced[end]) ++end;
      const std::vector<double> run(tr.values.begin() + static_cast<std::ptrdiff_t>(t),
                                    tr.values.begin() + static_cast<std::ptrdiff_t>(end));
      const auto filtered = features::MedianFilter(run, kTemplateMedianWindow);
      std::copy(filtered.begin(), filtered.end(), tr.values.begin() + static_cast<std::ptrdiff_t>(t));
      t = end;
    }
  }
  auto octave = features::ComputeOctave(out[Feature::kF0]);
  octave.hop_seconds = out[Feature::kOctave].hop_seconds;
  out[Feature::kOctave] = std::move(octave);
  return out;
}

FeatureSet MapToSpeakerRange(const FeatureSet& fs, const features::SpeakerStats& stats, Diagnostics* diag) {
  fs.Validate();
  const auto own = features::ComputeSpeakerStats({&fs});
  FeatureSet out = fs;
  for (int i = 0; i < features::kNumFeatures; ++i) {
    const auto f = static_cast<Feature>(i);
    const auto& src = own[f];
    const auto& dst = stats[f];
    auto& tr = out[f];
    const double span = src.p95 - src.p5;
    if (!(std::abs(span) > 1e-12)) {
      if (tr.voiced_count() > 0) {
        WarnTo(diag, "template range of " + std::string(features::kFeatureNames[static_cast<size_t>(i)]) +
                         " is degenerate; using the speaker's midpoint");
      }
      for (size_t t = 0; t < tr.size(); ++t) {
        if (tr.voiced[t]) tr.values[t] = 0.5 * (dst.p5 + dst.p95);
      }
      continue;
    }
    const double scale = (dst.p95 - dst.p5) / span;
    for (size_t t = 0; t < tr.size(); ++t) {
      if (tr.voiced[t]) tr.values[t] = dst.p5 + (tr.values[t] - src.p5) * scale;
    }
  }
  return out;
}

FeatureSet MapTemplate(const FeatureSet& fs, const features::SpeakerStats& stats, Diagnostics* diag) {
  return features::NormalizeContours(MapToSpeakerRange(fs, stats, diag), stats, diag);
}

FeatureSet ApplyDeviations(const FeatureSet& fs, const Deviations& devs) {
  devs.Validate();
  FeatureSet out = fs;
  for (int i = 0; i < features::kNumFeatures; ++i) {
    const double factor = 1.0 + devs.percent[static_cast<size_t>(i)] / 100.0;
    auto& tr = out.tracks[static_cast<size_t>(i)];
    for (size_t t = 0; t < tr.size(); ++t) {
      if (tr.voiced[t]) tr.values[t] = std::clamp(tr.values[t] * factor, features::kNormMin, features::kNormMax);
    }
  }
  return out;
}

}  // namespace karaoker::infer
