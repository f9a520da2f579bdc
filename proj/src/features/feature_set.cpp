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

#include "features/feature_set.hpp"

#include <algorithm>
#include <cmath>

#include "common/error.hpp"
#include "features/dsp.hpp"

namespace karaoker::features {

std::optional<Feature> FeatureFromName(std::string_view name) {
  for (int i = 0; i < kNumFeatures; ++i) {
    if (kFeatureNames[i] == name) return static_cast<Feature>(i);
  }
  return std::nullopt;
}

void FeatureSet::Validate() const {
  const size_t n = tracks[0].values.size();
  for (int i = 0; i < kNumFeatures; ++i) {
    Require(tracks[i].values.size() == n && tracks[i].voiced.size() == n,
            "feature track '" + std::string(kFeatureNames[i]) + "' has mismatched length");
  }
}

FeatureConfig FeatureConfig::FromKv(const KvConfig& kv) {
  FeatureConfig c;
  c.mel = MelConfig::FromKv(kv);
  c.pitch.floor_hz = kv.GetDouble("pitch.floor_hz", c.pitch.floor_hz);
  c.pitch.ceiling_hz = kv.GetDouble("pitch.ceiling_hz", c.pitch.ceiling_hz);
  c.pitch.voicing_threshold = kv.GetDouble("pitch.voicing_threshold", c.pitch.voicing_threshold);
  c.pitch.silence_threshold = kv.GetDouble("pitch.silence_threshold", c.pitch.silence_threshold);
  c.pitch.octave_cost = kv.GetDouble("pitch.octave_cost", c.pitch.octave_cost);
  c.pitch.hop_length = c.mel.hop_length;
  c.pitch.Validate();
  c.cepstral.smoothing_seconds = kv.GetDouble("cpp.smoothing_seconds", c.cepstral.smoothing_seconds);
  c.cepstral.trend_start_seconds =
      kv.GetDouble("cpp.trend_start_seconds", c.cepstral.trend_start_seconds);
  c.formant.lpc_order = static_cast<int>(kv.GetInt("formant.lpc_order", c.formant.lpc_order));
  c.formant.analysis_rate = kv.GetDouble("formant.analysis_rate", c.formant.analysis_rate);
  c.formant.window_seconds = kv.GetDouble("formant.window_seconds", c.formant.window_seconds);
  c.formant.max_bandwidth_hz = kv.GetDouble("formant.max_bandwidth_hz", c.formant.max_bandwidth_hz);
  return c;
}

void FeatureConfig::ToKv(KvConfig& kv) const {
  mel.ToKv(kv);
  kv.Set("pitch.floor_hz", FormatKvDouble(pitch.floor_hz));
  kv.Set("pitch.ceiling_hz", FormatKvDouble(pitch.ceiling_hz));
  kv.Set("pitch.voicing_threshold", FormatKvDouble(pitch.voicing_threshold));
  kv.Set("pitch.silence_threshold", FormatKvDouble(pitch.silence_threshold));
  kv.Set("pitch.octave_cost", FormatKvDouble(pitch.octave_cost));
  kv.Set("cpp.smoothing_seconds", FormatKvDouble(cepstral.smoothing_seconds));
  kv.Set("cpp.trend_start_seconds", FormatKvDouble(cepstral.trend_start_seconds));
  kv.Set("formant.lpc_order", std::to_string(formant.lpc_order));
  kv.Set("formant.analysis_rate", FormatKvDouble(formant.analysis_rate));
  kv.Set("formant.window_seconds", FormatKvDouble(formant.window_seconds));
  kv.Set("formant.max_bandwidth_hz", FormatKvDouble(formant.max_bandwidth_hz));
}

Utterance AnalyzeWaveform(const Waveform& input, const FeatureConfig& cfg) {
  input.Validate();
  Waveform wave = input;
  if (wave.sample_rate != cfg.mel.sample_rate) {
    wave.samples = Resample(input.samples, input.sample_rate, cfg.mel.sample_rate);
    wave.sample_rate = cfg.mel.sample_rate;
  }
  PitchConfig pitch = cfg.pitch;
  pitch.hop_length = cfg.mel.hop_length;

  Utterance utt;
  utt.mel = ComputeMel(wave, cfg.mel);
  auto periodicity = AnalyzePeriodicity(wave, pitch);
  const auto& mask = periodicity.f0.voiced;
  FeatureSet& fs = utt.features;
  fs[Feature::kF0] = periodicity.f0;
  fs[Feature::kHnr] = periodicity.hnr;
  fs[Feature::kCpp] = ExtractCpp(wave, pitch, cfg.cepstral, mask);
  fs[Feature::kRms] = ExtractRms(wave, cfg.mel);
  auto formants = ExtractFormants(wave, pitch, cfg.formant, mask);
  for (int i = 0; i < 4; ++i) fs.tracks[static_cast<int>(Feature::kF1) + i] = formants[i];
  fs[Feature::kOctave] = ComputeOctave(periodicity.f0);
  for (auto& tr : fs.tracks) QuantizeToFloat(tr);
  fs.Validate();
  Require(fs.frames() == utt.mel.frames(), "feature/mel frame count mismatch",
          ErrorCode::kInternal);
  return utt;
}

SpeakerStats ComputeSpeakerStats(const std::vector<const FeatureSet*>& sets) {
  SpeakerStats stats;
  for (int f = 0; f < kNumFeatures; ++f) {
    std::vector<double> pool;
    for (const FeatureSet* fs : sets) {
      const auto& tr = fs->tracks[f];
      for (size_t i = 0; i < tr.values.size(); ++i) {
        if (tr.voiced[i]) pool.push_back(tr.values[i]);
      }
    }
    if (pool.empty()) {
      stats.ranges[f] = {0.0, 0.0};
      continue;
    }
    stats.ranges[f] = {Percentile(pool, 5.0), Percentile(pool, 95.0)};
  }
  return stats;
}

FeatureSet NormalizeContours(const FeatureSet& fs, const SpeakerStats& stats,
                             Diagnostics* diag) {
  fs.Validate();
  FeatureSet out = fs;
  for (int f = 0; f < kNumFeatures; ++f) {
    const auto& range = stats.ranges[f];
    auto& tr = out.tracks[f];
    const double span = range.p95 - range.p5;
    const bool degenerate = !(span > 0.0);
    if (degenerate && tr.voiced_count() > 0) {
      WarnTo(diag, "degenerate range for feature '" + std::string(kFeatureNames[f]) +
                       "'; using constant 0.5");
    }
    for (size_t i = 0; i < tr.values.size(); ++i) {
      if (!tr.voiced[i]) {
        tr.values[i] = 0.0;
        continue;
      }
      const double v = degenerate ? 0.5 : (tr.values[i] - range.p5) / span;
      tr.values[i] = std::clamp(v, kNormMin, kNormMax);
    }
  }
  return out;
}

}  // namespace karaoker::features
