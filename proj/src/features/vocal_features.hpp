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

// Frame-level voice descriptors: pitch, harmonicity, cepstral peak
// prominence, intensity, formants and octave. All extractors share the mel
// hop and centre frame t at sample t * hop, so every track has
// ceil(n / hop) frames, the same as the mel spectrogram.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "features/mel.hpp"
#include "features/waveform.hpp"

namespace karaoker::features {

struct FrameTrack {
  std::vector<double> values;
  std::vector<uint8_t> voiced;  // 1 = voiced/valid
  double hop_seconds = 0.0;

  size_t size() const { return values.size(); }
  size_t voiced_count() const;
  std::vector<double> voiced_values() const;
};

struct PitchConfig {
  double floor_hz = 70.0;
  double ceiling_hz = 800.0;
  double voicing_threshold = 0.45;  // normalised autocorrelation
  double silence_threshold = 0.03;  // local peak relative to global peak
  double octave_cost = 0.01;        // per octave, favours higher candidates
  double periods_per_window = 3.0;
  int hop_length = 256;

  // Analysis window in samples (even), long enough for the pitch floor.
  int WindowLength(int sample_rate) const;
  void Validate() const;
};

// HNR is clamped to this range to keep r -> 1 finite.
inline constexpr double kHnrMinDb = -20.0;
inline constexpr double kHnrMaxDb = 60.0;

struct CepstralConfig {
  // Power-cepstrum smoothing along quefrency before peak picking.
  double smoothing_seconds = 0.0005;
  // Trend line is fitted from this quefrency to the Nyquist quefrency.
  double trend_start_seconds = 0.001;
};

struct FormantConfig {
  int lpc_order = 12;
  double analysis_rate = 10000.0;  // max formant = analysis_rate / 2
  double window_seconds = 0.025;
  double preemphasis_from_hz = 50.0;
  double min_formant_hz = 90.0;
  double max_bandwidth_hz = 600.0;
};

// Result of the joint autocorrelation pass: F0 and HNR share voicing.
struct Periodicity {
  FrameTrack f0;
  FrameTrack hnr;
};

Periodicity AnalyzePeriodicity(const Waveform& wave, const PitchConfig& cfg);
FrameTrack ExtractF0(const Waveform& wave, const PitchConfig& cfg);
FrameTrack ExtractHnr(const Waveform& wave, const PitchConfig& cfg);

// 10 * log10(r / (1 - r)), clamped to [kHnrMinDb, kHnrMaxDb].
double HnrFromCorrelation(double r);

// Frame RMS over mel-sized windows; every frame is marked valid.
FrameTrack ExtractRms(const Waveform& wave, const MelConfig& cfg);

// CPP in dB of a single analysis frame (no voicing decision).
double CepstralPeakProminence(std::span<const double> frame, int sample_rate,
                              const PitchConfig& pitch, const CepstralConfig& cfg);

// Per-frame CPP; frames outside `voiced` are zero. Uses the F0 voicing
// decision when `voiced` is empty.
FrameTrack ExtractCpp(const Waveform& wave, const PitchConfig& pitch,
                      const CepstralConfig& cfg, std::span<const uint8_t> voiced = {});

// F1..F4 from LPC roots, ascending; missing formants are 0.
std::array<FrameTrack, 4> ExtractFormants(const Waveform& wave, const PitchConfig& pitch,
                                          const FormantConfig& cfg,
                                          std::span<const uint8_t> voiced = {});

inline constexpr double kOctaveReferenceHz = 16.352;  // C0

// log2(f0 / C0) on voiced frames, 0 elsewhere.
FrameTrack ComputeOctave(const FrameTrack& f0);

// Nearest-neighbour resample: out[i] = values[floor(i * S / T)].
std::vector<double> AlignToMel(const FrameTrack& track, int frames);

// Rounds every value to float32 precision (the cache stores float32).
void QuantizeToFloat(FrameTrack& track);

}  // namespace karaoker::features
