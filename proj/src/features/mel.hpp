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

#include <vector>

#include "common/kv_config.hpp"
#include "features/dsp.hpp"
#include "features/waveform.hpp"

namespace karaoker::features {

// Tacotron 2 style front end: magnitude STFT, Slaney-normalised mel filter
// bank, natural log with a floor.
struct MelConfig {
  int sample_rate = 22050;
  int n_fft = 1024;
  int win_length = 1024;
  int hop_length = 256;
  int n_mels = 80;
  double fmin = 0.0;
  double fmax = 8000.0;
  double log_floor = 1e-5;

  StftConfig stft() const { return {n_fft, win_length, hop_length}; }
  double hop_seconds() const { return static_cast<double>(hop_length) / sample_rate; }
  double log_floor_value() const;

  void Validate() const;
  static MelConfig FromKv(const KvConfig& kv);
  void ToKv(KvConfig& kv) const;
};

// n_mels x frames log-mel matrix, stored bin-major (row m is one mel band).
class MelSpectrogram {
 public:
  MelSpectrogram() = default;
  MelSpectrogram(int n_mels, int frames, float fill = 0.0f)
      : n_mels_(n_mels), frames_(frames),
        bins_(static_cast<size_t>(n_mels) * static_cast<size_t>(frames), fill) {}
  MelSpectrogram(int n_mels, int frames, std::vector<float> bins);

  int n_mels() const { return n_mels_; }
  int frames() const { return frames_; }
  float& at(int m, int t) { return bins_[static_cast<size_t>(m) * frames_ + t]; }
  float at(int m, int t) const { return bins_[static_cast<size_t>(m) * frames_ + t]; }
  const std::vector<float>& data() const { return bins_; }
  std::vector<float>& data() { return bins_; }

  bool AllFinite() const;

 private:
  int n_mels_ = 0;
  int frames_ = 0;
  std::vector<float> bins_;
};

double HzToMel(double hz);
double MelToHz(double mel);

// n_mels x (n_fft/2 + 1) triangular filters with Slaney area normalisation.
std::vector<std::vector<double>> MelFilterbank(const MelConfig& cfg);

// Throws kAudioTooShort when the waveform is shorter than one window.
MelSpectrogram ComputeMel(const Waveform& wave, const MelConfig& cfg);

// Linear magnitude spectrogram (frames x bins) used by both the mel front end
// and phase reconstruction.
std::vector<std::vector<double>> MagnitudeSpectrogram(const Waveform& wave,
                                                      const MelConfig& cfg);

}  // namespace karaoker::features
