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

#include "features/mel.hpp"

#include <algorithm>
#include <cmath>

#include "common/error.hpp"

namespace karaoker::features {

namespace {
// Slaney mel scale: linear below 1 kHz, logarithmic above.
constexpr double kMinLogHz = 1000.0;
constexpr double kLinearStep = 200.0 / 3.0;
constexpr double kMinLogMel = kMinLogHz / kLinearStep;
const double kLogStep = std::log(6.4) / 27.0;
}  // namespace

double MelConfig::log_floor_value() const { return std::log(log_floor); }

void MelConfig::Validate() const {
  Require(sample_rate > 0, "mel: sample_rate must be positive");
  Require(n_fft >= 16, "mel: n_fft too small");
  Require(win_length > 0 && win_length <= n_fft, "mel: win_length must be in (0, n_fft]");
  Require(hop_length > 0, "mel: hop_length must be positive");
  Require(n_mels > 0, "mel: n_mels must be positive");
  Require(fmin >= 0.0 && fmax > fmin && fmax <= sample_rate / 2.0,
          "mel: need 0 <= fmin < fmax <= sample_rate/2");
  Require(log_floor > 0.0, "mel: log_floor must be positive");
}

MelConfig MelConfig::FromKv(const KvConfig& kv) {
  MelConfig c;
  c.sample_rate = static_cast<int>(kv.GetInt("audio.sample_rate", c.sample_rate));
  c.n_fft = static_cast<int>(kv.GetInt("mel.n_fft", c.n_fft));
  c.win_length = static_cast<int>(kv.GetInt("mel.win_length", c.win_length));
  c.hop_length = static_cast<int>(kv.GetInt("mel.hop_length", c.hop_length));
  c.n_mels = static_cast<int>(kv.GetInt("mel.n_mels", c.n_mels));
  c.fmin = kv.GetDouble("mel.fmin", c.fmin);
  c.fmax = kv.GetDouble("mel.fmax", c.fmax);
  c.log_floor = kv.GetDouble("mel.log_floor", c.log_floor);
  c.Validate();
  return c;
}

void MelConfig::ToKv(KvConfig& kv) const {
  kv.Set("audio.sample_rate", std::to_string(sample_rate));
  kv.Set("mel.n_fft", std::to_string(n_fft));
  kv.Set("mel.win_length", std::to_string(win_length));
  kv.Set("mel.hop_length", std::to_string(hop_length));
  kv.Set("mel.n_mels", std::to_string(n_mels));
  kv.Set("mel.fmin", FormatKvDouble(fmin));
  kv.Set("mel.fmax", FormatKvDouble(fmax));
  kv.Set("mel.log_floor", FormatKvDouble(log_floor));
}

MelSpectrogram::MelSpectrogram(int n_mels, int frames, std::vector<float> bins)
    : n_mels_(n_mels), frames_(frames), bins_(std::move(bins)) {
  Require(bins_.size() == static_cast<size_t>(n_mels) * static_cast<size_t>(frames),
          "mel matrix size does not match its shape");
}

bool MelSpectrogram::AllFinite() const {
  return std::all_of(bins_.begin(), bins_.end(), [](float v) { return std::isfinite(v); });
}

double HzToMel(double hz) {
  if (hz < kMinLogHz) return hz / kLinearStep;
  return kMinLogMel + std::log(hz / kMinLogHz) / kLogStep;
}

double MelToHz(double mel) {
  if (mel < kMinLogMel) return mel * kLinearStep;
  return kMinLogHz * std::exp(kLogStep * (mel - kMinLogMel));
}

std::vector<std::vector<double>> MelFilterbank(const MelConfig& cfg) {
  const int bins = cfg.n_fft / 2 + 1;
  std::vector<double> fft_hz(static_cast<size_t>(bins));
  for (int k = 0; k < bins; ++k) fft_hz[k] = static_cast<double>(k) * cfg.sample_rate / cfg.n_fft;

  const double mel_lo = HzToMel(cfg.fmin);
  const double mel_hi = HzToMel(cfg.fmax);
  std::vector<double> edges(static_cast<size_t>(cfg.n_mels + 2));
  for (int i = 0; i < cfg.n_mels + 2; ++i) {
    edges[i] = MelToHz(mel_lo + (mel_hi - mel_lo) * i / (cfg.n_mels + 1));
  }

  std::vector<std::vector<double>> fb(static_cast<size_t>(cfg.n_mels),
                                      std::vector<double>(static_cast<size_t>(bins), 0.0));
  for (int m = 0; m < cfg.n_mels; ++m) {
    const double lo = edges[m], c = edges[m + 1], hi = edges[m + 2];
    const double enorm = 2.0 / (hi - lo);
    for (int k = 0; k < bins; ++k) {
      const double up = (fft_hz[k] - lo) / (c - lo);
      const double down = (hi - fft_hz[k]) / (hi - c);
      fb[m][k] = std::max(0.0, std::min(up, down)) * enorm;
    }
  }
  return fb;
}

std::vector<std::vector<double>> MagnitudeSpectrogram(const Waveform& wave,
                                                      const MelConfig& cfg) {
  const auto spec = Stft(wave.samples, cfg.stft());
  std::vector<std::vector<double>> mag(spec.size());
  for (size_t t = 0; t < spec.size(); ++t) {
    mag[t].resize(spec[t].size());
    for (size_t k = 0; k < spec[t].size(); ++k) mag[t][k] = std::abs(spec[t][k]);
  }
  return mag;
}

MelSpectrogram ComputeMel(const Waveform& wave, const MelConfig& cfg) {
  wave.Validate();
  cfg.Validate();
  Require(wave.sample_rate == cfg.sample_rate, "mel: waveform rate " +
          std::to_string(wave.sample_rate) + " Hz differs from configured " +
          std::to_string(cfg.sample_rate) + " Hz");
  if (wave.samples.size() < static_cast<size_t>(cfg.win_length)) {
    Fail(ErrorCode::kAudioTooShort, "audio too short");
  }
  const auto fb = MelFilterbank(cfg);
  const auto mag = MagnitudeSpectrogram(wave, cfg);
  const int frames = static_cast<int>(mag.size());
  MelSpectrogram mel(cfg.n_mels, frames);
  for (int m = 0; m < cfg.n_mels; ++m) {
    const auto& filt = fb[m];
    for (int t = 0; t < frames; ++t) {
      double acc = 0.0;
      for (size_t k = 0; k < filt.size(); ++k) acc += filt[k] * mag[t][k];
      mel.at(m, t) = static_cast<float>(std::log(std::max(acc, cfg.log_floor)));
    }
  }
  return mel;
}

}  // namespace karaoker::features
