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

#include "features/vocal_features.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>

#include "common/error.hpp"
#include "features/dsp.hpp"

namespace karaoker::features {

size_t FrameTrack::voiced_count() const {
  return static_cast<size_t>(std::count(voiced.begin(), voiced.end(), uint8_t{1}));
}

std::vector<double> FrameTrack::voiced_values() const {
  std::vector<double> out;
  for (size_t i = 0; i < values.size(); ++i) {
    if (voiced[i]) out.push_back(values[i]);
  }
  return out;
}

int PitchConfig::WindowLength(int sample_rate) const {
  int len = static_cast<int>(std::ceil(periods_per_window * sample_rate / floor_hz));
  return len + (len & 1);
}

void PitchConfig::Validate() const {
  Require(floor_hz > 0.0 && ceiling_hz > floor_hz, "pitch: need 0 < floor < ceiling");
  Require(voicing_threshold > 0.0 && voicing_threshold < 1.0,
          "pitch: voicing threshold must be in (0, 1)");
  Require(hop_length > 0, "pitch: hop_length must be positive");
  Require(periods_per_window >= 1.0, "pitch: periods_per_window must be >= 1");
}

void QuantizeToFloat(FrameTrack& track) {
  for (double& v : track.values) v = static_cast<double>(static_cast<float>(v));
}

double HnrFromCorrelation(double r) {
  if (r >= 1.0) return kHnrMaxDb;
  if (r <= 0.0) return kHnrMinDb;
  return std::clamp(10.0 * std::log10(r / (1.0 - r)), kHnrMinDb, kHnrMaxDb);
}

namespace {

int NextPow2(int n) {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

FrameTrack EmptyTrack(int frames, double hop_seconds) {
  FrameTrack t;
  t.values.assign(static_cast<size_t>(frames), 0.0);
  t.voiced.assign(static_cast<size_t>(frames), 0);
  t.hop_seconds = hop_seconds;
  return t;
}

float GlobalPeak(std::span<const float> x) {
  float peak = 0.0f;
  for (float v : x) peak = std::max(peak, std::abs(v));
  return peak;
}

// Autocorrelation of `frame` (already windowed) via FFT, normalised by lag 0.
void NormalizedAutocorrelation(RealFft& fft, std::span<const double> frame,
                               std::vector<double>& out) {
  std::vector<double> padded(static_cast<size_t>(fft.size()), 0.0);
  std::copy(frame.begin(), frame.end(), padded.begin());
  std::vector<std::complex<double>> spec;
  fft.Forward(padded, spec);
  for (auto& c : spec) c = std::norm(c);
  fft.Inverse(spec, out);
  const double r0 = out[0];
  if (r0 <= 0.0) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  for (double& v : out) v /= r0;
}

}  // namespace

Periodicity AnalyzePeriodicity(const Waveform& wave, const PitchConfig& cfg) {
  wave.Validate();
  cfg.Validate();
  const int sr = wave.sample_rate;
  const int frames = FrameCount(wave.samples.size(), cfg.hop_length);
  const double hop_s = static_cast<double>(cfg.hop_length) / sr;
  Periodicity out{EmptyTrack(frames, hop_s), EmptyTrack(frames, hop_s)};

  const int win = cfg.WindowLength(sr);
  const auto window = HannWindow(win);
  RealFft fft(NextPow2(2 * win));

  // Autocorrelation of the window itself, for Boersma's correction.
  std::vector<double> win_ac;
  NormalizedAutocorrelation(fft, window, win_ac);

  const int min_lag = std::max(2, static_cast<int>(std::floor(sr / cfg.ceiling_hz)));
  const int max_lag = std::min(win / 2 - 1, static_cast<int>(std::ceil(sr / cfg.floor_hz)));
  const float global_peak = GlobalPeak(wave.samples);
  if (global_peak <= 0.0f) return out;

  std::vector<double> frame, ac, r(static_cast<size_t>(max_lag + 2), 0.0);
  for (int t = 0; t < frames; ++t) {
    CenteredFrame(wave.samples, static_cast<long>(t) * cfg.hop_length, win, frame);
    double mean = 0.0, local_peak = 0.0;
    for (double v : frame) mean += v;
    mean /= win;
    for (int i = 0; i < win; ++i) {
      local_peak = std::max(local_peak, std::abs(frame[i] - mean));
      frame[i] = (frame[i] - mean) * window[i];
    }
    if (local_peak < cfg.silence_threshold * global_peak) continue;

    NormalizedAutocorrelation(fft, frame, ac);
    for (int lag = 0; lag <= max_lag + 1; ++lag) {
      r[lag] = win_ac[lag] > 1e-6 ? ac[lag] / win_ac[lag] : 0.0;
    }

    double best_strength = -1e9, best_lag = 0.0, best_r = 0.0;
    for (int lag = min_lag; lag <= max_lag; ++lag) {
      if (!(r[lag] > r[lag - 1] && r[lag] >= r[lag + 1])) continue;
      const double a = r[lag - 1], b = r[lag], c = r[lag + 1];
      const double denom = a - 2.0 * b + c;
      double delta = 0.0, peak = b;
      if (std::abs(denom) > 1e-12) {
        delta = std::clamp(0.5 * (a - c) / denom, -0.5, 0.5);
        peak = b - 0.25 * (a - c) * delta;
      }
      const double lag_f = lag + delta;
      const double freq = sr / lag_f;
      const double strength = peak + cfg.octave_cost * std::log2(freq / cfg.floor_hz);
      if (strength > best_strength) {
        best_strength = strength;
        best_lag = lag_f;
        best_r = peak;
      }
    }
    if (best_lag <= 0.0 || best_r < cfg.voicing_threshold) continue;
    const double f0 = sr / best_lag;
    if (f0 < cfg.floor_hz || f0 > cfg.ceiling_hz) continue;
    out.f0.values[t] = f0;
    out.f0.voiced[t] = 1;
    out.hnr.values[t] = HnrFromCorrelation(std::min(best_r, 1.0));
    out.hnr.voiced[t] = 1;
  }
  QuantizeToFloat(out.f0);
  QuantizeToFloat(out.hnr);
  return out;
}

FrameTrack ExtractF0(const Waveform& wave, const PitchConfig& cfg) {
  return AnalyzePeriodicity(wave, cfg).f0;
}

FrameTrack ExtractHnr(const Waveform& wave, const PitchConfig& cfg) {
  return AnalyzePeriodicity(wave, cfg).hnr;
}

FrameTrack ExtractRms(const Waveform& wave, const MelConfig& cfg) {
  wave.Validate();
  const int frames = FrameCount(wave.samples.size(), cfg.hop_length);
  FrameTrack out = EmptyTrack(frames, cfg.hop_seconds());
  std::fill(out.voiced.begin(), out.voiced.end(), uint8_t{1});
  // Hann-weighted mean square.
  const auto window = HannWindow(cfg.win_length);
  double wsum = 0.0;
  for (double w : window) wsum += w;
  std::vector<double> frame;
  for (int t = 0; t < frames; ++t) {
    CenteredFrame(wave.samples, static_cast<long>(t) * cfg.hop_length, cfg.win_length, frame);
    double acc = 0.0;
    for (size_t i = 0; i < frame.size(); ++i) acc += window[i] * frame[i] * frame[i];
    out.values[t] = std::sqrt(acc / wsum);
  }
  QuantizeToFloat(out);
  return out;
}

double CepstralPeakProminence(std::span<const double> frame, int sample_rate,
                              const PitchConfig& pitch, const CepstralConfig& cfg) {
  const int len = static_cast<int>(frame.size());
  const int n = NextPow2(2 * len);
  RealFft fft(n);
  const auto window = HannWindow(len);
  std::vector<double> padded(static_cast<size_t>(n), 0.0);
  for (int i = 0; i < len; ++i) padded[i] = frame[i] * window[i];

  std::vector<std::complex<double>> spec;
  fft.Forward(padded, spec);
  std::vector<std::complex<double>> log_power(spec.size());
  for (size_t k = 0; k < spec.size(); ++k) {
    log_power[k] = 10.0 * std::log10(std::norm(spec[k]) + 1e-12);
  }
  std::vector<double> ceps;
  fft.Inverse(log_power, ceps);

  const int half = n / 2;
  std::vector<double> power(static_cast<size_t>(half + 1));
  for (int q = 0; q <= half; ++q) power[q] = ceps[q] * ceps[q];
  const int smooth = std::max(1, static_cast<int>(std::lround(cfg.smoothing_seconds * sample_rate)));
  std::vector<double> db(power.size());
  for (int q = 0; q <= half; ++q) {
    const int lo = std::max(0, q - smooth / 2);
    const int hi = std::min(half, q + smooth / 2);
    double acc = 0.0;
    for (int j = lo; j <= hi; ++j) acc += power[j];
    db[q] = 10.0 * std::log10(acc / (hi - lo + 1) + 1e-20);
  }

  const int q_min = std::max(1, static_cast<int>(std::floor(sample_rate / pitch.ceiling_hz)));
  const int q_max = std::min(half, static_cast<int>(std::ceil(sample_rate / pitch.floor_hz)));
  int peak_q = q_min;
  for (int q = q_min; q <= q_max; ++q) {
    if (db[q] > db[peak_q]) peak_q = q;
  }

  // Least-squares trend over [trend_start, Nyquist quefrency].
  const int fit_lo = std::max(1, static_cast<int>(std::lround(cfg.trend_start_seconds * sample_rate)));
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const int count = half - fit_lo + 1;
  for (int q = fit_lo; q <= half; ++q) {
    sx += q;
    sy += db[q];
    sxx += static_cast<double>(q) * q;
    sxy += q * db[q];
  }
  const double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
  const double intercept = (sy - slope * sx) / count;
  return db[peak_q] - (slope * peak_q + intercept);
}

FrameTrack ExtractCpp(const Waveform& wave, const PitchConfig& pitch,
                      const CepstralConfig& cfg, std::span<const uint8_t> voiced) {
  wave.Validate();
  const int frames = FrameCount(wave.samples.size(), pitch.hop_length);
  std::vector<uint8_t> mask(voiced.begin(), voiced.end());
  if (mask.empty()) mask = ExtractF0(wave, pitch).voiced;
  Require(static_cast<int>(mask.size()) == frames, "cpp: voicing mask length mismatch");

  FrameTrack out = EmptyTrack(frames, static_cast<double>(pitch.hop_length) / wave.sample_rate);
  const int win = pitch.WindowLength(wave.sample_rate);
  std::vector<double> frame;
  for (int t = 0; t < frames; ++t) {
    if (!mask[t]) continue;
    CenteredFrame(wave.samples, static_cast<long>(t) * pitch.hop_length, win, frame);
    out.values[t] = CepstralPeakProminence(frame, wave.sample_rate, pitch, cfg);
    out.voiced[t] = 1;
  }
  QuantizeToFloat(out);
  return out;
}

namespace {

// Levinson-Durbin on autocorrelation r[0..p]; returns a[0..p] with a[0] = 1.
std::vector<double> Levinson(const std::vector<double>& r, int order) {
  std::vector<double> a(static_cast<size_t>(order + 1), 0.0), prev;
  a[0] = 1.0;
  double err = r[0];
  for (int i = 1; i <= order; ++i) {
    if (err <= 1e-15) break;
    double acc = r[i];
    for (int j = 1; j < i; ++j) acc += a[j] * r[i - j];
    const double k = -acc / err;
    prev = a;
    for (int j = 1; j < i; ++j) a[j] = prev[j] + k * prev[i - j];
    a[i] = k;
    err *= 1.0 - k * k;
  }
  return a;
}

std::vector<double> FormantsFromLpc(const std::vector<double>& a, double fs,
                                    const FormantConfig& cfg) {
  const int p = static_cast<int>(a.size()) - 1;
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(p, p);
  for (int j = 0; j < p; ++j) companion(0, j) = -a[j + 1];
  for (int i = 1; i < p; ++i) companion(i, i - 1) = 1.0;
  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  std::vector<double> freqs;
  for (int i = 0; i < p; ++i) {
    const std::complex<double> z = solver.eigenvalues()[i];
    if (z.imag() <= 0.0) continue;
    const double f = std::atan2(z.imag(), z.real()) * fs / (2.0 * M_PI);
    const double bw = -std::log(std::abs(z)) * fs / M_PI;
    if (f > cfg.min_formant_hz && f < fs / 2.0 - 50.0 && bw > 0.0 && bw < cfg.max_bandwidth_hz) {
      freqs.push_back(f);
    }
  }
  std::sort(freqs.begin(), freqs.end());
  return freqs;
}

}  // namespace

std::array<FrameTrack, 4> ExtractFormants(const Waveform& wave, const PitchConfig& pitch,
                                          const FormantConfig& cfg,
                                          std::span<const uint8_t> voiced) {
  wave.Validate();
  Require(cfg.lpc_order >= 2, "formants: LPC order must be >= 2");
  const int frames = FrameCount(wave.samples.size(), pitch.hop_length);
  std::vector<uint8_t> mask(voiced.begin(), voiced.end());
  if (mask.empty()) mask = ExtractF0(wave, pitch).voiced;
  Require(static_cast<int>(mask.size()) == frames, "formants: voicing mask length mismatch");

  const double hop_s = static_cast<double>(pitch.hop_length) / wave.sample_rate;
  std::array<FrameTrack, 4> out;
  for (auto& tr : out) tr = EmptyTrack(frames, hop_s);

  const int fs = static_cast<int>(std::lround(cfg.analysis_rate));
  std::vector<float> x = Resample(wave.samples, wave.sample_rate, fs);
  const double alpha = std::exp(-2.0 * M_PI * cfg.preemphasis_from_hz / fs);
  for (size_t i = x.size(); i-- > 1;) x[i] = static_cast<float>(x[i] - alpha * x[i - 1]);

  const int win = std::max(cfg.lpc_order + 2, static_cast<int>(std::lround(cfg.window_seconds * fs)));
  std::vector<double> hamming(static_cast<size_t>(win));
  for (int i = 0; i < win; ++i) hamming[i] = 0.54 - 0.46 * std::cos(2.0 * M_PI * i / (win - 1));

  std::vector<double> frame;
  std::vector<double> r(static_cast<size_t>(cfg.lpc_order + 1));
  for (int t = 0; t < frames; ++t) {
    if (!mask[t] || x.empty()) continue;
    const long center = std::lround(t * hop_s * fs);
    CenteredFrame(x, center, win, frame);
    for (int i = 0; i < win; ++i) frame[i] *= hamming[i];
    for (int k = 0; k <= cfg.lpc_order; ++k) {
      double acc = 0.0;
      for (int i = k; i < win; ++i) acc += frame[i] * frame[i - k];
      r[k] = acc;
    }
    if (r[0] <= 1e-12) continue;
    r[0] *= 1.0 + 1e-9;  // white-noise correction keeps Levinson stable
    const auto freqs = FormantsFromLpc(Levinson(r, cfg.lpc_order), fs, cfg);
    for (size_t i = 0; i < 4; ++i) {
      out[i].voiced[t] = 1;
      out[i].values[t] = i < freqs.size() ? freqs[i] : 0.0;
    }
  }
  for (auto& tr : out) QuantizeToFloat(tr);
  return out;
}

FrameTrack ComputeOctave(const FrameTrack& f0) {
  FrameTrack out = f0;
  for (size_t i = 0; i < f0.values.size(); ++i) {
    out.values[i] = (f0.voiced[i] && f0.values[i] > 0.0)
                        ? std::log2(f0.values[i] / kOctaveReferenceHz)
                        : 0.0;
    out.voiced[i] = (f0.voiced[i] && f0.values[i] > 0.0) ? 1 : 0;
  }
  return out;
}

std::vector<double> AlignToMel(const FrameTrack& track, int frames) {
  Require(!track.values.empty(), "cannot align an empty track");
  Require(frames >= 0, "frame count must be nonnegative");
  const size_t src = track.values.size();
  std::vector<double> out(static_cast<size_t>(frames));
  for (int i = 0; i < frames; ++i) {
    const size_t idx = std::min(src - 1, static_cast<size_t>(i) * src / static_cast<size_t>(frames));
    out[i] = track.values[idx];
  }
  return out;
}

}  // namespace karaoker::features
