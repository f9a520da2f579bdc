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

#include "features/dsp.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <mutex>
#include <numeric>

#include "common/error.hpp"

namespace karaoker::features {

namespace {
// FFTW's planner is not thread-safe; execution on distinct plans is.
std::mutex g_planner_mutex;
}  // namespace

RealFft::RealFft(int n) : n_(n) {
  Require(n >= 2, "FFT size must be at least 2");
  std::lock_guard<std::mutex> lock(g_planner_mutex);
  real_ = fftw_alloc_real(static_cast<size_t>(n));
  auto* spec = fftw_alloc_complex(static_cast<size_t>(bins()));
  spec_ = spec;
  plan_fwd_ = fftw_plan_dft_r2c_1d(n, real_, spec, FFTW_ESTIMATE);
  plan_inv_ = fftw_plan_dft_c2r_1d(n, spec, real_, FFTW_ESTIMATE);
}

RealFft::~RealFft() {
  std::lock_guard<std::mutex> lock(g_planner_mutex);
  fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
  fftw_destroy_plan(static_cast<fftw_plan>(plan_inv_));
  fftw_free(real_);
  fftw_free(spec_);
}

void RealFft::Forward(std::span<const double> in, std::vector<std::complex<double>>& out) {
  std::copy(in.begin(), in.begin() + n_, real_);
  fftw_execute(static_cast<fftw_plan>(plan_fwd_));
  out.resize(static_cast<size_t>(bins()));
  std::memcpy(out.data(), spec_, sizeof(fftw_complex) * out.size());
}

void RealFft::Inverse(std::span<const std::complex<double>> in, std::vector<double>& out) {
  std::memcpy(spec_, in.data(), sizeof(fftw_complex) * static_cast<size_t>(bins()));
  fftw_execute(static_cast<fftw_plan>(plan_inv_));
  out.resize(static_cast<size_t>(n_));
  const double scale = 1.0 / n_;
  for (int i = 0; i < n_; ++i) out[i] = real_[i] * scale;
}

std::vector<double> HannWindow(int length) {
  std::vector<double> w(static_cast<size_t>(length));
  for (int i = 0; i < length; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * i / length);
  }
  return w;
}

void CenteredFrame(std::span<const float> signal, long center, int length,
                   std::vector<double>& out) {
  out.assign(static_cast<size_t>(length), 0.0);
  const long n = static_cast<long>(signal.size());
  const long start = center - length / 2;
  for (int i = 0; i < length; ++i) {
    long idx = start + i;
    if (idx < 0) idx = -idx;
    if (idx >= n) idx = 2 * (n - 1) - idx;
    if (idx >= 0 && idx < n) out[i] = signal[static_cast<size_t>(idx)];
  }
}

int FrameCount(size_t n, int hop) {
  return static_cast<int>((n + static_cast<size_t>(hop) - 1) / static_cast<size_t>(hop));
}

namespace {

std::vector<double> PaddedWindow(const StftConfig& cfg) {
  std::vector<double> w(static_cast<size_t>(cfg.n_fft), 0.0);
  const auto hann = HannWindow(cfg.win_length);
  const int offset = (cfg.n_fft - cfg.win_length) / 2;
  for (int i = 0; i < cfg.win_length; ++i) w[offset + i] = hann[i];
  return w;
}

}  // namespace

std::vector<std::vector<std::complex<double>>> Stft(std::span<const float> signal,
                                                    const StftConfig& cfg) {
  Require(cfg.win_length <= cfg.n_fft, "win_length must not exceed n_fft");
  const int frames = FrameCount(signal.size(), cfg.hop_length);
  const auto window = PaddedWindow(cfg);
  RealFft fft(cfg.n_fft);
  std::vector<std::vector<std::complex<double>>> out(static_cast<size_t>(frames));
  std::vector<double> frame;
  for (int t = 0; t < frames; ++t) {
    CenteredFrame(signal, static_cast<long>(t) * cfg.hop_length, cfg.n_fft, frame);
    for (int i = 0; i < cfg.n_fft; ++i) frame[i] *= window[i];
    fft.Forward(frame, out[t]);
  }
  return out;
}

std::vector<float> Istft(const std::vector<std::vector<std::complex<double>>>& spec,
                         const StftConfig& cfg, size_t length) {
  const auto window = PaddedWindow(cfg);
  RealFft fft(cfg.n_fft);
  const long half = cfg.n_fft / 2;
  std::vector<double> acc(length, 0.0), norm(length, 0.0), frame;
  for (size_t t = 0; t < spec.size(); ++t) {
    fft.Inverse(spec[t], frame);
    const long start = static_cast<long>(t) * cfg.hop_length - half;
    for (int i = 0; i < cfg.n_fft; ++i) {
      const long idx = start + i;
      if (idx < 0 || idx >= static_cast<long>(length)) continue;
      acc[idx] += frame[i] * window[i];
      norm[idx] += window[i] * window[i];
    }
  }
  std::vector<float> out(length, 0.0f);
  for (size_t i = 0; i < length; ++i) {
    if (norm[i] > 1e-10) out[i] = static_cast<float>(acc[i] / norm[i]);
  }
  return out;
}

std::vector<float> Resample(std::span<const float> signal, int from_rate, int to_rate) {
  Require(from_rate > 0 && to_rate > 0, "resample rates must be positive");
  if (from_rate == to_rate) return {signal.begin(), signal.end()};
  const double ratio = static_cast<double>(to_rate) / from_rate;
  const size_t out_len = static_cast<size_t>(std::floor(signal.size() * ratio));
  // Low-pass at the lower Nyquist; Hann-windowed sinc, 16 zero crossings.
  const double cutoff = std::min(1.0, ratio);
  const int zeros = 16;
  const double half_width = zeros / cutoff;
  std::vector<float> out(out_len);
  const long n = static_cast<long>(signal.size());
  for (size_t j = 0; j < out_len; ++j) {
    const double pos = j / ratio;
    const long lo = static_cast<long>(std::ceil(pos - half_width));
    const long hi = static_cast<long>(std::floor(pos + half_width));
    double acc = 0.0;
    for (long i = std::max(0L, lo); i <= std::min(n - 1, hi); ++i) {
      const double x = (i - pos) * cutoff;
      const double sinc = std::abs(x) < 1e-12 ? 1.0 : std::sin(M_PI * x) / (M_PI * x);
      const double win = 0.5 + 0.5 * std::cos(M_PI * (i - pos) / half_width);
      acc += signal[static_cast<size_t>(i)] * sinc * win * cutoff;
    }
    out[j] = static_cast<float>(acc);
  }
  return out;
}

std::vector<double> MedianFilter(std::span<const double> values, int window) {
  Require(window >= 1 && window % 2 == 1, "median filter window must be odd");
  const long n = static_cast<long>(values.size());
  const long half = window / 2;
  std::vector<double> out(values.size());
  std::vector<double> buf;
  for (long i = 0; i < n; ++i) {
    buf.assign(values.begin() + std::max(0L, i - half),
               values.begin() + std::min(n, i + half + 1));
    std::nth_element(buf.begin(), buf.begin() + buf.size() / 2, buf.end());
    double m = buf[buf.size() / 2];
    if (buf.size() % 2 == 0) {
      const double lower = *std::max_element(buf.begin(), buf.begin() + buf.size() / 2);
      m = 0.5 * (m + lower);
    }
    out[i] = m;
  }
  return out;
}

double Percentile(std::vector<double> values, double q) {
  Require(!values.empty(), "percentile of an empty set");
  std::sort(values.begin(), values.end());
  const double pos = std::clamp(q, 0.0, 100.0) / 100.0 * (values.size() - 1);
  const size_t lo = static_cast<size_t>(std::floor(pos));
  const size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - lo;
  return values[lo] + frac * (values[hi] - values[lo]);
}

double Median(std::vector<double> values) { return Percentile(std::move(values), 50.0); }

}  // namespace karaoker::features
