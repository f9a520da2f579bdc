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

#include <complex>
#include <span>
#include <vector>

namespace karaoker::features {

// Real-input FFT of fixed size backed by FFTW. Not shareable across threads;
// create one per worker.
class RealFft {
 public:
  explicit RealFft(int n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  int size() const { return n_; }
  int bins() const { return n_ / 2 + 1; }

  // `in` has size() samples; returns bins() complex values (unnormalized).
  void Forward(std::span<const double> in, std::vector<std::complex<double>>& out);
  // `in` has bins() values; output is scaled by 1/size() (true inverse).
  void Inverse(std::span<const std::complex<double>> in, std::vector<double>& out);

 private:
  int n_;
  double* real_;
  void* spec_;
  void* plan_fwd_;
  void* plan_inv_;
};

// Periodic Hann window of `length` samples.
std::vector<double> HannWindow(int length);

// Copies the `length` samples centred on `center` into `out`, reflecting at
// the signal edges (and zero beyond a single reflection).
void CenteredFrame(std::span<const float> signal, long center, int length,
                   std::vector<double>& out);

// Number of analysis frames for `n` samples at `hop`: ceil(n / hop).
int FrameCount(size_t n, int hop);

struct StftConfig {
  int n_fft = 1024;
  int win_length = 1024;
  int hop_length = 256;
};

// Complex STFT, frame-major: result[t][k], frames centred at t * hop.
std::vector<std::vector<std::complex<double>>> Stft(std::span<const float> signal,
                                                    const StftConfig& cfg);

// Least-squares inverse STFT (window-weighted overlap-add normalised by the
// summed squared window), producing `length` samples.
std::vector<float> Istft(const std::vector<std::vector<std::complex<double>>>& spec,
                         const StftConfig& cfg, size_t length);

// Linear-phase windowed-sinc resampler.
std::vector<float> Resample(std::span<const float> signal, int from_rate, int to_rate);

// Running median with an odd window; edges use the available neighbourhood.
std::vector<double> MedianFilter(std::span<const double> values, int window);

// Linear-interpolated percentile, q in [0, 100]. `values` must be nonempty.
double Percentile(std::vector<double> values, double q);

double Median(std::vector<double> values);

}  // namespace karaoker::features
