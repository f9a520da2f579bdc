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

#include "infer/griffin_lim.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <random>

#include "common/error.hpp"
#include "features/dsp.hpp"

namespace karaoker::infer {

namespace {

using Spectrum = std::vector<std::vector<std::complex<double>>>;

double Convergence(const Spectrum& x, const Eigen::MatrixXd& target, double target_norm) {
  double err = 0.0;
  for (size_t t = 0; t < x.size(); ++t) {
    for (size_t k = 0; k < x[t].size(); ++k) {
      const double d = std::abs(x[t][k]) - target(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(k));
      err += d * d;
    }
  }
  return target_norm > 0.0 ? std::sqrt(err) / target_norm : std::sqrt(err);
}

}  // namespace

GriffinLimResult GriffinLim(const features::MelSpectrogram& mel, const features::MelConfig& cfg, int iterations,
                            uint64_t seed) {
  cfg.Validate();
  Require(iterations >= 0, "griffin-lim: iterations must be >= 0");
  Require(mel.n_mels() == cfg.n_mels, "griffin-lim: mel bin count does not match the configuration");
  Require(mel.frames() > 0, "griffin-lim: empty mel");

  const auto bank = features::MelFilterbank(cfg);
  const auto n_bins = static_cast<Eigen::Index>(bank[0].size());
  Eigen::MatrixXd fb(cfg.n_mels, n_bins);
  for (int m = 0; m < cfg.n_mels; ++m) {
    for (Eigen::Index k = 0; k < n_bins; ++k) fb(m, k) = bank[static_cast<size_t>(m)][static_cast<size_t>(k)];
  }
  const Eigen::MatrixXd pinv = fb.completeOrthogonalDecomposition().pseudoInverse();

  const int T = mel.frames();
  Eigen::MatrixXd mel_lin(cfg.n_mels, T);
  for (int m = 0; m < cfg.n_mels; ++m) {
    for (int t = 0; t < T; ++t) mel_lin(m, t) = std::exp(static_cast<double>(mel.at(m, t)));
  }
  // frames x bins
  const Eigen::MatrixXd target = (pinv * mel_lin).cwiseMax(0.0).transpose();
  const double target_norm = target.norm();

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 2.0 * M_PI);
  Spectrum x(static_cast<size_t>(T), std::vector<std::complex<double>>(static_cast<size_t>(n_bins)));
  for (int t = 0; t < T; ++t) {
    for (Eigen::Index k = 0; k < n_bins; ++k) x[static_cast<size_t>(t)][static_cast<size_t>(k)] = std::polar(target(t, k), u(rng));
  }

  const auto stft = cfg.stft();
  const size_t length = static_cast<size_t>(T) * static_cast<size_t>(cfg.hop_length);
  GriffinLimResult res;
  std::vector<float> y = features::Istft(x, stft, length);
  for (int it = 0; it < iterations; ++it) {
    auto rebuilt = features::Stft(y, stft);
    Require(static_cast<int>(rebuilt.size()) == T, "griffin-lim: frame count drifted", ErrorCode::kInternal);
    res.residuals.push_back(Convergence(rebuilt, target, target_norm));
    for (int t = 0; t < T; ++t) {
      for (Eigen::Index k = 0; k < n_bins; ++k) {
        auto& c = rebuilt[static_cast<size_t>(t)][static_cast<size_t>(k)];
        const double mag = std::abs(c);
        const std::complex<double> phase = mag > 1e-12 ? c / mag : std::complex<double>(1.0, 0.0);
        c = target(t, k) * phase;
      }
    }
    y = features::Istft(rebuilt, stft, length);
  }
  res.wave.samples = std::move(y);
  res.wave.sample_rate = cfg.sample_rate;
  return res;
}

}  // namespace karaoker::infer
