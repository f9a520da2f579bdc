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

#include <torch/torch.h>

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "adversarial/config.hpp"

namespace karaoker::adversarial {

enum class WindowSource { kReal, kGenerated };

// Placement of one window; the data itself is cut with CutWindows.
struct WindowSample {
  int64_t batch_index = 0;
  int64_t start = 0;
  int64_t width = 0;
  WindowSource source = WindowSource::kReal;
};

// `count` windows with widths uniform in [range.min, min(range.max, T_i)]
// and starts uniform over the item's valid frames. Items shorter than
// range.min are never picked; returns empty when no item qualifies.
std::vector<WindowSample> SampleWindows(const torch::Tensor& lengths, std::mt19937_64& rng, int count,
                                        WindowRange range, WindowSource source = WindowSource::kReal);

// Same, but with the widths fixed in advance (one window per width).
std::vector<WindowSample> SampleWindowsWithWidths(const torch::Tensor& lengths, std::mt19937_64& rng,
                                                  const std::vector<int64_t>& widths,
                                                  WindowSource source = WindowSource::kReal);

// [n_mels, width] views of mels [B, n_mels, T].
std::vector<torch::Tensor> CutWindows(const torch::Tensor& mels, const std::vector<WindowSample>& samples);

// Conv2d with weight normalisation (w = g * v / |v| per output channel).
class WeightNormConv2dImpl : public torch::nn::Module {
 public:
  WeightNormConv2dImpl(int64_t in, int64_t out, int64_t kernel, std::vector<int64_t> stride);
  torch::Tensor forward(const torch::Tensor& x);
  torch::Tensor weight() const;

  torch::Tensor v, g, bias;

 private:
  std::vector<int64_t> stride_;
  int64_t padding_;
};
TORCH_MODULE(WeightNormConv2d);

// Wasserstein critic: 4 layers of weight-normalised conv (kernel 3,
// stride 2 along time) with leaky ReLU, global mean, linear score.
class CriticImpl : public torch::nn::Module {
 public:
  explicit CriticImpl(const HeadsConfig& cfg);
  // window [n_mels, w] -> scalar score.
  torch::Tensor Score(const torch::Tensor& window);
  // One score per window, stacked to [n].
  torch::Tensor Scores(const std::vector<torch::Tensor>& windows);

  torch::nn::ModuleList layers{nullptr};
  torch::nn::Linear out{nullptr};

 private:
  double slope_;
};
TORCH_MODULE(Critic);

// mean(fake) - mean(real) + lambda * gp; gp may be undefined.
torch::Tensor CriticLoss(const torch::Tensor& real_scores, const torch::Tensor& fake_scores,
                         const torch::Tensor& gp, double lambda);

// Generator feedback L_D = mean(fake) - mean(real); the objective
// subtracts it.
torch::Tensor CriticFeedback(const torch::Tensor& real_scores, const torch::Tensor& fake_scores);

struct GradientPenaltyResult {
  torch::Tensor penalty;  // mean over pairs of (|grad| - 1)^2
  std::vector<torch::Tensor> interpolates;
  std::vector<double> eps;
};

using ScoreFn = std::function<torch::Tensor(const torch::Tensor&)>;

// Pairs real[i] with fake[i] (equal shapes), interpolates eps*real +
// (1-eps)*fake with eps ~ U[0, 1] and penalises the gradient norm of the
// score there. The penalty stays differentiable in the critic parameters.
GradientPenaltyResult GradientPenalty(const ScoreFn& score, const std::vector<torch::Tensor>& real,
                                      const std::vector<torch::Tensor>& fake, std::mt19937_64& rng);

}  // namespace karaoker::adversarial
