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

#include "adversarial/critic.hpp"

#include <algorithm>

#include "common/error.hpp"

namespace karaoker::adversarial {

namespace {

std::vector<int64_t> EligibleItems(const torch::Tensor& lengths, int64_t min_width) {
  const auto len = lengths.to(torch::kCPU).to(torch::kInt64).contiguous();
  std::vector<int64_t> out;
  for (int64_t i = 0; i < len.size(0); ++i) {
    if (len[i].item<int64_t>() >= min_width) out.push_back(i);
  }
  return out;
}

int64_t UniformInt(std::mt19937_64& rng, int64_t lo, int64_t hi) {
  return std::uniform_int_distribution<int64_t>(lo, hi)(rng);
}

}  // namespace

std::vector<WindowSample> SampleWindows(const torch::Tensor& lengths, std::mt19937_64& rng, int count,
                                        WindowRange range, WindowSource source) {
  Require(range.min >= 1 && range.max >= range.min, "invalid window range");
  const auto items = EligibleItems(lengths, range.min);
  std::vector<WindowSample> out;
  if (items.empty()) return out;
  const auto len = lengths.to(torch::kCPU).to(torch::kInt64);
  for (int k = 0; k < count; ++k) {
    WindowSample w;
    w.source = source;
    w.batch_index = items[static_cast<size_t>(UniformInt(rng, 0, static_cast<int64_t>(items.size()) - 1))];
    const int64_t T = len[w.batch_index].item<int64_t>();
    w.width = UniformInt(rng, range.min, std::min(range.max, T));
    w.start = UniformInt(rng, 0, T - w.width);
    out.push_back(w);
  }
  return out;
}

std::vector<WindowSample> SampleWindowsWithWidths(const torch::Tensor& lengths, std::mt19937_64& rng,
                                                  const std::vector<int64_t>& widths, WindowSource source) {
  std::vector<WindowSample> out;
  if (widths.empty()) return out;
  const auto len = lengths.to(torch::kCPU).to(torch::kInt64);
  for (int64_t width : widths) {
    const auto items = EligibleItems(lengths, width);
    if (items.empty()) continue;
    WindowSample w;
    w.source = source;
    w.width = width;
    w.batch_index = items[static_cast<size_t>(UniformInt(rng, 0, static_cast<int64_t>(items.size()) - 1))];
    w.start = UniformInt(rng, 0, len[w.batch_index].item<int64_t>() - width);
    out.push_back(w);
  }
  return out;
}

std::vector<torch::Tensor> CutWindows(const torch::Tensor& mels, const std::vector<WindowSample>& samples) {
  std::vector<torch::Tensor> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    Require(s.batch_index >= 0 && s.batch_index < mels.size(0) && s.start >= 0 && s.width >= 1 &&
                s.start + s.width <= mels.size(2),
            "window outside the mel tensor");
    out.push_back(mels[s.batch_index].slice(1, s.start, s.start + s.width));
  }
  return out;
}

WeightNormConv2dImpl::WeightNormConv2dImpl(int64_t in, int64_t out, int64_t kernel, std::vector<int64_t> stride)
    : stride_(std::move(stride)), padding_(kernel / 2) {
  torch::nn::Conv2d init(torch::nn::Conv2dOptions(in, out, kernel));
  v = register_parameter("v", init->weight.detach().clone());
  g = register_parameter("g", v.detach().flatten(1).norm(2, 1).clone());
  bias = register_parameter("bias", init->bias.detach().clone());
}

torch::Tensor WeightNormConv2dImpl::weight() const {
  const auto norm = v.flatten(1).norm(2, 1).clamp_min(1e-12);
  return v * (g / norm).view({-1, 1, 1, 1});
}

torch::Tensor WeightNormConv2dImpl::forward(const torch::Tensor& x) {
  return torch::conv2d(x, weight(), bias, stride_, padding_);
}

CriticImpl::CriticImpl(const HeadsConfig& cfg) : slope_(cfg.leaky_slope) {
  cfg.Validate();
  layers = register_module("layers", torch::nn::ModuleList());
  int64_t in = 1;
  for (int64_t c : cfg.critic_channels) {
    layers->push_back(WeightNormConv2d(in, c, 3, std::vector<int64_t>{1, 2}));
    in = c;
  }
  out = register_module("out", torch::nn::Linear(in, 1));
}

torch::Tensor CriticImpl::Score(const torch::Tensor& window) {
  Require(window.dim() == 2, "critic expects a [n_mels, width] window");
  auto x = window.unsqueeze(0).unsqueeze(0);
  for (const auto& layer : *layers) {
    x = torch::leaky_relu(layer->as<WeightNormConv2d>()->forward(x), slope_);
  }
  return out(x.mean({2, 3})).squeeze();
}

torch::Tensor CriticImpl::Scores(const std::vector<torch::Tensor>& windows) {
  Require(!windows.empty(), "critic: no windows");
  std::vector<torch::Tensor> s;
  s.reserve(windows.size());
  for (const auto& w : windows) s.push_back(Score(w));
  return torch::stack(s);
}

torch::Tensor CriticFeedback(const torch::Tensor& real_scores, const torch::Tensor& fake_scores) {
  return fake_scores.mean() - real_scores.mean();
}

torch::Tensor CriticLoss(const torch::Tensor& real_scores, const torch::Tensor& fake_scores,
                         const torch::Tensor& gp, double lambda) {
  auto loss = CriticFeedback(real_scores, fake_scores);
  if (gp.defined() && lambda != 0.0) loss = loss + lambda * gp;
  return loss;
}

GradientPenaltyResult GradientPenalty(const ScoreFn& score, const std::vector<torch::Tensor>& real,
                                      const std::vector<torch::Tensor>& fake, std::mt19937_64& rng) {
  Require(!real.empty() && real.size() == fake.size(), "gradient penalty: need matching real/fake windows");
  GradientPenaltyResult res;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<torch::Tensor> terms;
  for (size_t i = 0; i < real.size(); ++i) {
    Require(real[i].sizes() == fake[i].sizes(), "gradient penalty: window shapes differ");
    const double eps = u(rng);
    auto x = (eps * real[i].detach() + (1.0 - eps) * fake[i].detach()).requires_grad_(true);
    const auto s = score(x);
    const auto grad = torch::autograd::grad({s}, {x}, {}, /*retain_graph=*/true, /*create_graph=*/true)[0];
    const auto norm = torch::sqrt(grad.pow(2).sum() + 1e-12);
    terms.push_back((norm - 1.0).pow(2));
    res.interpolates.push_back(x);
    res.eps.push_back(eps);
  }
  res.penalty = torch::stack(terms).mean();
  return res;
}

}  // namespace karaoker::adversarial
