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


#include "model/layers.hpp"

#include <ATen/CPUGeneratorImpl.h>

#include <cmath>

#include "common/error.hpp"

namespace karaoker::model {

MaskedBatchNorm1dImpl::MaskedBatchNorm1dImpl(int64_t channels, double momentum, double eps)
    : momentum_(momentum), eps_(eps) {
  weight = register_parameter("weight", torch::ones({channels}));
  bias = register_parameter("bias", torch::zeros({channels}));
  running_mean = register_buffer("running_mean", torch::zeros({channels}));
  running_var = register_buffer("running_var", torch::ones({channels}));
}

torch::Tensor MaskedBatchNorm1dImpl::forward(const torch::Tensor& x, const torch::Tensor& mask) {
  const auto m = mask.unsqueeze(1).to(x.dtype());
  torch::Tensor mean, var;
  if (is_training()) {
    const auto n = m.sum().clamp_min(1.0);
    mean = (x * m).sum({0, 2}) / n;
    var = ((x - mean.view({1, -1, 1})).pow(2) * m).sum({0, 2}) / n;
    torch::NoGradGuard ng;
    const double count = n.item<double>();
    const auto unbiased = var.detach() * (count / std::max(count - 1.0, 1.0));
    running_mean.mul_(1.0 - momentum_).add_(momentum_ * mean.detach().to(running_mean.dtype()));
    running_var.mul_(1.0 - momentum_).add_(momentum_ * unbiased.to(running_var.dtype()));
  } else {
    mean = running_mean.to(x.dtype());
    var = running_var.to(x.dtype());
  }
  const auto y = (x - mean.view({1, -1, 1})) / torch::sqrt(var.view({1, -1, 1}) + eps_);
  return (y * weight.view({1, -1, 1}).to(x.dtype()) + bias.view({1, -1, 1}).to(x.dtype())) * m;
}

ConvNormImpl::ConvNormImpl(int64_t in, int64_t out, int64_t kernel, Activation act) : act_(act) {
  conv = register_module("conv", torch::nn::Conv1d(torch::nn::Conv1dOptions(in, out, kernel).padding(kernel / 2)));
  norm = register_module("norm", MaskedBatchNorm1d(out));
}

torch::Tensor ConvNormImpl::forward(const torch::Tensor& x, const torch::Tensor& mask) {
  auto y = norm(conv(x), mask);
  switch (act_) {
    case Activation::kRelu: y = torch::relu(y); break;
    case Activation::kElu: y = torch::elu(y); break;
    case Activation::kTanh: y = torch::tanh(y); break;
    case Activation::kNone: break;
  }
  return y * mask.unsqueeze(1).to(y.dtype());
}

torch::Tensor SeededDropout(const torch::Tensor& x, double p, at::Generator& gen) {
  if (p <= 0.0) return x;
  const auto keep = torch::full(x.sizes(), 1.0 - p, x.options().requires_grad(false));
  return x * torch::bernoulli(keep, gen) / (1.0 - p);
}

torch::Tensor SinusoidalPositions(int64_t positions, int64_t dim, int64_t offset, torch::TensorOptions opts) {
  Require(dim > 0, "positional embedding dim must be positive");
  const auto pos = torch::arange(offset, offset + positions, torch::kFloat64).unsqueeze(1);
  const auto i = torch::arange(dim, torch::kFloat64).unsqueeze(0);
  const auto pair = (i / 2).floor() * 2;
  const auto angle = pos / torch::pow(10000.0, pair / static_cast<double>(dim));
  const auto even = (torch::arange(dim, torch::kInt64) % 2 == 0).unsqueeze(0);
  return torch::where(even, torch::sin(angle), torch::cos(angle)).to(opts);
}

at::Generator MakeGenerator(uint64_t seed) {
  return at::make_generator<at::CPUGeneratorImpl>(seed);
}

}  // namespace karaoker::model
