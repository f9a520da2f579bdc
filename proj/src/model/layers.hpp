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

namespace karaoker::model {

// BatchNorm over [B, C, T] whose statistics only see frames where mask is
// true; output is zero on masked frames.
class MaskedBatchNorm1dImpl : public torch::nn::Module {
 public:
  explicit MaskedBatchNorm1dImpl(int64_t channels, double momentum = 0.1, double eps = 1e-5);
  torch::Tensor forward(const torch::Tensor& x, const torch::Tensor& mask);

  torch::Tensor weight, bias, running_mean, running_var;

 private:
  double momentum_;
  double eps_;
};
TORCH_MODULE(MaskedBatchNorm1d);

enum class Activation { kNone, kRelu, kElu, kTanh };

// Same-padded Conv1d -> masked BatchNorm -> activation, re-masked.
class ConvNormImpl : public torch::nn::Module {
 public:
  ConvNormImpl(int64_t in, int64_t out, int64_t kernel, Activation act);
  torch::Tensor forward(const torch::Tensor& x, const torch::Tensor& mask);

  torch::nn::Conv1d conv{nullptr};
  MaskedBatchNorm1d norm{nullptr};

 private:
  Activation act_;
};
TORCH_MODULE(ConvNorm);

// Inverted dropout with masks drawn from an explicit generator.
torch::Tensor SeededDropout(const torch::Tensor& x, double p, at::Generator& gen);

// Sinusoidal position table [positions, dim] starting at `offset`.
torch::Tensor SinusoidalPositions(int64_t positions, int64_t dim, int64_t offset = 0,
                                  torch::TensorOptions opts = torch::kFloat32);

// Parameter counts used by the size report.
inline int64_t LinearParams(int64_t in, int64_t out) { return in * out + out; }
inline int64_t ConvNormParams(int64_t in, int64_t out, int64_t kernel) {
  return in * out * kernel + out + 2 * out;
}
inline int64_t LstmCellParams(int64_t in, int64_t hidden) {
  return 4 * hidden * (in + hidden) + 8 * hidden;
}

at::Generator MakeGenerator(uint64_t seed);

}  // namespace karaoker::model
