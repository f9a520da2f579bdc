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

namespace karaoker::model {

// Discretised logistic mixture over memory positions 0..N-1:
//   alpha[n] = sum_k w_k (sigmoid((n + 0.5 - mu_k) / s_k) - sigmoid((n - 0.5 - mu_k) / s_k))
// restricted to valid positions and renormalised. mu, scale and weights are
// [B, K] (weights already summing to 1); text_mask is [B, N].
torch::Tensor MolWeights(const torch::Tensor& mu, const torch::Tensor& scale,
                         const torch::Tensor& weights, const torch::Tensor& text_mask);

struct MolState {
  torch::Tensor mu;  // [B, K]
};

struct MolStep {
  torch::Tensor context;  // [B, M]
  torch::Tensor weights;  // [B, N]
  torch::Tensor mu, scale, mixture;
};

// Location-based attention: the query predicts non-negative mean
// increments, scales and mixture logits for K logistic components.
class MolAttentionImpl : public torch::nn::Module {
 public:
  MolAttentionImpl(int64_t query_dim, int64_t hidden, int64_t components);

  MolState Initial(int64_t batch, const torch::TensorOptions& opts) const;
  MolStep forward(const torch::Tensor& query, const torch::Tensor& memory,
                  const torch::Tensor& text_mask, MolState& state);

  int64_t components() const { return k_; }

  torch::nn::Linear hidden{nullptr}, params{nullptr};

 private:
  int64_t k_;
};
TORCH_MODULE(MolAttention);

}  // namespace karaoker::model
