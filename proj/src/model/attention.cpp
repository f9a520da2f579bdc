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


#include "model/attention.hpp"

#include "common/error.hpp"

namespace karaoker::model {

namespace {
constexpr double kMinScale = 1e-3;
constexpr double kFloorMass = 1e-12;
}

torch::Tensor MolWeights(const torch::Tensor& mu, const torch::Tensor& scale,
                         const torch::Tensor& weights, const torch::Tensor& text_mask) {
  Require(mu.dim() == 2 && mu.sizes() == scale.sizes() && mu.sizes() == weights.sizes(),
          "mol: parameters must be [B, K]");
  Require(text_mask.dim() == 2 && text_mask.size(0) == mu.size(0), "mol: mask must be [B, N]");
  const int64_t N = text_mask.size(1);
  const auto pos = torch::arange(N, mu.options()).view({1, 1, N});
  const auto m = mu.unsqueeze(2);
  const auto s = scale.unsqueeze(2);
  const auto hi = (pos + 0.5 - m) / s;
  const auto lo = (pos - 0.5 - m) / s;
  // Upper-tail form keeps precision when both arguments are large.
  const auto mass = torch::where(lo > 0, torch::sigmoid(-lo) - torch::sigmoid(-hi),
                                 torch::sigmoid(hi) - torch::sigmoid(lo));
  const auto valid = text_mask.to(mu.dtype());
  const auto alpha = ((weights.unsqueeze(2) * mass).sum(1) + kFloorMass) * valid;
  return alpha / alpha.sum(1, true);
}

MolAttentionImpl::MolAttentionImpl(int64_t query_dim, int64_t hidden_dim, int64_t components)
    : k_(components) {
  hidden = register_module("hidden", torch::nn::Linear(query_dim, hidden_dim));
  params = register_module("params", torch::nn::Linear(hidden_dim, 3 * components));
}

MolState MolAttentionImpl::Initial(int64_t batch, const torch::TensorOptions& opts) const {
  return {torch::zeros({batch, k_}, opts)};
}

MolStep MolAttentionImpl::forward(const torch::Tensor& query, const torch::Tensor& memory,
                                  const torch::Tensor& text_mask, MolState& state) {
  const auto p = params(torch::tanh(hidden(query)));
  const auto chunks = p.chunk(3, 1);
  MolStep out;
  out.mu = state.mu + torch::softplus(chunks[0]);
  out.scale = torch::softplus(chunks[1]) + kMinScale;
  out.mixture = torch::softmax(chunks[2], 1);
  out.weights = MolWeights(out.mu, out.scale, out.mixture, text_mask);
  out.context = torch::bmm(out.weights.unsqueeze(1), memory).squeeze(1);
  state.mu = out.mu;
  return out;
}

}  // namespace karaoker::model
