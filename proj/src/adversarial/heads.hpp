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

#include <array>
#include <vector>

#include "adversarial/config.hpp"
#include "features/feature_set.hpp"

namespace karaoker::adversarial {

// Two 1x1 convs (ELU between); mean over time of the sigmoid output.
class MelClassifierImpl : public torch::nn::Module {
 public:
  explicit MelClassifierImpl(int64_t n_mels);
  // window [n_mels, w] -> probability in (0, 1).
  torch::Tensor forward(const torch::Tensor& window);
  torch::Tensor Probabilities(const std::vector<torch::Tensor>& windows);

  torch::nn::Conv1d c1{nullptr}, c2{nullptr};
};
TORCH_MODULE(MelClassifier);

// 1x1 convs n_mels -> n_mels -> 32 -> 1 with ELU.
class FeatureDecoderImpl : public torch::nn::Module {
 public:
  explicit FeatureDecoderImpl(int64_t n_mels);
  // [B, n_mels, T] -> [B, T]
  torch::Tensor forward(const torch::Tensor& mel_dec);

  torch::nn::Conv1d c1{nullptr}, c2{nullptr}, c3{nullptr};
};
TORCH_MODULE(FeatureDecoder);

inline constexpr std::array<features::Feature, 3> kDecodedFeatures = {
    features::Feature::kF0, features::Feature::kHnr, features::Feature::kRms};

// Independent decoders for F0, HNR and RMS.
class FeatureDecodersImpl : public torch::nn::Module {
 public:
  explicit FeatureDecodersImpl(int64_t n_mels);
  // mel_dec [B, n_mels, T], mask [B, T] -> [B, 3, T], zero on padding.
  torch::Tensor forward(const torch::Tensor& mel_dec, const torch::Tensor& mask);
  // Matching targets [B, 3, T] from the batch features [B, 9, T].
  static torch::Tensor Targets(const torch::Tensor& features);

  std::array<FeatureDecoder, 3> decoders{FeatureDecoder{nullptr}, FeatureDecoder{nullptr},
                                         FeatureDecoder{nullptr}};
};
TORCH_MODULE(FeatureDecoders);

inline constexpr int64_t kSpeakerHeadMinFrames = 9;

// 1x1 convs n_mels->80->64->32->dim, ELU on the first three, max-pool 3
// after the first two, then a temporal mean.
class SpeakerHeadImpl : public torch::nn::Module {
 public:
  SpeakerHeadImpl(int64_t n_mels, int64_t dim);
  // mel [n_mels, T] -> [dim]; T < 9 is rejected.
  torch::Tensor Embed(const torch::Tensor& mel);
  // mel [B, n_mels, T] using each item's valid frames -> [B, dim].
  torch::Tensor forward(const torch::Tensor& mel, const torch::Tensor& lengths);

  torch::nn::Conv1d c1{nullptr}, c2{nullptr}, c3{nullptr}, c4{nullptr};
};
TORCH_MODULE(SpeakerHead);

// Optional training-only heads; a null member is a disabled head.
class HeadsImpl : public torch::nn::Module {
 public:
  HeadsImpl(const HeadsConfig& cfg, bool classifier, bool feature_decoders, bool speaker);

  MelClassifier classifier{nullptr};
  FeatureDecoders feature_decoders{nullptr};
  SpeakerHead speaker{nullptr};
};
TORCH_MODULE(Heads);

}  // namespace karaoker::adversarial
