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

#include <string>
#include <utility>
#include <vector>

#include "data/batch.hpp"
#include "model/attention.hpp"
#include "model/layers.hpp"
#include "model/model_config.hpp"

namespace karaoker::model {

struct AcousticOutput {
  torch::Tensor mel_dec;       // [B, n_mels, T]
  torch::Tensor mel_post;      // [B, n_mels, T]
  torch::Tensor gate;          // [B, S] logits
  torch::Tensor alignment;     // [B, S, N]
  torch::Tensor cond;          // [B, C, T] encoded features
  torch::Tensor step_lengths;  // [B] valid decoder steps
  bool truncated = false;      // inference stopped at max_steps
};

// 8 blocks of 1x1 convs C->C, C->hidden, hidden->C, each with masked
// BatchNorm and ELU.
class FeatureEncoderImpl : public torch::nn::Module {
 public:
  FeatureEncoderImpl(int64_t channels, int64_t hidden, int64_t blocks);
  torch::Tensor forward(const torch::Tensor& features, const torch::Tensor& mask);
  int64_t channels() const { return channels_; }

 private:
  int64_t channels_;
  std::vector<ConvNorm> layers_;
};
TORCH_MODULE(FeatureEncoder);

// Embedding -> convs -> packed BiLSTM. Returns [B, N, D], zero on padding.
class TextEncoderImpl : public torch::nn::Module {
 public:
  explicit TextEncoderImpl(const ModelConfig& cfg);
  torch::Tensor forward(const torch::Tensor& tokens, const torch::Tensor& lengths);

  torch::nn::Embedding embedding{nullptr};
  torch::nn::LSTM lstm{nullptr};

 private:
  std::vector<ConvNorm> convs_;
};
TORCH_MODULE(TextEncoder);

// Nearest source column for each of n target columns: floor(i * t / n).
std::vector<int64_t> NearestIndices(int64_t n, int64_t t);

// Concatenates each token's encoding with the conditioning column picked by
// NearestIndices over that item's valid lengths: [B, N, D + C].
torch::Tensor ConditionText(const torch::Tensor& text_enc, const torch::Tensor& cond,
                            const torch::Tensor& text_lengths, const torch::Tensor& mel_lengths);

struct DecoderState {
  torch::Tensor h_att, c_att, h_dec, c_dec, context;
  MolState attention;
  int64_t step = 0;
};

struct DecoderStepOut {
  torch::Tensor frames;   // [B, n_mels, r]
  torch::Tensor gate;     // [B]
  torch::Tensor weights;  // [B, N]
};

class DecoderImpl : public torch::nn::Module {
 public:
  explicit DecoderImpl(const ModelConfig& cfg);

  DecoderState Initial(int64_t batch, const torch::TensorOptions& opts) const;
  // One step. `slice` is the mean of this step's r conditioning columns and
  // `cond_mean` the utterance mean, both [B, C]. Prenet dropout is applied
  // only when `gen` is given.
  DecoderStepOut Step(DecoderState& state, const torch::Tensor& prev_frame, const torch::Tensor& slice,
                      const torch::Tensor& cond_mean, const torch::Tensor& memory,
                      const torch::Tensor& text_mask, at::Generator* gen);

  std::vector<torch::nn::Linear> prenet;
  torch::nn::Linear slice_proj{nullptr}, att_cond_proj{nullptr}, mean_proj{nullptr};
  torch::nn::LSTMCell att_rnn{nullptr}, dec_rnn{nullptr};
  MolAttention attention{nullptr};
  torch::nn::Linear frame_proj{nullptr}, gate_proj{nullptr};

 private:
  ModelConfig cfg_;
};
TORCH_MODULE(Decoder);

// mel_post = mel_dec + convs(mel_dec + projected cond); final conv starts
// at zero.
class PostnetImpl : public torch::nn::Module {
 public:
  explicit PostnetImpl(const ModelConfig& cfg);
  torch::Tensor forward(const torch::Tensor& mel_dec, const torch::Tensor& cond, const torch::Tensor& mask);

  torch::nn::Linear cond_proj{nullptr};
  torch::nn::Conv1d last{nullptr};

 private:
  std::vector<ConvNorm> convs_;
};
TORCH_MODULE(Postnet);

struct InferOptions {
  double gate_threshold = 0.5;
  // 0 derives the bound from the template length.
  int64_t max_steps = 0;
  int64_t min_steps = -1;
  double max_margin = 0.25;
  double min_fraction = 0.8;
};

class AcousticModelImpl : public torch::nn::Module {
 public:
  explicit AcousticModelImpl(const ModelConfig& cfg);

  // Teacher-forced pass over a padded batch.
  AcousticOutput forward(const data::Batch& batch, at::Generator* gen = nullptr);

  // Autoregressive decoding for one utterance. `features` is the
  // normalised [C, T] template; tokens may be empty when textless.
  AcousticOutput Infer(const std::vector<int64_t>& tokens, bool textless, const torch::Tensor& features,
                       int64_t speaker, const InferOptions& opts, at::Generator& gen);

  // Text memory [B, N, M] with positions added, plus its mask.
  std::pair<torch::Tensor, torch::Tensor> Memory(const torch::Tensor& tokens, const torch::Tensor& text_lengths,
                                                 const torch::Tensor& textless, const torch::Tensor& cond,
                                                 const torch::Tensor& mel_lengths, const torch::Tensor& speakers);

  // (submodule, parameter count), in a fixed order.
  std::vector<std::pair<std::string, int64_t>> ParameterReport() const;

  const ModelConfig& config() const { return cfg_; }

  TextEncoder text_encoder{nullptr};
  FeatureEncoder feature_encoder{nullptr};
  Decoder decoder{nullptr};
  Postnet postnet{nullptr};
  torch::nn::Embedding speaker_embedding{nullptr};
  torch::Tensor textless_token;

 private:
  ModelConfig cfg_;
};
TORCH_MODULE(AcousticModel);

// The same report derived from the configuration alone.
std::vector<std::pair<std::string, int64_t>> ExpectedParameterReport(const ModelConfig& cfg);

}  // namespace karaoker::model
