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


#include "model/acoustic_model.hpp"

#include <algorithm>
#include <cmath>

#include "common/error.hpp"

namespace karaoker::model {

namespace {

torch::Tensor MaskOf(const torch::Tensor& lengths, int64_t size) {
  return torch::arange(size, lengths.options()).unsqueeze(0) < lengths.unsqueeze(1);
}

int64_t CountParams(const torch::nn::Module& m) {
  int64_t n = 0;
  for (const auto& p : m.parameters()) n += p.numel();
  return n;
}

}  // namespace

FeatureEncoderImpl::FeatureEncoderImpl(int64_t channels, int64_t hidden, int64_t blocks)
    : channels_(channels) {
  for (int64_t b = 0; b < blocks; ++b) {
    const std::string p = "block" + std::to_string(b) + "_";
    layers_.push_back(register_module(p + "0", ConvNorm(channels, channels, 1, Activation::kElu)));
    layers_.push_back(register_module(p + "1", ConvNorm(channels, hidden, 1, Activation::kElu)));
    layers_.push_back(register_module(p + "2", ConvNorm(hidden, channels, 1, Activation::kElu)));
  }
}

torch::Tensor FeatureEncoderImpl::forward(const torch::Tensor& features, const torch::Tensor& mask) {
  Require(features.dim() == 3 && features.size(1) == channels_,
          "feature encoder: expected " + std::to_string(channels_) + " feature channels");
  auto x = features * mask.unsqueeze(1).to(features.dtype());
  for (auto& layer : layers_) x = layer(x, mask);
  return x;
}

TextEncoderImpl::TextEncoderImpl(const ModelConfig& cfg) {
  embedding = register_module(
      "embedding", torch::nn::Embedding(torch::nn::EmbeddingOptions(cfg.vocab_size, cfg.embed_dim).padding_idx(0)));
  int64_t in = cfg.embed_dim;
  for (int i = 0; i < cfg.enc_convs; ++i) {
    convs_.push_back(register_module("conv" + std::to_string(i),
                                     ConvNorm(in, cfg.enc_channels, cfg.enc_kernel, Activation::kRelu)));
    in = cfg.enc_channels;
  }
  lstm = register_module("lstm", torch::nn::LSTM(torch::nn::LSTMOptions(in, cfg.enc_lstm_dim / 2)
                                                     .batch_first(true)
                                                     .bidirectional(true)));
}

torch::Tensor TextEncoderImpl::forward(const torch::Tensor& tokens, const torch::Tensor& lengths) {
  const int64_t N = tokens.size(1);
  const auto mask = MaskOf(lengths, N);
  auto x = embedding(tokens).transpose(1, 2);
  x = x * mask.unsqueeze(1).to(x.dtype());
  for (auto& c : convs_) x = c(x, mask);
  auto packed = torch::nn::utils::rnn::pack_padded_sequence(x.transpose(1, 2), lengths.to(torch::kCPU), true, false);
  auto out = std::get<0>(lstm->forward_with_packed_input(packed));
  auto padded = std::get<0>(torch::nn::utils::rnn::pad_packed_sequence(out, true, 0.0, N));
  return padded * mask.unsqueeze(2).to(padded.dtype());
}

std::vector<int64_t> NearestIndices(int64_t n, int64_t t) {
  Require(n > 0 && t > 0, "nearest resample: empty sequence");
  std::vector<int64_t> idx(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i) idx[static_cast<size_t>(i)] = std::min(t - 1, i * t / n);
  return idx;
}

torch::Tensor ConditionText(const torch::Tensor& text_enc, const torch::Tensor& cond,
                            const torch::Tensor& text_lengths, const torch::Tensor& mel_lengths) {
  const int64_t B = text_enc.size(0);
  const int64_t N = text_enc.size(1);
  const int64_t C = cond.size(1);
  auto index = torch::zeros({B, N}, torch::kInt64);
  auto acc = index.accessor<int64_t, 2>();
  for (int64_t b = 0; b < B; ++b) {
    const int64_t n = text_lengths[b].item<int64_t>();
    const int64_t t = mel_lengths[b].item<int64_t>();
    if (n < 1 || t < 1) continue;
    const auto idx = NearestIndices(n, t);
    for (int64_t i = 0; i < n; ++i) acc[b][i] = idx[static_cast<size_t>(i)];
  }
  index = index.to(cond.device());
  const auto picked = cond.gather(2, index.unsqueeze(1).expand({B, C, N})).transpose(1, 2);
  const auto mask = MaskOf(text_lengths.to(cond.device()), N).unsqueeze(2).to(cond.dtype());
  return torch::cat({text_enc, picked * mask}, 2);
}

DecoderImpl::DecoderImpl(const ModelConfig& cfg) : cfg_(cfg) {
  int64_t in = cfg.n_mels;
  for (int i = 0; i < cfg.prenet_layers; ++i) {
    prenet.push_back(register_module("prenet" + std::to_string(i), torch::nn::Linear(in, cfg.prenet_dim)));
    in = cfg.prenet_dim;
  }
  slice_proj = register_module("slice_proj", torch::nn::Linear(cfg.feat_channels, cfg.slice_dim));
  att_cond_proj = register_module("att_cond_proj", torch::nn::Linear(cfg.feat_channels, cfg.att_cond_dim));
  mean_proj = register_module("mean_proj", torch::nn::Linear(cfg.feat_channels, cfg.mean_dim));
  att_rnn = register_module(
      "att_rnn", torch::nn::LSTMCell(cfg.prenet_dim + cfg.slice_dim + cfg.memory_dim(), cfg.att_rnn_dim));
  attention = register_module("attention", MolAttention(cfg.query_dim(), cfg.mol_hidden, cfg.mol_components));
  dec_rnn = register_module("dec_rnn", torch::nn::LSTMCell(cfg.att_rnn_dim + cfg.memory_dim(), cfg.dec_rnn_dim));
  frame_proj = register_module("frame_proj",
                               torch::nn::Linear(cfg.dec_rnn_dim + cfg.memory_dim(), cfg.n_mels * cfg.r));
  gate_proj = register_module("gate_proj", torch::nn::Linear(cfg.dec_rnn_dim + cfg.memory_dim(), 1));
}

DecoderState DecoderImpl::Initial(int64_t batch, const torch::TensorOptions& opts) const {
  DecoderState s;
  s.h_att = torch::zeros({batch, cfg_.att_rnn_dim}, opts);
  s.c_att = torch::zeros({batch, cfg_.att_rnn_dim}, opts);
  s.h_dec = torch::zeros({batch, cfg_.dec_rnn_dim}, opts);
  s.c_dec = torch::zeros({batch, cfg_.dec_rnn_dim}, opts);
  s.context = torch::zeros({batch, cfg_.memory_dim()}, opts);
  s.attention = attention->Initial(batch, opts);
  return s;
}

DecoderStepOut DecoderImpl::Step(DecoderState& state, const torch::Tensor& prev_frame, const torch::Tensor& slice,
                                 const torch::Tensor& cond_mean, const torch::Tensor& memory,
                                 const torch::Tensor& text_mask, at::Generator* gen) {
  auto x = prev_frame;
  for (auto& layer : prenet) {
    x = torch::relu(layer(x));
    if (gen) x = SeededDropout(x, cfg_.prenet_dropout, *gen);
  }
  const auto sp = slice_proj(slice);
  std::tie(state.h_att, state.c_att) =
      att_rnn(torch::cat({x, sp, state.context}, 1), std::make_tuple(state.h_att, state.c_att));
  auto query = torch::cat({state.h_att, att_cond_proj(slice), mean_proj(cond_mean)}, 1);
  query = query + SinusoidalPositions(1, query.size(1), state.step, query.options());
  auto att = attention(query, memory, text_mask, state.attention);
  state.context = att.context;
  std::tie(state.h_dec, state.c_dec) =
      dec_rnn(torch::cat({state.h_att, state.context}, 1), std::make_tuple(state.h_dec, state.c_dec));
  const auto out_in = torch::cat({state.h_dec, state.context}, 1);
  DecoderStepOut out;
  out.frames = frame_proj(out_in).view({-1, cfg_.r, cfg_.n_mels}).transpose(1, 2);
  out.gate = gate_proj(out_in).squeeze(1);
  out.weights = att.weights;
  ++state.step;
  return out;
}

PostnetImpl::PostnetImpl(const ModelConfig& cfg) {
  Require(cfg.postnet_layers >= 2, "postnet needs at least two layers", ErrorCode::kConfig);
  cond_proj = register_module("cond_proj", torch::nn::Linear(cfg.feat_channels, cfg.n_mels));
  int64_t in = cfg.n_mels;
  for (int i = 0; i + 1 < cfg.postnet_layers; ++i) {
    convs_.push_back(register_module("conv" + std::to_string(i),
                                     ConvNorm(in, cfg.postnet_channels, cfg.postnet_kernel, Activation::kTanh)));
    in = cfg.postnet_channels;
  }
  last = register_module("last", torch::nn::Conv1d(torch::nn::Conv1dOptions(in, cfg.n_mels, cfg.postnet_kernel)
                                                       .padding(cfg.postnet_kernel / 2)));
  torch::NoGradGuard ng;
  last->weight.zero_();
  last->bias.zero_();
}

torch::Tensor PostnetImpl::forward(const torch::Tensor& mel_dec, const torch::Tensor& cond, const torch::Tensor& mask) {
  const auto m = mask.unsqueeze(1).to(mel_dec.dtype());
  auto x = (mel_dec + cond_proj(cond.transpose(1, 2)).transpose(1, 2)) * m;
  for (auto& c : convs_) x = c(x, mask);
  return (mel_dec + last(x)) * m;
}

AcousticModelImpl::AcousticModelImpl(const ModelConfig& cfg) : cfg_(cfg) {
  cfg_.Validate();
  text_encoder = register_module("text_encoder", TextEncoder(cfg_));
  feature_encoder = register_module("feature_encoder", FeatureEncoder(cfg_.feat_channels, cfg_.feat_hidden, cfg_.feat_blocks));
  decoder = register_module("decoder", Decoder(cfg_));
  postnet = register_module("postnet", Postnet(cfg_));
  speaker_embedding = register_module("speaker_embedding", torch::nn::Embedding(cfg_.n_speakers, cfg_.speaker_dim));
  textless_token = register_parameter("textless_token", torch::randn({cfg_.text_dim()}) * 0.1);
}

std::pair<torch::Tensor, torch::Tensor> AcousticModelImpl::Memory(const torch::Tensor& tokens,
                                                                  const torch::Tensor& text_lengths,
                                                                  const torch::Tensor& textless,
                                                                  const torch::Tensor& cond,
                                                                  const torch::Tensor& mel_lengths,
                                                                  const torch::Tensor& speakers) {
  const int64_t B = tokens.size(0);
  const int64_t N = tokens.size(1);
  const auto lengths = torch::where(textless, torch::ones_like(text_lengths), text_lengths.clamp_min(1));
  auto text = text_encoder(tokens, lengths);
  const auto first = (torch::arange(N, tokens.options()) == 0).view({1, N, 1});
  const auto token = textless_token.to(text.dtype()).view({1, 1, -1});
  text = torch::where(textless.view({B, 1, 1}) & first, token.expand_as(text), text);
  auto memory = ConditionText(text, cond, lengths, mel_lengths);
  const auto spk = speaker_embedding(speakers).to(memory.dtype()).unsqueeze(1).expand({B, N, cfg_.speaker_dim});
  memory = torch::cat({memory, spk}, 2);
  const auto mask = MaskOf(lengths, N);
  memory = (memory + SinusoidalPositions(N, memory.size(2), 0, memory.options()).unsqueeze(0)) *
           mask.unsqueeze(2).to(memory.dtype());
  return {memory, mask};
}

AcousticOutput AcousticModelImpl::forward(const data::Batch& batch, at::Generator* gen) {
  const int64_t r = cfg_.r;
  Require(batch.group_size == r, "batch group size does not match the model's r");
  const auto& mask = batch.frame_mask;
  const int64_t B = batch.size();
  const int64_t T = batch.max_frames();
  const int64_t S = T / r;
  const auto dtype = textless_token.dtype();
  const auto mels = batch.mels.to(dtype);

  AcousticOutput out;
  out.cond = feature_encoder(batch.features.to(dtype), mask);
  const auto m = mask.unsqueeze(1).to(dtype);
  const auto cond_mean = (out.cond * m).sum(2) / m.sum(2).clamp_min(1.0);
  const auto slices = out.cond.view({B, cfg_.feat_channels, S, r}).mean(3);
  auto [memory, text_mask] = Memory(batch.tokens, batch.text_lengths, batch.textless, out.cond,
                                    batch.mel_lengths, batch.speaker_ids);

  auto state = decoder->Initial(B, mels.options());
  std::vector<torch::Tensor> frames, gates, rows;
  auto prev = torch::zeros({B, cfg_.n_mels}, mels.options());
  for (int64_t s = 0; s < S; ++s) {
    auto step = decoder->Step(state, prev, slices.select(2, s), cond_mean, memory, text_mask, gen);
    frames.push_back(step.frames);
    gates.push_back(step.gate);
    rows.push_back(step.weights);
    prev = mels.select(2, (s + 1) * r - 1);
  }
  out.mel_dec = torch::cat(frames, 2) * m;
  out.mel_post = postnet(out.mel_dec, out.cond, mask);
  out.gate = torch::stack(gates, 1);
  out.alignment = torch::stack(rows, 1);
  out.step_lengths = (batch.mel_lengths + (r - 1)).div(r, "floor");
  return out;
}

AcousticOutput AcousticModelImpl::Infer(const std::vector<int64_t>& tokens, bool textless,
                                        const torch::Tensor& features, int64_t speaker,
                                        const InferOptions& opts, at::Generator& gen) {
  Require(features.dim() == 2 && features.size(0) == cfg_.feat_channels,
          "infer: template must be [" + std::to_string(cfg_.feat_channels) + ", T]");
  Require(textless || !tokens.empty(), "text required");
  Require(speaker >= 0 && speaker < cfg_.n_speakers, "infer: unknown speaker index");
  const int64_t r = cfg_.r;
  const int64_t T = features.size(1);
  Require(T > 0, "infer: empty template");
  const bool was_training = is_training();
  eval();
  torch::NoGradGuard ng;
  const auto dtype = textless_token.dtype();

  const int64_t S_t = (T + r - 1) / r;
  auto feats = torch::zeros({1, cfg_.feat_channels, S_t * r}, dtype);
  feats.slice(2, 0, T).copy_(features.to(dtype).unsqueeze(0));
  auto mask = torch::zeros({1, S_t * r}, torch::kBool);
  mask.slice(1, 0, T).fill_(true);
  const auto cond = feature_encoder(feats, mask);
  const auto cond_mean = cond.slice(2, 0, T).mean(2);
  const auto slices = cond.view({1, cfg_.feat_channels, S_t, r}).mean(3);

  const int64_t N = textless ? 1 : static_cast<int64_t>(tokens.size());
  auto tok = torch::zeros({1, N}, torch::kInt64);
  if (!textless) tok = torch::tensor(tokens, torch::kInt64).view({1, N});
  auto [memory, text_mask] = Memory(tok, torch::full({1}, N, torch::kInt64), torch::full({1}, textless),
                                    cond, torch::full({1}, T, torch::kInt64), torch::full({1}, speaker, torch::kInt64));

  // Bounds are in frames, so steps * r stays within [min_fraction, 1 + max_margin] x T.
  const double Td = static_cast<double>(T);
  const int64_t max_steps =
      opts.max_steps > 0 ? opts.max_steps
                         : std::max<int64_t>(1, static_cast<int64_t>(std::floor((1.0 + opts.max_margin) * Td / r)));
  const int64_t min_steps =
      opts.min_steps >= 0 ? opts.min_steps
                          : std::min(max_steps, static_cast<int64_t>(std::ceil(opts.min_fraction * Td / r)));
  auto state = decoder->Initial(1, torch::TensorOptions().dtype(dtype));
  std::vector<torch::Tensor> frames, gates, rows;
  auto prev = torch::zeros({1, cfg_.n_mels}, dtype);
  AcousticOutput out;
  out.truncated = true;
  for (int64_t s = 0; s < max_steps; ++s) {
    auto step = decoder->Step(state, prev, slices.select(2, std::min(s, S_t - 1)), cond_mean, memory, text_mask, &gen);
    frames.push_back(step.frames);
    gates.push_back(step.gate);
    rows.push_back(step.weights);
    prev = step.frames.select(2, r - 1);
    if (s + 1 >= min_steps && torch::sigmoid(step.gate).item<double>() > opts.gate_threshold) {
      out.truncated = false;
      break;
    }
  }
  const int64_t steps = static_cast<int64_t>(frames.size());
  const int64_t frames_out = steps * r;
  auto out_cond = cond.slice(2, 0, T);
  if (frames_out > T) {
    out_cond = torch::cat({out_cond, out_cond.slice(2, T - 1, T).expand({1, cfg_.feat_channels, frames_out - T})}, 2);
  } else {
    out_cond = out_cond.slice(2, 0, frames_out);
  }
  const auto out_mask = torch::ones({1, frames_out}, torch::kBool);
  out.mel_dec = torch::cat(frames, 2);
  out.mel_post = postnet(out.mel_dec, out_cond, out_mask);
  out.gate = torch::stack(gates, 1);
  out.alignment = torch::stack(rows, 1);
  out.cond = out_cond;
  out.step_lengths = torch::full({1}, steps, torch::kInt64);
  if (was_training) train();
  return out;
}

std::vector<std::pair<std::string, int64_t>> AcousticModelImpl::ParameterReport() const {
  return {{"text_encoder", CountParams(*text_encoder)},
          {"feature_encoder", CountParams(*feature_encoder)},
          {"decoder", CountParams(*decoder)},
          {"postnet", CountParams(*postnet)},
          {"speaker_embedding", CountParams(*speaker_embedding)},
          {"textless_token", textless_token.numel()}};
}

std::vector<std::pair<std::string, int64_t>> ExpectedParameterReport(const ModelConfig& c) {
  int64_t text = int64_t{c.vocab_size} * c.embed_dim + ConvNormParams(c.embed_dim, c.enc_channels, c.enc_kernel) +
                 (c.enc_convs - 1) * ConvNormParams(c.enc_channels, c.enc_channels, c.enc_kernel) +
                 2 * LstmCellParams(c.enc_channels, c.enc_lstm_dim / 2);
  int64_t feat = int64_t{c.feat_blocks} * (ConvNormParams(c.feat_channels, c.feat_channels, 1) +
                                           ConvNormParams(c.feat_channels, c.feat_hidden, 1) +
                                           ConvNormParams(c.feat_hidden, c.feat_channels, 1));
  const int64_t M = c.memory_dim();
  int64_t dec = LinearParams(c.n_mels, c.prenet_dim) + (c.prenet_layers - 1) * LinearParams(c.prenet_dim, c.prenet_dim) +
                LinearParams(c.feat_channels, c.slice_dim) + LinearParams(c.feat_channels, c.att_cond_dim) +
                LinearParams(c.feat_channels, c.mean_dim) +
                LstmCellParams(c.prenet_dim + c.slice_dim + M, c.att_rnn_dim) +
                LinearParams(c.query_dim(), c.mol_hidden) + LinearParams(c.mol_hidden, 3 * c.mol_components) +
                LstmCellParams(c.att_rnn_dim + M, c.dec_rnn_dim) + LinearParams(c.dec_rnn_dim + M, c.n_mels * c.r) +
                LinearParams(c.dec_rnn_dim + M, 1);
  int64_t post = LinearParams(c.feat_channels, c.n_mels) + ConvNormParams(c.n_mels, c.postnet_channels, c.postnet_kernel) +
                 (c.postnet_layers - 2) * ConvNormParams(c.postnet_channels, c.postnet_channels, c.postnet_kernel) +
                 int64_t{c.postnet_channels} * c.n_mels * c.postnet_kernel + c.n_mels;
  return {{"text_encoder", text},
          {"feature_encoder", feat},
          {"decoder", dec},
          {"postnet", post},
          {"speaker_embedding", int64_t{c.n_speakers} * c.speaker_dim},
          {"textless_token", c.text_dim()}};
}

}  // namespace karaoker::model
