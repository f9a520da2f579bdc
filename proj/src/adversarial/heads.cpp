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

#include "adversarial/heads.hpp"

#include "common/error.hpp"

namespace karaoker::adversarial {

namespace {

torch::nn::Conv1d Pointwise(int64_t in, int64_t out) { return torch::nn::Conv1d(torch::nn::Conv1dOptions(in, out, 1)); }

}  // namespace

MelClassifierImpl::MelClassifierImpl(int64_t n_mels) {
  c1 = register_module("c1", Pointwise(n_mels, n_mels));
  c2 = register_module("c2", Pointwise(n_mels, 1));
}

torch::Tensor MelClassifierImpl::forward(const torch::Tensor& window) {
  Require(window.dim() == 2, "classifier expects a [n_mels, width] window");
  const auto x = c2(torch::elu(c1(window.unsqueeze(0))));
  return torch::sigmoid(x).mean();
}

torch::Tensor MelClassifierImpl::Probabilities(const std::vector<torch::Tensor>& windows) {
  Require(!windows.empty(), "classifier: no windows");
  std::vector<torch::Tensor> p;
  p.reserve(windows.size());
  for (const auto& w : windows) p.push_back(forward(w));
  return torch::stack(p);
}

FeatureDecoderImpl::FeatureDecoderImpl(int64_t n_mels) {
  c1 = register_module("c1", Pointwise(n_mels, n_mels));
  c2 = register_module("c2", Pointwise(n_mels, 32));
  c3 = register_module("c3", Pointwise(32, 1));
}

torch::Tensor FeatureDecoderImpl::forward(const torch::Tensor& mel_dec) {
  return c3(torch::elu(c2(torch::elu(c1(mel_dec))))).squeeze(1);
}

FeatureDecodersImpl::FeatureDecodersImpl(int64_t n_mels) {
  const char* names[3] = {"f0", "hnr", "rms"};
  for (size_t i = 0; i < 3; ++i) decoders[i] = register_module(names[i], FeatureDecoder(n_mels));
}

torch::Tensor FeatureDecodersImpl::forward(const torch::Tensor& mel_dec, const torch::Tensor& mask) {
  std::vector<torch::Tensor> tracks;
  for (auto& d : decoders) tracks.push_back(d(mel_dec));
  return torch::stack(tracks, 1) * mask.unsqueeze(1).to(mel_dec.dtype());
}

torch::Tensor FeatureDecodersImpl::Targets(const torch::Tensor& features) {
  std::vector<int64_t> idx;
  for (auto f : kDecodedFeatures) idx.push_back(static_cast<int64_t>(f));
  return features.index_select(1, torch::tensor(idx, torch::kInt64).to(features.device()));
}

SpeakerHeadImpl::SpeakerHeadImpl(int64_t n_mels, int64_t dim) {
  c1 = register_module("c1", Pointwise(n_mels, 80));
  c2 = register_module("c2", Pointwise(80, 64));
  c3 = register_module("c3", Pointwise(64, 32));
  c4 = register_module("c4", Pointwise(32, dim));
}

torch::Tensor SpeakerHeadImpl::Embed(const torch::Tensor& mel) {
  Require(mel.dim() == 2, "speaker head expects a [n_mels, T] mel");
  if (mel.size(1) < kSpeakerHeadMinFrames) Fail(ErrorCode::kInvalidArgument, "utterance too short for speaker head");
  auto x = torch::max_pool1d(torch::elu(c1(mel.unsqueeze(0))), 3);
  x = torch::max_pool1d(torch::elu(c2(x)), 3);
  x = c4(torch::elu(c3(x)));
  return x.mean(2).squeeze(0);
}

torch::Tensor SpeakerHeadImpl::forward(const torch::Tensor& mel, const torch::Tensor& lengths) {
  const auto len = lengths.to(torch::kCPU).to(torch::kInt64);
  std::vector<torch::Tensor> out;
  for (int64_t i = 0; i < mel.size(0); ++i) out.push_back(Embed(mel[i].slice(1, 0, len[i].item<int64_t>())));
  return torch::stack(out);
}

HeadsImpl::HeadsImpl(const HeadsConfig& cfg, bool use_classifier, bool use_decoders, bool use_speaker) {
  cfg.Validate();
  if (use_classifier) classifier = register_module("classifier", MelClassifier(cfg.n_mels));
  if (use_decoders) feature_decoders = register_module("feature_decoders", FeatureDecoders(cfg.n_mels));
  if (use_speaker) speaker = register_module("speaker", SpeakerHead(cfg.n_mels, cfg.speaker_dim));
}

}  // namespace karaoker::adversarial
