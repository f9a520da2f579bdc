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

#include "infer/synthesize.hpp"

#include <cstdio>

#include "common/error.hpp"
#include "features/waveform.hpp"
#include "model/layers.hpp"

namespace karaoker::infer {

torch::Tensor FeaturesToTensor(const features::FeatureSet& fs) {
  fs.Validate();
  const int T = fs.frames();
  auto out = torch::zeros({features::kNumFeatures, T}, torch::kFloat32);
  auto a = out.accessor<float, 2>();
  for (int f = 0; f < features::kNumFeatures; ++f) {
    for (int t = 0; t < T; ++t) a[f][t] = static_cast<float>(fs.tracks[static_cast<size_t>(f)].values[static_cast<size_t>(t)]);
  }
  return out;
}

features::MelSpectrogram TensorToMel(const torch::Tensor& mel) {
  Require(mel.dim() == 2, "mel tensor must be [n_mels, T]");
  const auto m = mel.detach().to(torch::kCPU).to(torch::kFloat32).contiguous();
  std::vector<float> bins(m.data_ptr<float>(), m.data_ptr<float>() + m.numel());
  return features::MelSpectrogram(static_cast<int>(m.size(0)), static_cast<int>(m.size(1)), std::move(bins));
}

torch::Tensor MelToTensor(const features::MelSpectrogram& mel) {
  return torch::from_blob(const_cast<float*>(mel.data().data()), {mel.n_mels(), mel.frames()}, torch::kFloat32)
      .clone();
}

features::FeatureSet ExtractTemplate(const train::InferenceBundle& bundle, const std::string& wav_path) {
  return features::AnalyzeWaveform(features::ReadWav(wav_path), bundle.features).features;
}

SynthesisResult Synthesize(const train::InferenceBundle& bundle, const TemplateSpec& spec,
                           const SynthesisOptions& opts, Diagnostics* diag) {
  Require(!bundle.model.is_empty(), "synthesize: no model loaded");
  const auto& speakers = bundle.meta.speakers;
  Require(speakers.Contains(spec.speaker), "unknown speaker: " + spec.speaker);
  spec.deviations.Validate();
  const int speaker = speakers.IndexOf(spec.speaker);

  const auto smoothed = SmoothTemplate(spec.source);
  const auto mapped = MapTemplate(smoothed, speakers.at(speaker).stats, diag);
  SynthesisResult res;
  res.conditioning = ApplyDeviations(mapped, spec.deviations);
  res.template_frames = res.conditioning.frames();

  std::vector<int64_t> tokens;
  if (!spec.text.empty()) tokens = bundle.meta.tokenizer.Encode(spec.text);
  auto gen = model::MakeGenerator(opts.seed);
  torch::NoGradGuard no_grad;
  auto model = bundle.model;
  const auto out = model->Infer(tokens, spec.textless, FeaturesToTensor(res.conditioning), speaker,
                                opts.decode, gen);
  res.mel = TensorToMel(out.mel_post[0]);
  res.alignment = out.alignment[0].detach().clone();
  const auto gate = torch::sigmoid(out.gate[0]).contiguous();
  res.gate.assign(gate.data_ptr<float>(), gate.data_ptr<float>() + gate.numel());
  res.truncated = out.truncated;
  if (res.truncated) WarnTo(diag, "gate did not fire within the step limit; output truncated");
  const double ratio = static_cast<double>(res.mel.frames()) / static_cast<double>(res.template_frames);
  if (ratio < opts.min_ratio || ratio > opts.max_ratio) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "output length %d is %.3f x the template length %d", res.mel.frames(), ratio,
                  res.template_frames);
    WarnTo(diag, buf);
  }
  return res;
}

}  // namespace karaoker::infer
