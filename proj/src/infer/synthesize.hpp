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
#include <string>
#include <vector>

#include "common/log.hpp"
#include "features/feature_set.hpp"
#include "infer/template.hpp"
#include "train/checkpoint.hpp"

namespace karaoker::infer {

struct TemplateSpec {
  features::FeatureSet source;  // raw template contours
  std::string speaker;
  Deviations deviations;
  bool textless = false;
  std::string text;
};

struct SynthesisOptions {
  uint64_t seed = 0;
  model::InferOptions decode;
  // Allowed output/template length ratio before a warning.
  double min_ratio = 0.8;
  double max_ratio = 1.3;
};

struct SynthesisResult {
  features::MelSpectrogram mel;
  torch::Tensor alignment;  // [S, N]
  std::vector<float> gate;  // sigmoid per step
  features::FeatureSet conditioning;  // normalised contours fed to the model
  int template_frames = 0;
  bool truncated = false;
};

// Smooths, maps to the speaker, applies deviations and decodes.
SynthesisResult Synthesize(const train::InferenceBundle& bundle, const TemplateSpec& spec,
                           const SynthesisOptions& opts = {}, Diagnostics* diag = nullptr);

// Template contours of a wav file under the checkpoint's feature settings.
features::FeatureSet ExtractTemplate(const train::InferenceBundle& bundle, const std::string& wav_path);

torch::Tensor FeaturesToTensor(const features::FeatureSet& fs);
features::MelSpectrogram TensorToMel(const torch::Tensor& mel);  // [n_mels, T]
torch::Tensor MelToTensor(const features::MelSpectrogram& mel);  // [n_mels, T] float

}  // namespace karaoker::infer
