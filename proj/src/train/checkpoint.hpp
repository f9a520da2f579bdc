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

#include "adversarial/heads.hpp"
#include "data/manifest.hpp"
#include "features/feature_set.hpp"
#include "model/acoustic_model.hpp"
#include "train/train_config.hpp"

namespace karaoker::train {

inline constexpr int64_t kCheckpointVersion = 1;

// Everything a checkpoint needs besides parameters and trainer state.
struct CheckpointMeta {
  int64_t step = 0;
  std::string config_text;
  std::string config_hash;
  std::string features_text;
  data::Tokenizer tokenizer;
  data::SpeakerTable speakers;
};

void WriteMeta(torch::serialize::OutputArchive& ar, const CheckpointMeta& meta);
CheckpointMeta ReadMeta(torch::serialize::InputArchive& ar);

// Writes `path`.tmp, then renames over `path`.
void SaveArchiveAtomic(torch::serialize::OutputArchive& ar, const std::string& path);
void LoadArchive(torch::serialize::InputArchive& ar, const std::string& path);

void SaveModule(torch::serialize::OutputArchive& ar, const std::string& key, const torch::nn::Module& m);
void LoadModule(torch::serialize::InputArchive& ar, const std::string& key, torch::nn::Module& m);

void WriteString(torch::serialize::OutputArchive& ar, const std::string& key, const std::string& value);
std::string ReadString(torch::serialize::InputArchive& ar, const std::string& key);
void WriteInt(torch::serialize::OutputArchive& ar, const std::string& key, int64_t value);
int64_t ReadInt(torch::serialize::InputArchive& ar, const std::string& key);

// Acoustic model plus lookup tables; training-only parts are skipped except
// the speaker head when requested.
struct InferenceBundle {
  TrainConfig config;
  features::FeatureConfig features;
  CheckpointMeta meta;
  model::AcousticModel model{nullptr};
  adversarial::SpeakerHead speaker_head{nullptr};
};

InferenceBundle LoadInferenceBundle(const std::string& path, bool with_speaker_head = false);

}  // namespace karaoker::train
