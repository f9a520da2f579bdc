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

#include <cstdint>
#include <string>
#include <vector>

#include "adversarial/config.hpp"
#include "common/kv_config.hpp"
#include "model/model_config.hpp"
#include "objectives/losses.hpp"
#include "train/schedule.hpp"

namespace karaoker::train {

// Switchable training components. Mel, gate and guided attention are
// always on.
struct Components {
  bool svd = true;
  bool mel_rate = true;
  bool feature_decoders = true;
  bool classifier = true;
  bool speaker = true;
  bool critic = true;

  bool Enabled(objectives::Term t) const;
  bool operator==(const Components&) const = default;
};

struct Ablation {
  int number = 9;
  std::string name;
  std::string description;
  Components components;
};

// Rows 1..9 of the ablation table.
const std::vector<Ablation>& Ablations();
// Accepts "1".."9" or a row name such as "baseline" or "full".
const Ablation& AblationByName(const std::string& name);

struct TrainConfig {
  model::ModelConfig model = model::ModelConfig::Desk();
  adversarial::HeadsConfig heads;
  TrainSchedule schedule;
  Ablation ablation = Ablations().back();

  objectives::ReconstructionOptions reconstruction;
  double guided_attention_g = 0.2;
  int svd_k = 8;
  bool classifier_conventional = false;
  double textless_prob = 0.0;

  int64_t classifier_start = 0;
  int64_t decoders_start = 0;
  int64_t speaker_start = 0;

  int log_every = 10;
  int64_t checkpoint_every = 500;

  void Validate() const;
  static TrainConfig FromKv(const KvConfig& kv);
  KvConfig ToKv() const;
  // FNV-1a of the canonical key-value text.
  std::string Hash() const;
};

}  // namespace karaoker::train
