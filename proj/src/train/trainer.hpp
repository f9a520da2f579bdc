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

#include <memory>
#include <random>
#include <string>
#include <vector>

#include "adversarial/critic.hpp"
#include "adversarial/heads.hpp"
#include "common/log.hpp"
#include "data/batch.hpp"
#include "data/manifest.hpp"
#include "model/acoustic_model.hpp"
#include "objectives/losses.hpp"
#include "train/checkpoint.hpp"
#include "train/schedule.hpp"
#include "train/train_config.hpp"

namespace karaoker::train {

struct StepResult {
  int64_t step = 0;  // completed steps, this one included
  Phase phase = Phase::kPretrain;
  double lr = 0.0;
  objectives::LossReport report;
  double grad_norm = 0.0;       // before clipping
  double clipped_norm = 0.0;    // after clipping
  double critic_loss = 0.0;     // last critic update, 0 if none
  double critic_gap = 0.0;      // mean real - mean fake score
  bool critic_updated = false;
};

// Everything the generator loss depends on besides the batch and outputs.
// Window sampling draws from `rng`.
struct LossContext {
  const TrainConfig& cfg;
  model::AcousticModel& model;
  adversarial::Heads& heads;
  adversarial::Critic& critic;
  int64_t step;
  std::mt19937_64& rng;
};

// All enabled generator loss terms for one forward pass.
objectives::LossTerms ComputeLossTerms(const LossContext& ctx, const data::Batch& batch,
                                       const model::AcousticOutput& out, Phase phase);

class Trainer {
 public:
  // The model's vocabulary and speaker count are taken from the manifest.
  Trainer(TrainConfig cfg, data::Manifest manifest, std::string features_text = {},
          Diagnostics* diag = nullptr);

  StepResult Step();
  int64_t step() const { return step_; }
  Phase phase() const { return tracker_.phase(); }

  // Fails on a configuration mismatch unless `force` is set.
  void Save(const std::string& path) const;
  void Load(const std::string& path, bool force = false);

  const TrainConfig& config() const { return cfg_; }
  model::AcousticModel& model() { return model_; }
  adversarial::Heads& heads() { return heads_; }
  adversarial::Critic& critic() { return critic_; }
  const data::Manifest& manifest() const { return manifest_; }
  std::vector<torch::Tensor> GeneratorParameters() const;

 private:
  void CriticUpdates(const data::Batch& batch, const model::AcousticOutput& out, StepResult& res);
  void SetLr(double lr);

  TrainConfig cfg_;
  data::Manifest manifest_;
  std::string features_text_;
  Diagnostics* diag_;
  std::vector<data::Example> examples_;
  std::unique_ptr<data::BatchIterator> iterator_;

  model::AcousticModel model_{nullptr};
  adversarial::Heads heads_{nullptr};
  adversarial::Critic critic_{nullptr};
  std::unique_ptr<torch::optim::Adam> gen_opt_;
  std::unique_ptr<torch::optim::Adam> critic_opt_;

  at::Generator dropout_gen_;
  std::mt19937_64 rng_;
  PhaseTracker tracker_;
  int64_t step_ = 0;
};

struct TrainRunOptions {
  std::string out_dir;
  bool resume = false;
  bool force = false;
  // 0 runs to the schedule's total_steps.
  int64_t max_steps = 0;
};

struct TrainRunResult {
  std::vector<StepResult> history;
  std::string final_checkpoint;
};

// Loads <data_dir>/manifest.txt, trains, writes <out>/losses.log,
// <out>/config.txt, periodic <out>/step_<n>.ckpt and <out>/final.ckpt.
TrainRunResult RunTraining(const TrainConfig& cfg, const std::string& data_dir, const TrainRunOptions& opts,
                           Diagnostics* diag = nullptr);

}  // namespace karaoker::train
