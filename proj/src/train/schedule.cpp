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

#include "train/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "common/error.hpp"

namespace karaoker::train {

int64_t TrainSchedule::warmup_start() const {
  return static_cast<int64_t>(std::llround(warmup_fraction * static_cast<double>(total_steps)));
}

int64_t TrainSchedule::adversarial_start() const {
  return static_cast<int64_t>(std::llround(adversarial_fraction * static_cast<double>(total_steps)));
}

double TrainSchedule::half_period() const {
  return std::max(1.0, lr_half_fraction * static_cast<double>(total_steps));
}

void TrainSchedule::Validate() const {
  Require(total_steps >= 1, "train: total_steps must be >= 1", ErrorCode::kConfig);
  Require(warmup_fraction > 0.0 && warmup_fraction < adversarial_fraction && adversarial_fraction < 1.0,
          "train: need 0 < warmup_fraction < adversarial_fraction < 1", ErrorCode::kConfig);
  Require(lr0 > 0.0, "train: lr must be positive", ErrorCode::kConfig);
  Require(lr_half_fraction > 0.0, "train: lr_half_fraction must be positive", ErrorCode::kConfig);
  Require(batch_size >= 1, "train: batch_size must be >= 1", ErrorCode::kConfig);
  Require(grad_clip > 0.0, "train: grad_clip must be positive", ErrorCode::kConfig);
  Require(divergence_window >= 2 && divergence_sigma >= 0.0, "train: bad divergence test settings",
          ErrorCode::kConfig);
  Require(adam_beta1 >= 0.0 && adam_beta1 < 1.0 && adam_beta2 >= 0.0 && adam_beta2 < 1.0 && adam_eps > 0.0 &&
              weight_decay >= 0.0,
          "train: bad optimizer settings", ErrorCode::kConfig);
}

TrainSchedule TrainSchedule::FromKv(const KvConfig& kv) {
  TrainSchedule s;
  s.total_steps = kv.GetInt("train.total_steps", s.total_steps);
  s.warmup_fraction = kv.GetDouble("train.warmup_fraction", s.warmup_fraction);
  s.adversarial_fraction = kv.GetDouble("train.adversarial_fraction", s.adversarial_fraction);
  s.lr0 = kv.GetDouble("train.lr", s.lr0);
  s.lr_half_fraction = kv.GetDouble("train.lr_half_fraction", s.lr_half_fraction);
  s.batch_size = static_cast<int>(kv.GetInt("train.batch_size", s.batch_size));
  s.grad_clip = kv.GetDouble("train.grad_clip", s.grad_clip);
  s.seed = static_cast<uint64_t>(kv.GetInt("train.seed", static_cast<int64_t>(s.seed)));
  s.divergence_window = static_cast<int>(kv.GetInt("train.divergence_window", s.divergence_window));
  s.divergence_sigma = kv.GetDouble("train.divergence_sigma", s.divergence_sigma);
  s.adam_beta1 = kv.GetDouble("train.adam_beta1", s.adam_beta1);
  s.adam_beta2 = kv.GetDouble("train.adam_beta2", s.adam_beta2);
  s.adam_eps = kv.GetDouble("train.adam_eps", s.adam_eps);
  s.weight_decay = kv.GetDouble("train.weight_decay", s.weight_decay);
  s.Validate();
  return s;
}

void TrainSchedule::ToKv(KvConfig& kv) const {
  kv.Set("train.total_steps", std::to_string(total_steps));
  kv.Set("train.warmup_fraction", FormatKvDouble(warmup_fraction));
  kv.Set("train.adversarial_fraction", FormatKvDouble(adversarial_fraction));
  kv.Set("train.lr", FormatKvDouble(lr0));
  kv.Set("train.lr_half_fraction", FormatKvDouble(lr_half_fraction));
  kv.Set("train.batch_size", std::to_string(batch_size));
  kv.Set("train.grad_clip", FormatKvDouble(grad_clip));
  kv.Set("train.seed", std::to_string(seed));
  kv.Set("train.divergence_window", std::to_string(divergence_window));
  kv.Set("train.divergence_sigma", FormatKvDouble(divergence_sigma));
  kv.Set("train.adam_beta1", FormatKvDouble(adam_beta1));
  kv.Set("train.adam_beta2", FormatKvDouble(adam_beta2));
  kv.Set("train.adam_eps", FormatKvDouble(adam_eps));
  kv.Set("train.weight_decay", FormatKvDouble(weight_decay));
}

double LrAt(int64_t step, const TrainSchedule& s) {
  Require(step >= 0, "lr_at: negative step");
  const double halvings = std::floor(static_cast<double>(step) / s.half_period());
  return s.lr0 * std::pow(0.5, halvings);
}

Phase PhaseAt(int64_t step, const TrainSchedule& s, bool divergence_ok) {
  Require(step >= 0, "phase_at: negative step");
  if (step < s.warmup_start()) return Phase::kPretrain;
  if (step < s.adversarial_start() || !divergence_ok) return Phase::kCriticWarmup;
  return Phase::kAdversarial;
}

DivergenceMonitor::DivergenceMonitor(int window, double sigma) : window_(window), sigma_(sigma) {}

void DivergenceMonitor::Push(double gap) {
  gaps_.push_back(gap);
  while (static_cast<int>(gaps_.size()) > window_) gaps_.pop_front();
}

double DivergenceMonitor::Mean() const {
  if (gaps_.empty()) return 0.0;
  return std::accumulate(gaps_.begin(), gaps_.end(), 0.0) / static_cast<double>(gaps_.size());
}

double DivergenceMonitor::StdDev() const {
  if (gaps_.size() < 2) return 0.0;
  const double m = Mean();
  double ss = 0.0;
  for (double g : gaps_) ss += (g - m) * (g - m);
  return std::sqrt(ss / static_cast<double>(gaps_.size() - 1));
}

bool DivergenceMonitor::Satisfied() const {
  return static_cast<int>(gaps_.size()) >= window_ && Mean() > sigma_ * StdDev();
}

void DivergenceMonitor::Restore(const std::vector<double>& gaps) {
  gaps_.assign(gaps.begin(), gaps.end());
  while (static_cast<int>(gaps_.size()) > window_) gaps_.pop_front();
}

PhaseTracker::PhaseTracker(const TrainSchedule& s)
    : schedule_(s), monitor_(s.divergence_window, s.divergence_sigma) {}

Phase PhaseTracker::Update(int64_t step) {
  const Phase p = PhaseAt(step, schedule_, monitor_.Satisfied());
  if (static_cast<int>(p) > static_cast<int>(phase_)) phase_ = p;
  return phase_;
}

}  // namespace karaoker::train
