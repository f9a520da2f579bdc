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
#include <deque>
#include <vector>

#include "common/kv_config.hpp"
#include "objectives/losses.hpp"

namespace karaoker::train {

using objectives::Phase;

// Step counts are fractions of total_steps so short runs keep the shape of
// the full schedule.
struct TrainSchedule {
  int64_t total_steps = 2000;
  double warmup_fraction = 0.30;
  double adversarial_fraction = 0.50;
  double lr0 = 0.0005;
  double lr_half_fraction = 0.20;
  int batch_size = 8;
  double grad_clip = 1.0;
  uint64_t seed = 1;

  int divergence_window = 500;
  double divergence_sigma = 2.0;

  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double weight_decay = 1e-6;

  int64_t warmup_start() const;
  int64_t adversarial_start() const;
  double half_period() const;

  void Validate() const;
  static TrainSchedule FromKv(const KvConfig& kv);
  void ToKv(KvConfig& kv) const;
};

// lr0 * 0.5^floor(step / half_period).
double LrAt(int64_t step, const TrainSchedule& s);

// Stateless phase of a step; adversarial needs both the step bound and a
// passed divergence test.
Phase PhaseAt(int64_t step, const TrainSchedule& s, bool divergence_ok);

// Running test on the real-minus-fake critic score gap: passes once a full
// window has mean gap > sigma * std.
class DivergenceMonitor {
 public:
  DivergenceMonitor(int window = 500, double sigma = 2.0);
  void Push(double gap);
  bool Satisfied() const;
  double Mean() const;
  double StdDev() const;
  const std::deque<double>& gaps() const { return gaps_; }
  void Restore(const std::vector<double>& gaps);

 private:
  int window_;
  double sigma_;
  std::deque<double> gaps_;
};

// Latched, monotone phase.
class PhaseTracker {
 public:
  explicit PhaseTracker(const TrainSchedule& s);
  Phase Update(int64_t step);
  Phase phase() const { return phase_; }
  DivergenceMonitor& monitor() { return monitor_; }
  const DivergenceMonitor& monitor() const { return monitor_; }
  void Restore(Phase p) { phase_ = p; }

 private:
  TrainSchedule schedule_;
  DivergenceMonitor monitor_;
  Phase phase_ = Phase::kPretrain;
};

}  // namespace karaoker::train
