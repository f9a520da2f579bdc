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
#include <vector>

#include "common/kv_config.hpp"

namespace karaoker::adversarial {

struct WindowRange {
  int64_t min = 8;
  int64_t max = 32;
};

struct HeadsConfig {
  int64_t n_mels = 80;
  int64_t speaker_dim = 64;

  WindowRange windows;
  // Windows drawn per source per step.
  int window_count = 4;

  std::vector<int64_t> critic_channels = {8, 16, 32, 32};
  double gp_lambda = 10.0;
  int n_critic = 5;
  double leaky_slope = 0.2;

  // Fake windows reach the classifier without a gradient path into the
  // acoustic model.
  bool classifier_detach_fake = true;

  void Validate() const;
  static HeadsConfig FromKv(const KvConfig& kv);
  void ToKv(KvConfig& kv) const;
};

}  // namespace karaoker::adversarial
