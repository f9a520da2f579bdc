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

#include "adversarial/config.hpp"

#include <sstream>
#include <string>

#include "common/error.hpp"

namespace karaoker::adversarial {

namespace {

std::vector<int64_t> ParseList(const std::string& text) {
  std::vector<int64_t> out;
  std::string item;
  std::istringstream ss(text);
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stoll(item));
    } catch (const std::exception&) {
      Fail(ErrorCode::kConfig, "bad integer list: " + text);
    }
  }
  return out;
}

}  // namespace

void HeadsConfig::Validate() const {
  Require(n_mels > 0 && speaker_dim > 0, "heads: sizes must be positive", ErrorCode::kConfig);
  Require(windows.min >= 1 && windows.max >= windows.min, "heads: window range must satisfy 1 <= min <= max",
          ErrorCode::kConfig);
  Require(window_count >= 1, "heads: window count must be positive", ErrorCode::kConfig);
  Require(critic_channels.size() == 4, "heads: the critic has exactly 4 layers", ErrorCode::kConfig);
  for (auto c : critic_channels) Require(c > 0, "heads: critic widths must be positive", ErrorCode::kConfig);
  Require(gp_lambda >= 0.0, "heads: gradient penalty weight must be >= 0", ErrorCode::kConfig);
  Require(n_critic >= 1, "heads: n_critic must be >= 1", ErrorCode::kConfig);
}

HeadsConfig HeadsConfig::FromKv(const KvConfig& kv) {
  HeadsConfig c;
  c.n_mels = kv.GetInt("model.n_mels", c.n_mels);
  c.speaker_dim = kv.GetInt("model.speaker_dim", c.speaker_dim);
  c.windows.min = kv.GetInt("heads.window_min", c.windows.min);
  c.windows.max = kv.GetInt("heads.window_max", c.windows.max);
  c.window_count = static_cast<int>(kv.GetInt("heads.window_count", c.window_count));
  if (kv.Has("heads.critic_channels")) c.critic_channels = ParseList(kv.GetString("heads.critic_channels", ""));
  c.gp_lambda = kv.GetDouble("heads.gp_lambda", c.gp_lambda);
  c.n_critic = static_cast<int>(kv.GetInt("heads.n_critic", c.n_critic));
  c.leaky_slope = kv.GetDouble("heads.leaky_slope", c.leaky_slope);
  c.classifier_detach_fake = kv.GetBool("heads.classifier_detach_fake", c.classifier_detach_fake);
  c.Validate();
  return c;
}

void HeadsConfig::ToKv(KvConfig& kv) const {
  kv.Set("heads.window_min", std::to_string(windows.min));
  kv.Set("heads.window_max", std::to_string(windows.max));
  kv.Set("heads.window_count", std::to_string(window_count));
  std::string list;
  for (size_t i = 0; i < critic_channels.size(); ++i) {
    if (i) list += ',';
    list += std::to_string(critic_channels[i]);
  }
  kv.Set("heads.critic_channels", list);
  kv.Set("heads.gp_lambda", FormatKvDouble(gp_lambda));
  kv.Set("heads.n_critic", std::to_string(n_critic));
  kv.Set("heads.leaky_slope", FormatKvDouble(leaky_slope));
  kv.Set("heads.classifier_detach_fake", classifier_detach_fake ? "true" : "false");
}

}  // namespace karaoker::adversarial
