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

#include "train/train_config.hpp"

#include "common/error.hpp"

namespace karaoker::train {

using objectives::Term;

bool Components::Enabled(Term t) const {
  switch (t) {
    case Term::kMel:
    case Term::kGate:
    case Term::kAtt:
      return true;
    case Term::kSvd:
      return svd;
    case Term::kMelRate:
      return mel_rate;
    case Term::kRec:
      return feature_decoders;
    case Term::kClass:
      return classifier;
    case Term::kSpk:
      return speaker;
    case Term::kCritic:
      return critic;
  }
  return false;
}

const std::vector<Ablation>& Ablations() {
  static const std::vector<Ablation> rows = [] {
    auto make = [](int n, const char* name, const char* desc, Components c) { return Ablation{n, name, desc, c}; };
    Components base{false, false, false, false, false, false};
    Components svd = base;
    svd.svd = true;
    Components mr = base;
    mr.mel_rate = true;
    Components both = svd;
    both.mel_rate = true;
    Components full;
    Components no_dec = full;
    no_dec.feature_decoders = false;
    no_dec.critic = false;
    Components no_class = full;
    no_class.classifier = false;
    no_class.critic = false;
    Components no_critic = full;
    no_critic.critic = false;
    return std::vector<Ablation>{
        make(1, "baseline", "mel, gate and guided attention losses", base),
        make(2, "base_svd", "baseline + svd loss", svd),
        make(3, "base_mel_rate", "baseline + mel rate loss", mr),
        make(4, "base_svd_mel_rate", "baseline + svd and mel rate losses", both),
        make(5, "no_decoders_critic", "all components except feature decoders and critic", no_dec),
        make(6, "no_classifier_critic", "all components except mel classifier and critic", no_class),
        make(7, "loss_scaling_no_critic", "as no_critic; loss scaling is not implemented", no_critic),
        make(8, "no_critic", "all components except the critic", no_critic),
        make(9, "full", "all components", full),
    };
  }();
  return rows;
}

const Ablation& AblationByName(const std::string& name) {
  for (const auto& a : Ablations()) {
    if (name == a.name || name == std::to_string(a.number)) return a;
  }
  Fail(ErrorCode::kConfig, "unknown ablation: " + name);
}

void TrainConfig::Validate() const {
  model.Validate();
  heads.Validate();
  schedule.Validate();
  Require(heads.speaker_dim == model.speaker_dim && heads.n_mels == model.n_mels,
          "heads and model sizes disagree", ErrorCode::kConfig);
  Require(guided_attention_g > 0.0, "loss.guided_attention_g must be positive", ErrorCode::kConfig);
  Require(svd_k >= 1, "loss.svd_k must be >= 1", ErrorCode::kConfig);
  Require(textless_prob >= 0.0 && textless_prob <= 1.0, "train.textless_prob must be in [0, 1]",
          ErrorCode::kConfig);
  Require(log_every >= 1 && checkpoint_every >= 1, "train: logging intervals must be positive", ErrorCode::kConfig);
  Require(classifier_start >= 0 && decoders_start >= 0 && speaker_start >= 0,
          "train: head start steps must be >= 0", ErrorCode::kConfig);
}

TrainConfig TrainConfig::FromKv(const KvConfig& kv) {
  TrainConfig c;
  c.model = model::ModelConfig::FromKv(kv);
  c.heads = adversarial::HeadsConfig::FromKv(kv);
  c.heads.n_mels = c.model.n_mels;
  c.heads.speaker_dim = c.model.speaker_dim;
  c.schedule = TrainSchedule::FromKv(kv);
  c.ablation = AblationByName(kv.GetString("train.ablation", "full"));
  c.reconstruction.dtw.gamma = kv.GetDouble("loss.dtw_gamma", c.reconstruction.dtw.gamma);
  c.reconstruction.dtw.band = kv.GetDouble("loss.dtw_band", c.reconstruction.dtw.band);
  c.reconstruction.divergence = kv.GetBool("loss.dtw_divergence", c.reconstruction.divergence);
  c.guided_attention_g = kv.GetDouble("loss.guided_attention_g", c.guided_attention_g);
  c.svd_k = static_cast<int>(kv.GetInt("loss.svd_k", c.svd_k));
  c.classifier_conventional = kv.GetBool("loss.classifier_conventional", c.classifier_conventional);
  c.textless_prob = kv.GetDouble("train.textless_prob", c.textless_prob);
  c.classifier_start = kv.GetInt("train.classifier_start", c.classifier_start);
  c.decoders_start = kv.GetInt("train.decoders_start", c.decoders_start);
  c.speaker_start = kv.GetInt("train.speaker_start", c.speaker_start);
  c.log_every = static_cast<int>(kv.GetInt("train.log_every", c.log_every));
  c.checkpoint_every = kv.GetInt("train.checkpoint_every", c.checkpoint_every);
  for (const auto& key : kv.UnreadKeys()) {
    for (const char* prefix : {"model.", "heads.", "train.", "loss."}) {
      if (key.rfind(prefix, 0) == 0) Fail(ErrorCode::kConfig, "unknown config key: " + key);
    }
  }
  c.Validate();
  return c;
}

KvConfig TrainConfig::ToKv() const {
  KvConfig kv;
  model.ToKv(kv);
  heads.ToKv(kv);
  schedule.ToKv(kv);
  kv.Set("train.ablation", ablation.name);
  kv.Set("loss.dtw_gamma", FormatKvDouble(reconstruction.dtw.gamma));
  kv.Set("loss.dtw_band", FormatKvDouble(reconstruction.dtw.band));
  kv.Set("loss.dtw_divergence", reconstruction.divergence ? "true" : "false");
  kv.Set("loss.guided_attention_g", FormatKvDouble(guided_attention_g));
  kv.Set("loss.svd_k", std::to_string(svd_k));
  kv.Set("loss.classifier_conventional", classifier_conventional ? "true" : "false");
  kv.Set("train.textless_prob", FormatKvDouble(textless_prob));
  kv.Set("train.classifier_start", std::to_string(classifier_start));
  kv.Set("train.decoders_start", std::to_string(decoders_start));
  kv.Set("train.speaker_start", std::to_string(speaker_start));
  kv.Set("train.log_every", std::to_string(log_every));
  kv.Set("train.checkpoint_every", std::to_string(checkpoint_every));
  return kv;
}

std::string TrainConfig::Hash() const { return HexDigest(Fnv1a64(ToKv().Serialize())); }

}  // namespace karaoker::train
