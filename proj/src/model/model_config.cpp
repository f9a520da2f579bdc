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


#include "model/model_config.hpp"

#include "common/error.hpp"

namespace karaoker::model {

namespace {

struct IntField {
  const char* key;
  int ModelConfig::*field;
};

constexpr IntField kIntFields[] = {
    {"model.vocab_size", &ModelConfig::vocab_size},
    {"model.n_mels", &ModelConfig::n_mels},
    {"model.n_speakers", &ModelConfig::n_speakers},
    {"model.embed_dim", &ModelConfig::embed_dim},
    {"model.enc_convs", &ModelConfig::enc_convs},
    {"model.enc_kernel", &ModelConfig::enc_kernel},
    {"model.enc_channels", &ModelConfig::enc_channels},
    {"model.enc_lstm_dim", &ModelConfig::enc_lstm_dim},
    {"model.feat_channels", &ModelConfig::feat_channels},
    {"model.feat_blocks", &ModelConfig::feat_blocks},
    {"model.feat_hidden", &ModelConfig::feat_hidden},
    {"model.prenet_layers", &ModelConfig::prenet_layers},
    {"model.prenet_dim", &ModelConfig::prenet_dim},
    {"model.slice_dim", &ModelConfig::slice_dim},
    {"model.att_cond_dim", &ModelConfig::att_cond_dim},
    {"model.mean_dim", &ModelConfig::mean_dim},
    {"model.att_rnn_dim", &ModelConfig::att_rnn_dim},
    {"model.dec_rnn_dim", &ModelConfig::dec_rnn_dim},
    {"model.mol_components", &ModelConfig::mol_components},
    {"model.mol_hidden", &ModelConfig::mol_hidden},
    {"model.r", &ModelConfig::r},
    {"model.postnet_layers", &ModelConfig::postnet_layers},
    {"model.postnet_channels", &ModelConfig::postnet_channels},
    {"model.postnet_kernel", &ModelConfig::postnet_kernel},
    {"model.speaker_dim", &ModelConfig::speaker_dim},
};

}  // namespace

ModelConfig ModelConfig::Full() { return ModelConfig{}; }

ModelConfig ModelConfig::Desk() {
  ModelConfig c;
  c.embed_dim = 64;
  c.enc_channels = 64;
  c.enc_lstm_dim = 64;
  c.prenet_dim = 64;
  c.slice_dim = 16;
  c.att_cond_dim = 16;
  c.mean_dim = 16;
  c.att_rnn_dim = 128;
  c.dec_rnn_dim = 128;
  c.mol_hidden = 64;
  c.postnet_layers = 3;
  c.postnet_channels = 64;
  return c;
}

ModelConfig ModelConfig::Preset(const std::string& name) {
  if (name == "full") return Full();
  if (name == "desk") return Desk();
  Fail(ErrorCode::kConfig, "unknown model preset: " + name);
}

void ModelConfig::Validate() const {
  for (const auto& f : kIntFields) {
    Require(this->*f.field > 0, std::string(f.key) + " must be positive", ErrorCode::kConfig);
  }
  Require(enc_lstm_dim % 2 == 0, "model.enc_lstm_dim must be even", ErrorCode::kConfig);
  Require(enc_kernel % 2 == 1 && postnet_kernel % 2 == 1, "conv kernels must be odd",
          ErrorCode::kConfig);
  Require(prenet_dropout >= 0.0 && prenet_dropout < 1.0, "model.prenet_dropout must be in [0, 1)",
          ErrorCode::kConfig);
  Require(vocab_size >= 2, "model.vocab_size must cover PAD and UNK", ErrorCode::kConfig);
}

ModelConfig ModelConfig::FromKv(const KvConfig& kv) {
  ModelConfig c = Preset(kv.GetString("model.preset", "desk"));
  for (const auto& f : kIntFields) c.*f.field = static_cast<int>(kv.GetInt(f.key, c.*f.field));
  c.prenet_dropout = kv.GetDouble("model.prenet_dropout", c.prenet_dropout);
  c.Validate();
  return c;
}

void ModelConfig::ToKv(KvConfig& kv) const {
  for (const auto& f : kIntFields) kv.Set(f.key, std::to_string(this->*f.field));
  kv.Set("model.prenet_dropout", FormatKvDouble(prenet_dropout));
}

}  // namespace karaoker::model
