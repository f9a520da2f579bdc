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

#include <string>

#include "common/kv_config.hpp"

namespace karaoker::model {

// Dimensions of the acoustic model. Keys use the "model." prefix.
struct ModelConfig {
  int vocab_size = 40;
  int n_mels = 80;
  int n_speakers = 1;

  int embed_dim = 512;
  int enc_convs = 3;
  int enc_kernel = 5;
  int enc_channels = 512;
  int enc_lstm_dim = 512;  // both directions together

  int feat_channels = 9;
  int feat_blocks = 8;
  int feat_hidden = 64;

  int prenet_layers = 2;
  int prenet_dim = 256;
  double prenet_dropout = 0.5;

  // Conditioning projections: decoder-step slice into the prenet output,
  // slice into the attention query, utterance mean into the query.
  int slice_dim = 32;
  int att_cond_dim = 32;
  int mean_dim = 32;

  int att_rnn_dim = 1024;
  int dec_rnn_dim = 1024;
  int mol_components = 5;
  int mol_hidden = 128;
  int r = 5;

  int postnet_layers = 5;
  int postnet_channels = 512;
  int postnet_kernel = 5;

  int speaker_dim = 64;

  static ModelConfig Full();
  // Reduced widths for CPU-scale runs.
  static ModelConfig Desk();
  // "full" or "desk".
  static ModelConfig Preset(const std::string& name);

  int text_dim() const { return enc_lstm_dim; }
  int memory_dim() const { return enc_lstm_dim + feat_channels + speaker_dim; }
  int query_dim() const { return att_rnn_dim + att_cond_dim + mean_dim; }

  void Validate() const;
  // Starts from the preset named by "model.preset" (default "desk").
  static ModelConfig FromKv(const KvConfig& kv);
  void ToKv(KvConfig& kv) const;
};

}  // namespace karaoker::model
