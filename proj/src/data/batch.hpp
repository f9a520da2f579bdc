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
#include <vector>

#include "data/manifest.hpp"
#include "features/feature_set.hpp"

namespace karaoker::data {

// One training example held in memory: normalised contours plus log-mel.
struct Example {
  std::string id;
  int speaker_index = 0;
  std::vector<int64_t> token_ids;
  bool textless = false;
  features::FeatureSet contours;  // normalised
  features::MelSpectrogram mel;

  int frames() const { return mel.frames(); }
};

Example LoadExample(const Manifest& m, const UtteranceRecord& rec, Diagnostics* diag = nullptr);
std::vector<Example> LoadExamples(const Manifest& m, Diagnostics* diag = nullptr);

struct Batch {
  torch::Tensor tokens;        // [B, N] int64, kPad beyond the text length
  torch::Tensor text_mask;     // [B, N] bool
  torch::Tensor text_lengths;  // [B] int64
  torch::Tensor mels;          // [B, n_mels, T] float
  torch::Tensor frame_mask;    // [B, T] bool
  torch::Tensor mel_lengths;   // [B] int64
  torch::Tensor features;      // [B, 9, T] float, 0 on padding
  torch::Tensor voiced;        // [B, 9, T] bool
  torch::Tensor gate_targets;  // [B, T] float
  torch::Tensor speaker_ids;   // [B] int64
  torch::Tensor textless;      // [B] bool
  std::vector<std::string> ids;
  int group_size = 1;

  int64_t size() const { return mels.size(0); }
  int64_t max_frames() const { return mels.size(2); }
  Batch To(const torch::Device& device) const;
};

// Pads T up to a multiple of r (text to the longest item, at least one
// column); gate target is 1 from each item's last valid frame onward.
Batch MakeBatch(const std::vector<const Example*>& items, int r);

// Single-consumer, seeded, length-bucketed iterator. The order is a pure
// function of (seed, epoch), so a position is fully described by
// (epoch, cursor).
class BatchIterator {
 public:
  struct State {
    int64_t epoch = 0;
    int64_t cursor = 0;
  };

  BatchIterator(const std::vector<Example>& examples, int batch_size, int r, uint64_t seed,
                int bucket_factor = 4);

  Batch Next();
  State state() const { return state_; }
  void set_state(State s);
  int64_t batches_per_epoch() const { return static_cast<int64_t>(plan_.size()); }
  // Index lists of the current epoch's batches, for inspection.
  const std::vector<std::vector<size_t>>& plan() const { return plan_; }

 private:
  void Plan();

  const std::vector<Example>& examples_;
  int batch_size_;
  int r_;
  uint64_t seed_;
  int bucket_factor_;
  State state_;
  int64_t planned_epoch_ = -1;
  std::vector<std::vector<size_t>> plan_;
};

}  // namespace karaoker::data
