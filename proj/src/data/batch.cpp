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

#include "data/batch.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "common/error.hpp"
#include "features/feature_cache.hpp"

namespace karaoker::data {

Example LoadExample(const Manifest& m, const UtteranceRecord& rec, Diagnostics* diag) {
  const auto cached = features::ReadFeatureCache(m.ResolveCache(rec));
  Require(cached.speaker_id == rec.speaker_id && cached.utterance_id == rec.id,
          "cache " + rec.cache_path + " does not match its manifest record", ErrorCode::kFormat);
  Example ex;
  ex.id = rec.id;
  ex.speaker_index = m.speakers.IndexOf(rec.speaker_id);
  ex.token_ids = rec.token_ids;
  ex.textless = rec.textless;
  ex.contours = features::NormalizeContours(cached.data.features, m.speakers.at(ex.speaker_index).stats, diag);
  ex.mel = cached.data.mel;
  return ex;
}

std::vector<Example> LoadExamples(const Manifest& m, Diagnostics* diag) {
  std::vector<Example> out;
  out.reserve(m.records.size());
  for (const auto& rec : m.records) out.push_back(LoadExample(m, rec, diag));
  return out;
}

Batch Batch::To(const torch::Device& device) const {
  Batch b = *this;
  for (auto* t : {&b.tokens, &b.text_mask, &b.text_lengths, &b.mels, &b.frame_mask, &b.mel_lengths,
                  &b.features, &b.voiced, &b.gate_targets, &b.speaker_ids, &b.textless}) {
    *t = t->to(device);
  }
  return b;
}

Batch MakeBatch(const std::vector<const Example*>& items, int r) {
  Require(!items.empty(), "make_batch: no records");
  Require(r >= 1, "make_batch: group size must be positive");
  const int64_t B = static_cast<int64_t>(items.size());
  const int n_mels = items[0]->mel.n_mels();
  int64_t t_max = 0;
  int64_t n_max = 1;
  for (const auto* ex : items) {
    Require(ex->mel.n_mels() == n_mels, "make_batch: mel bin counts differ");
    Require(ex->frames() > 0, "make_batch: empty example " + ex->id);
    Require(ex->contours.frames() == ex->frames(), "make_batch: contour length mismatch in " + ex->id);
    t_max = std::max<int64_t>(t_max, ex->frames());
    n_max = std::max<int64_t>(n_max, static_cast<int64_t>(ex->token_ids.size()));
  }
  t_max = (t_max + r - 1) / r * r;

  Batch b;
  b.group_size = r;
  b.tokens = torch::zeros({B, n_max}, torch::kInt64);
  b.text_mask = torch::zeros({B, n_max}, torch::kBool);
  b.text_lengths = torch::zeros({B}, torch::kInt64);
  b.mels = torch::zeros({B, n_mels, t_max}, torch::kFloat32);
  b.frame_mask = torch::zeros({B, t_max}, torch::kBool);
  b.mel_lengths = torch::zeros({B}, torch::kInt64);
  b.features = torch::zeros({B, features::kNumFeatures, t_max}, torch::kFloat32);
  b.voiced = torch::zeros({B, features::kNumFeatures, t_max}, torch::kBool);
  b.gate_targets = torch::zeros({B, t_max}, torch::kFloat32);
  b.speaker_ids = torch::zeros({B}, torch::kInt64);
  b.textless = torch::zeros({B}, torch::kBool);

  auto tok = b.tokens.accessor<int64_t, 2>();
  auto tmask = b.text_mask.accessor<bool, 2>();
  auto mel = b.mels.accessor<float, 3>();
  auto fmask = b.frame_mask.accessor<bool, 2>();
  auto feat = b.features.accessor<float, 3>();
  auto voiced = b.voiced.accessor<bool, 3>();
  auto gate = b.gate_targets.accessor<float, 2>();
  for (int64_t i = 0; i < B; ++i) {
    const Example& ex = *items[static_cast<size_t>(i)];
    const int64_t T = ex.frames();
    const int64_t N = static_cast<int64_t>(ex.token_ids.size());
    for (int64_t n = 0; n < N; ++n) {
      tok[i][n] = ex.token_ids[static_cast<size_t>(n)];
      tmask[i][n] = true;
    }
    for (int m = 0; m < n_mels; ++m) {
      for (int64_t t = 0; t < T; ++t) mel[i][m][t] = ex.mel.at(m, static_cast<int>(t));
    }
    for (int f = 0; f < features::kNumFeatures; ++f) {
      const auto& tr = ex.contours.tracks[f];
      for (int64_t t = 0; t < T; ++t) {
        feat[i][f][t] = static_cast<float>(tr.values[static_cast<size_t>(t)]);
        voiced[i][f][t] = tr.voiced[static_cast<size_t>(t)] != 0;
      }
    }
    for (int64_t t = 0; t < t_max; ++t) {
      fmask[i][t] = t < T;
      gate[i][t] = t >= T - 1 ? 1.0f : 0.0f;
    }
    b.text_lengths[i] = N;
    b.mel_lengths[i] = T;
    b.speaker_ids[i] = ex.speaker_index;
    b.textless[i] = ex.textless;
    b.ids.push_back(ex.id);
  }
  return b;
}

BatchIterator::BatchIterator(const std::vector<Example>& examples, int batch_size, int r,
                             uint64_t seed, int bucket_factor)
    : examples_(examples), batch_size_(batch_size), r_(r), seed_(seed),
      bucket_factor_(bucket_factor) {
  Require(!examples_.empty(), "batch iterator: no examples", ErrorCode::kNoData);
  Require(batch_size_ >= 1, "batch size must be positive");
  Require(bucket_factor_ >= 1, "bucket factor must be positive");
  Plan();
}

void BatchIterator::Plan() {
  if (planned_epoch_ == state_.epoch) return;
  const auto e = static_cast<uint64_t>(state_.epoch);
  std::seed_seq seq{static_cast<uint32_t>(seed_), static_cast<uint32_t>(seed_ >> 32),
                    static_cast<uint32_t>(e), static_cast<uint32_t>(e >> 32)};
  std::mt19937_64 rng(seq);
  std::vector<size_t> order(examples_.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::shuffle(order.begin(), order.end(), rng);

  // Sort within buckets of bucket_factor * batch_size, then cut batches.
  plan_.clear();
  const size_t bucket = static_cast<size_t>(batch_size_) * static_cast<size_t>(bucket_factor_);
  for (size_t start = 0; start < order.size(); start += bucket) {
    const auto first = order.begin() + static_cast<std::ptrdiff_t>(start);
    const auto last = order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), start + bucket));
    std::stable_sort(first, last, [&](size_t a, size_t b) {
      return examples_[a].frames() < examples_[b].frames();
    });
    for (auto it = first; it < last; it += std::min<std::ptrdiff_t>(batch_size_, last - it)) {
      plan_.emplace_back(it, it + std::min<std::ptrdiff_t>(batch_size_, last - it));
    }
  }
  std::shuffle(plan_.begin(), plan_.end(), rng);
  planned_epoch_ = state_.epoch;
}

void BatchIterator::set_state(State s) {
  Require(s.epoch >= 0 && s.cursor >= 0, "invalid iterator state");
  state_ = s;
  Plan();
  Require(state_.cursor <= batches_per_epoch(), "iterator cursor beyond epoch");
}

Batch BatchIterator::Next() {
  Plan();
  if (state_.cursor >= batches_per_epoch()) {
    ++state_.epoch;
    state_.cursor = 0;
    Plan();
  }
  const auto& idx = plan_[static_cast<size_t>(state_.cursor++)];
  std::vector<const Example*> items;
  items.reserve(idx.size());
  for (size_t i : idx) items.push_back(&examples_[i]);
  return MakeBatch(items, r_);
}

}  // namespace karaoker::data
