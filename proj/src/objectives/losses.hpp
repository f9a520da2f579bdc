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

// Loss terms of the Karaoker objective. Batched losses take a frame mask
// [B, T] and reduce as a mean over items of per-item means, so padding
// never changes a value.

#include <torch/torch.h>

#include <array>
#include <string>
#include <string_view>

#include "objectives/soft_dtw.hpp"

namespace karaoker::objectives {

// exp of min-max normalisation along `dim`; all ones when the range is
// below 1e-8.
torch::Tensor FScale(const torch::Tensor& x, int64_t dim = -1);
// FScale of first differences along `dim` (length >= 2).
torch::Tensor FRate(const torch::Tensor& x, int64_t dim = -1);

// Mean squared error of mel_dec and mel_post against mel, valid frames only.
torch::Tensor MelLoss(const torch::Tensor& mel, const torch::Tensor& mel_dec,
                      const torch::Tensor& mel_post, const torch::Tensor& mask);

// BCE-with-logits of gate logits [B, S] against the target of each step's
// last frame; steps beyond ceil(T_valid / r) are ignored.
torch::Tensor GateLoss(const torch::Tensor& gate_logits, const torch::Tensor& gate_targets,
                       const torch::Tensor& mel_lengths, int r);

// |f_rate(mel) - f_rate(mel_dec)|_1 + |f_rate(mel) - f_rate(mel_post)|_1,
// f_rate per mel bin along time over the valid frames (means of absolute
// differences). Items with fewer than two valid frames contribute 0.
torch::Tensor MelRateLoss(const torch::Tensor& mel, const torch::Tensor& mel_dec,
                          const torch::Tensor& mel_post, const torch::Tensor& mask);

// Left singular vectors of a [m, n] matrix, first k columns, each column
// signed so its largest-magnitude entry is positive.
torch::Tensor SignedLeftBasis(const torch::Tensor& a, int64_t k);

// Mean |U_mel - U_post| over the first k left basis vectors.
torch::Tensor SvdLoss(const torch::Tensor& mel, const torch::Tensor& mel_post,
                      const torch::Tensor& mask, int64_t k = 8);

struct ReconstructionOptions {
  SoftDtwOptions dtw{0.1, 0.2};
  // Use the soft-DTW divergence instead of the raw soft-DTW value.
  bool divergence = false;
};

// Sum over tracks of (sdtw(feat, dec) + sdtw(f_rate feat, f_rate dec)) / L,
// with feats/decs [B, N, T].
torch::Tensor ReconstructionLoss(const torch::Tensor& feats, const torch::Tensor& decs,
                                 const torch::Tensor& mask, const ReconstructionOptions& opts = {});

// As written: BCE(d_real, 1) - BCE(d_fake, 1). `conventional` gives
// BCE(d_real, 1) + BCE(d_fake, 0). Inputs clamped to [1e-7, 1 - 1e-7].
torch::Tensor ClassificationLoss(const torch::Tensor& d_real, const torch::Tensor& d_fake,
                                 bool conventional = false);

// 1 - cos(x_spk, x_post) averaged over the batch; x_spk is detached.
torch::Tensor SpeakerLoss(const torch::Tensor& x_spk, const torch::Tensor& x_post);

// Penalty mask W[s, n] = 1 - exp(-(n/N - s/S)^2 / (2 g^2)).
torch::Tensor GuidedAttentionMask(int64_t steps, int64_t tokens, double g,
                                  torch::TensorOptions opts = torch::kFloat32);

// sum(A * W) / S over each item's valid S x N block, mean over items
// (alignment [B, S, N]). Items with `skip` set are ignored.
torch::Tensor GuidedAttentionLoss(const torch::Tensor& alignment, const torch::Tensor& text_lengths,
                                  const torch::Tensor& step_lengths, double g = 0.2,
                                  const torch::Tensor& skip = {});

enum class Phase { kPretrain = 0, kCriticWarmup = 1, kAdversarial = 2 };
std::string_view PhaseName(Phase p);

enum class Term { kMel, kGate, kSvd, kMelRate, kAtt, kRec, kClass, kSpk, kCritic };
inline constexpr int kNumTerms = 9;
inline constexpr std::array<std::string_view, kNumTerms> kTermNames = {
    "l_mel", "l_gate", "l_svd", "l_mr", "l_att", "l_rec", "l_class", "l_spk", "l_critic_feedback"};

// Scalar loss tensors; undefined entries count as disabled (exactly 0).
struct LossTerms {
  std::array<torch::Tensor, kNumTerms> t;
  torch::Tensor& operator[](Term k) { return t[static_cast<size_t>(k)]; }
  const torch::Tensor& operator[](Term k) const { return t[static_cast<size_t>(k)]; }
};

struct LossReport {
  std::array<double, kNumTerms> values{};
  double total = 0.0;
  double operator[](Term k) const { return values[static_cast<size_t>(k)]; }
  // "step=.. phase=.. l_mel=.. ... total=.."
  std::string Format(int64_t step, Phase phase) const;
};

struct TotalLoss {
  torch::Tensor total;
  LossReport report;
};

// Unscaled sum of all terms minus the critic term (L_D), which only counts
// in the adversarial phase; its report entry is the signed contribution
// (-L_D), or 0 outside that phase. Throws kNumeric naming the first
// non-finite term.
TotalLoss CombineLosses(const LossTerms& terms, Phase phase);

}  // namespace karaoker::objectives
