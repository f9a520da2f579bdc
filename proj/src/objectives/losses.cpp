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


#include "objectives/losses.hpp"

#include <cmath>
#include <cstdio>

#include "common/error.hpp"

namespace karaoker::objectives {

namespace {

constexpr double kDegenerateRange = 1e-8;
constexpr double kProbEps = 1e-7;

int64_t ValidLength(const torch::Tensor& mask, int64_t b) {
  return mask[b].sum().item<int64_t>();
}

void CheckMelTriple(const torch::Tensor& mel, const torch::Tensor& other, const torch::Tensor& mask) {
  Require(mel.dim() == 3 && mel.sizes() == other.sizes(), "mel tensors must share shape [B, bins, T]");
  Require(mask.dim() == 2 && mask.size(0) == mel.size(0) && mask.size(1) == mel.size(2),
          "frame mask must be [B, T]");
}

torch::Tensor Zero(const torch::Tensor& like) { return torch::zeros({}, like.options()); }

}  // namespace

torch::Tensor FScale(const torch::Tensor& x, int64_t dim) {
  Require(x.numel() > 0, "f_scale: empty input");
  const auto lo = x.amin(dim, true);
  const auto range = x.amax(dim, true) - lo;
  const auto degenerate = range < kDegenerateRange;
  const auto safe = torch::where(degenerate, torch::ones_like(range), range);
  return torch::where(degenerate, torch::ones_like(x), torch::exp((x - lo) / safe));
}

torch::Tensor FRate(const torch::Tensor& x, int64_t dim) {
  Require(x.dim() > 0 && x.size(dim) >= 2, "f_rate: need at least two steps along time");
  return FScale(torch::diff(x, 1, dim), dim);
}

torch::Tensor MelLoss(const torch::Tensor& mel, const torch::Tensor& mel_dec,
                      const torch::Tensor& mel_post, const torch::Tensor& mask) {
  CheckMelTriple(mel, mel_dec, mask);
  CheckMelTriple(mel, mel_post, mask);
  const auto m = mask.unsqueeze(1).to(mel.dtype());
  const auto count = mask.sum(1).to(mel.dtype()).clamp_min(1.0) * static_cast<double>(mel.size(1));
  const auto err = ((mel_dec - mel).pow(2) + (mel_post - mel).pow(2)) * m;
  return (err.sum({1, 2}) / count).mean();
}

torch::Tensor GateLoss(const torch::Tensor& gate_logits, const torch::Tensor& gate_targets,
                       const torch::Tensor& mel_lengths, int r) {
  Require(r >= 1, "gate loss: r must be positive");
  const int64_t S = gate_logits.size(1);
  const int64_t T = gate_targets.size(1);
  Require(S * r == T, "gate loss: logits do not cover the padded frames");
  const auto last = torch::arange(S, torch::kInt64) * r + (r - 1);
  const auto target = gate_targets.index_select(1, last.to(gate_targets.device())).to(gate_logits.dtype());
  const auto steps = (mel_lengths + (r - 1)).div(r, "floor").to(gate_logits.device());
  const auto valid = (torch::arange(S, steps.options()).unsqueeze(0) < steps.unsqueeze(1)).to(gate_logits.dtype());
  const auto bce = torch::binary_cross_entropy_with_logits(gate_logits, target, {}, {},
                                                            at::Reduction::None);
  return ((bce * valid).sum(1) / valid.sum(1).clamp_min(1.0)).mean();
}

torch::Tensor MelRateLoss(const torch::Tensor& mel, const torch::Tensor& mel_dec,
                          const torch::Tensor& mel_post, const torch::Tensor& mask) {
  CheckMelTriple(mel, mel_dec, mask);
  CheckMelTriple(mel, mel_post, mask);
  auto total = Zero(mel);
  for (int64_t b = 0; b < mel.size(0); ++b) {
    const int64_t T = ValidLength(mask, b);
    if (T < 2) continue;
    const auto ref = FRate(mel[b].slice(1, 0, T), 1);
    total = total + (ref - FRate(mel_dec[b].slice(1, 0, T), 1)).abs().mean() +
            (ref - FRate(mel_post[b].slice(1, 0, T), 1)).abs().mean();
  }
  return total / static_cast<double>(mel.size(0));
}

torch::Tensor SignedLeftBasis(const torch::Tensor& a, int64_t k) {
  Require(a.dim() == 2, "svd: expected a matrix");
  Require(k >= 1 && k <= std::min(a.size(0), a.size(1)), "svd: k exceeds the matrix rank bound");
  // Decomposed in double whatever the input precision.
  const auto dtype = a.scalar_type();
  const auto a64 = a.to(torch::kFloat64);
  torch::Tensor u;
  try {
    u = std::get<0>(torch::linalg_svd(a64, false));
  } catch (const c10::Error&) {
    const auto jitter = 1e-8 * torch::sin(torch::arange(a.numel(), a64.options())).view(a.sizes());
    try {
      u = std::get<0>(torch::linalg_svd(a64 + jitter, false));
    } catch (const c10::Error& e) {
      Fail(ErrorCode::kNumeric, std::string("svd did not converge: ") + e.what_without_backtrace());
    }
  }
  u = u.slice(1, 0, k);
  const auto idx = u.detach().abs().argmax(0, true);
  auto sign = torch::sign(u.detach().gather(0, idx));
  sign = torch::where(sign == 0, torch::ones_like(sign), sign);
  return (u * sign).to(dtype);
}

torch::Tensor SvdLoss(const torch::Tensor& mel, const torch::Tensor& mel_post,
                      const torch::Tensor& mask, int64_t k) {
  CheckMelTriple(mel, mel_post, mask);
  Require(k >= 1, "svd loss: k must be positive");
  auto total = Zero(mel);
  for (int64_t b = 0; b < mel.size(0); ++b) {
    const int64_t T = ValidLength(mask, b);
    const int64_t kk = std::min({k, mel.size(1), T});
    if (kk < 1) continue;
    const auto ua = SignedLeftBasis(mel[b].slice(1, 0, T), kk);
    const auto ub = SignedLeftBasis(mel_post[b].slice(1, 0, T), kk);
    total = total + (ua - ub).abs().mean();
  }
  return total / static_cast<double>(mel.size(0));
}

torch::Tensor ReconstructionLoss(const torch::Tensor& feats, const torch::Tensor& decs,
                                 const torch::Tensor& mask, const ReconstructionOptions& opts) {
  Require(feats.dim() == 3 && feats.sizes() == decs.sizes(), "reconstruction: feats/decs must be [B, N, T]");
  Require(mask.size(0) == feats.size(0) && mask.size(1) == feats.size(2), "reconstruction: mask must be [B, T]");
  auto dtw = [&](const torch::Tensor& a, const torch::Tensor& b) {
    return opts.divergence ? SoftDtwDivergence(a, b, opts.dtw) : SoftDtw(a, b, opts.dtw);
  };
  auto total = Zero(decs);
  for (int64_t b = 0; b < feats.size(0); ++b) {
    const int64_t L = ValidLength(mask, b);
    if (L < 1) continue;
    for (int64_t i = 0; i < feats.size(1); ++i) {
      const auto x = feats[b][i].slice(0, 0, L);
      const auto y = decs[b][i].slice(0, 0, L);
      auto term = dtw(x, y);
      if (L >= 2) term = term + dtw(FRate(x), FRate(y));
      total = total + term / static_cast<double>(L);
    }
  }
  return total / static_cast<double>(feats.size(0));
}

torch::Tensor ClassificationLoss(const torch::Tensor& d_real, const torch::Tensor& d_fake,
                                 bool conventional) {
  const auto real = d_real.clamp(kProbEps, 1.0 - kProbEps);
  const auto fake = d_fake.clamp(kProbEps, 1.0 - kProbEps);
  const auto l_real = -torch::log(real).mean();
  if (conventional) return l_real - torch::log(1.0 - fake).mean();
  return l_real - (-torch::log(fake).mean());
}

torch::Tensor SpeakerLoss(const torch::Tensor& x_spk, const torch::Tensor& x_post) {
  Require(x_spk.sizes() == x_post.sizes() && x_spk.dim() == 2, "speaker loss: expected [B, D] pairs");
  return (1.0 - torch::cosine_similarity(x_spk.detach(), x_post, 1, 1e-8)).mean();
}

torch::Tensor GuidedAttentionMask(int64_t steps, int64_t tokens, double g, torch::TensorOptions opts) {
  Require(g > 0.0, "guided attention: g must be positive");
  Require(steps > 0 && tokens > 0, "guided attention: empty alignment");
  const auto s = torch::arange(steps, opts).unsqueeze(1) / static_cast<double>(steps);
  const auto n = torch::arange(tokens, opts).unsqueeze(0) / static_cast<double>(tokens);
  return 1.0 - torch::exp(-(n - s).pow(2) / (2.0 * g * g));
}

torch::Tensor GuidedAttentionLoss(const torch::Tensor& alignment, const torch::Tensor& text_lengths,
                                  const torch::Tensor& step_lengths, double g, const torch::Tensor& skip) {
  Require(alignment.dim() == 3, "guided attention: alignment must be [B, S, N]");
  auto total = Zero(alignment);
  int64_t used = 0;
  for (int64_t b = 0; b < alignment.size(0); ++b) {
    if (skip.defined() && skip[b].item<bool>()) continue;
    const int64_t S = step_lengths[b].item<int64_t>();
    const int64_t N = text_lengths[b].item<int64_t>();
    if (S < 1 || N < 1) continue;
    const auto a = alignment[b].slice(0, 0, S).slice(1, 0, N);
    const auto w = GuidedAttentionMask(S, N, g, alignment.options());
    total = total + (a * w).sum() / static_cast<double>(S);
    ++used;
  }
  return used ? total / static_cast<double>(used) : total;
}

std::string_view PhaseName(Phase p) {
  switch (p) {
    case Phase::kPretrain: return "pretrain";
    case Phase::kCriticWarmup: return "critic-warmup";
    case Phase::kAdversarial: return "adversarial";
  }
  return "unknown";
}

std::string LossReport::Format(int64_t step, Phase phase) const {
  std::string out = "step=" + std::to_string(step) + " phase=" + std::string(PhaseName(phase));
  char buf[64];
  for (int i = 0; i < kNumTerms; ++i) {
    std::snprintf(buf, sizeof buf, " %s=%.9g", kTermNames[static_cast<size_t>(i)].data(), values[static_cast<size_t>(i)]);
    out += buf;
  }
  std::snprintf(buf, sizeof buf, " total=%.9g", total);
  return out + buf;
}

TotalLoss CombineLosses(const LossTerms& terms, Phase phase) {
  TotalLoss out;
  for (int i = 0; i < kNumTerms; ++i) {
    const auto& t = terms.t[static_cast<size_t>(i)];
    if (!t.defined()) continue;
    Require(t.numel() == 1, std::string(kTermNames[static_cast<size_t>(i)]) + " is not a scalar");
    const double v = t.item<double>();
    if (!std::isfinite(v)) {
      Fail(ErrorCode::kNumeric, "non-finite loss component " + std::string(kTermNames[static_cast<size_t>(i)]));
    }
    torch::Tensor contribution = t.reshape({});
    if (static_cast<Term>(i) == Term::kCritic) {
      if (phase != Phase::kAdversarial) continue;
      contribution = -contribution;
    }
    out.report.values[static_cast<size_t>(i)] = contribution.item<double>();
    out.total = out.total.defined() ? out.total + contribution : contribution;
  }
  if (!out.total.defined()) out.total = torch::zeros({});
  double sum = 0.0;
  for (double v : out.report.values) sum += v;
  out.report.total = sum;
  return out;
}

}  // namespace karaoker::objectives
