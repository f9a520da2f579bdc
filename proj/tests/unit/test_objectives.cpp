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


#include "support/doctest_torch.hpp"

#include <cmath>
#include <random>
#include <vector>

#include "common/error.hpp"
#include "objectives/losses.hpp"
#include "objectives/soft_dtw.hpp"
#include "support/oracles.hpp"

using namespace karaoker;
using namespace karaoker::objectives;
using namespace karaoker::testing;

namespace {

const auto kD = torch::TensorOptions().dtype(torch::kFloat64);

torch::Tensor Vec(std::vector<double> v) { return torch::tensor(v, kD); }

std::vector<double> ToVector(const torch::Tensor& t) {
  auto c = t.to(torch::kFloat64).contiguous();
  return {c.data_ptr<double>(), c.data_ptr<double>() + c.numel()};
}

torch::Tensor Ones(int64_t b, int64_t t) { return torch::ones({b, t}, torch::kBool); }

// Appends `extra` frames of junk after the valid region and masks them.
std::pair<torch::Tensor, torch::Tensor> PadJunk(const torch::Tensor& x, const torch::Tensor& mask, int64_t extra) {
  auto junk = torch::full({x.size(0), x.size(1), extra}, 37.0, x.options());
  return {torch::cat({x, junk}, 2), torch::cat({mask, torch::zeros({mask.size(0), extra}, torch::kBool)}, 1)};
}

}  // namespace

TEST_SUITE("f_scale and f_rate") {
  TEST_CASE("f_scale endpoints, degenerate range and bounds") {
    CHECK(ToVector(FScale(Vec({0, 1}))) == std::vector<double>{1.0, std::exp(1.0)});
    CHECK(ToVector(FScale(Vec({4, 4, 4}))) == std::vector<double>{1, 1, 1});
    torch::manual_seed(1);
    const auto y = FScale(torch::randn({50}, kD) * 7.0);
    CHECK(y.min().item<double>() >= 1.0);
    CHECK(y.max().item<double>() <= std::exp(1.0) + 1e-15);
  }

  TEST_CASE("f_rate worked examples") {
    CHECK(ToVector(FRate(Vec({1, 2, 3}))) == std::vector<double>{1.0, 1.0});
    const auto r = ToVector(FRate(Vec({0, 2, 1})));
    CHECK(r[0] == doctest::Approx(std::exp(1.0)).epsilon(1e-15));
    CHECK(r[1] == doctest::Approx(1.0).epsilon(1e-15));
  }

  TEST_CASE("f_rate is invariant to a positive affine map") {
    torch::manual_seed(2);
    const auto x = torch::randn({30}, kD);
    CHECK((FRate(3.7 * x - 2.0) - FRate(x)).abs().max().item<double>() < 1e-9);
  }

  TEST_CASE("f_rate needs two steps") {
    CHECK_THROWS_AS(FRate(Vec({1})), Error);
  }
}

TEST_SUITE("mel rate loss") {
  TEST_CASE("identical inputs give 0") {
    torch::manual_seed(3);
    const auto mel = torch::randn({2, 8, 12}, kD);
    CHECK(MelRateLoss(mel, mel, mel, Ones(2, 12)).item<double>() == 0.0);
  }

  TEST_CASE("affine decoder output leaves the loss at 0") {
    torch::manual_seed(4);
    const auto mel = torch::randn({1, 80, 40}, kD);
    CHECK(MelRateLoss(mel, 2.0 * mel + 1.0, mel, Ones(1, 40)).item<double>() < 1e-6);
  }

  TEST_CASE("gradient matches central differences") {
    torch::manual_seed(5);
    const auto mel = torch::randn({1, 8, 12}, kD);
    const auto mask = Ones(1, 12);
    const double err = GradientRelativeError(
        [&](const std::vector<torch::Tensor>& in) { return MelRateLoss(mel, in[0], in[1], mask); },
        {torch::randn({1, 8, 12}, kD), torch::randn({1, 8, 12}, kD)});
    CHECK(err < 1e-4);
  }

  TEST_CASE("padding does not change the value") {
    torch::manual_seed(6);
    const auto mel = torch::randn({2, 8, 12}, kD);
    const auto dec = torch::randn({2, 8, 12}, kD);
    auto mask = Ones(2, 12);
    mask[1].slice(0, 9).fill_(false);
    const double base = MelRateLoss(mel, dec, dec, mask).item<double>();
    auto [pm, pmask] = PadJunk(mel, mask, 30);
    auto [pd, unused] = PadJunk(dec, mask, 30);
    CHECK(std::abs(MelRateLoss(pm, pd, pd, pmask).item<double>() - base) < 1e-12);
    CHECK(MelRateLoss(mel, dec, dec, torch::zeros({2, 12}, torch::kBool)).item<double>() == 0.0);
  }
}

TEST_SUITE("svd loss") {
  TEST_CASE("identical inputs give 0") {
    torch::manual_seed(7);
    const auto mel = torch::randn({1, 80, 40}, kD);
    CHECK(SvdLoss(mel, mel, Ones(1, 40)).item<double>() == 0.0);
  }

  TEST_CASE("time permutation leaves the left basis unchanged") {
    torch::manual_seed(8);
    const auto mel = torch::randn({1, 80, 40}, kD);
    const auto perm = torch::randperm(40, torch::kInt64);
    const auto shuffled = mel.index_select(2, perm);
    CHECK(SvdLoss(mel, shuffled, Ones(1, 40)).item<double>() < 1e-5);
  }

  TEST_CASE("positive scaling leaves the basis unchanged") {
    torch::manual_seed(9);
    const auto u = torch::randn({80, 1}, kD);
    const auto v = torch::randn({1, 30}, kD);
    const auto rank1 = u.mm(v).unsqueeze(0);
    CHECK(SvdLoss(rank1, 5.0 * rank1, Ones(1, 30), 1).item<double>() < 1e-6);
    const auto full = torch::randn({1, 80, 30}, kD);
    for (double c : {2.0, 10.0}) CHECK(SvdLoss(full, c * full, Ones(1, 30)).item<double>() < 1e-6);
  }

  TEST_CASE("sign convention: largest-magnitude entry of each column is positive") {
    torch::manual_seed(10);
    const auto a = torch::randn({20, 12}, kD);
    const auto u = SignedLeftBasis(a, 8);
    const auto gram = u.t().mm(u);
    CHECK((gram - torch::eye(8, kD)).abs().max().item<double>() < 1e-4);
    for (int j = 0; j < 8; ++j) {
      const auto col = u.select(1, j);
      CHECK(col[col.abs().argmax()].item<double>() > 0.0);
    }
    CHECK(torch::equal(SignedLeftBasis(a, 8), SignedLeftBasis(-a, 8).neg()) == false);
    CHECK(torch::equal(SignedLeftBasis(a, 8), SignedLeftBasis(a, 8)));
  }

  TEST_CASE("gradient matches central differences") {
    torch::manual_seed(11);
    const auto mel = torch::randn({1, 10, 12}, kD);
    const auto mask = Ones(1, 12);
    const double err = GradientRelativeError(
        [&](const std::vector<torch::Tensor>& in) { return SvdLoss(mel, in[0], mask, 3); },
        {torch::randn({1, 10, 12}, kD)});
    CHECK(err < 1e-4);
  }
}

TEST_SUITE("soft-dtw") {
  TEST_CASE("self distance goes to 0 as gamma shrinks") {
    const auto a = Vec({0.3, -1.0, 2.0, 0.5});
    CHECK(std::abs(SoftDtw(a, a, {1e-4}).item<double>()) < 1e-3);
  }

  TEST_CASE("[0,0] vs [1,1] at gamma 0.001 is about 2") {
    CHECK(SoftDtw(Vec({0, 0}), Vec({1, 1}), {1e-3}).item<double>() == doctest::Approx(2.0).epsilon(1e-2));
    CHECK(BruteForceDtw({0, 0}, {1, 1}) == 2.0);
  }

  TEST_CASE("matches the exhaustive path oracle") {
    std::mt19937 rng(12);
    std::uniform_int_distribution<int> len(1, 6);
    std::normal_distribution<double> val(0.0, 1.0);
    for (int trial = 0; trial < 30; ++trial) {
      std::vector<double> a(static_cast<size_t>(len(rng))), b(static_cast<size_t>(len(rng)));
      for (auto& x : a) x = val(rng);
      for (auto& x : b) x = val(rng);
      const double hard = SoftDtw(Vec(a), Vec(b), {1e-3}).item<double>();
      CHECK(std::abs(hard - BruteForceDtw(a, b)) < 1e-2);
      for (double g : {0.1, 1.0}) {
        CHECK(SoftDtw(Vec(a), Vec(b), {g}).item<double>() ==
              doctest::Approx(BruteForceSoftDtw(a, b, g)).epsilon(1e-9));
      }
    }
  }

  TEST_CASE("symmetric and non-increasing in gamma") {
    torch::manual_seed(13);
    for (int trial = 0; trial < 10; ++trial) {
      const auto a = torch::randn({6}, kD);
      const auto b = torch::randn({6}, kD);
      CHECK(SoftDtw(a, b).item<double>() == doctest::Approx(SoftDtw(b, a).item<double>()).epsilon(1e-12));
      double prev = SoftDtw(a, b, {0.01}).item<double>();
      for (double g : {0.05, 0.1, 0.5, 1.0, 2.0}) {
        const double v = SoftDtw(a, b, {g}).item<double>();
        CHECK(v <= prev + 1e-12);
        prev = v;
      }
    }
  }

  TEST_CASE("gradient matches central differences, banded and unbanded") {
    torch::manual_seed(14);
    for (double band : {0.0, 0.2}) {
      for (int trial = 0; trial < 5; ++trial) {
        const double err = GradientRelativeError(
            [&](const std::vector<torch::Tensor>& in) { return SoftDtw(in[0], in[1], {0.1, band}); },
            {torch::randn({7}, kD), torch::randn({9}, kD)});
        CHECK(err < 1e-3);
      }
    }
  }

  TEST_CASE("band never blocks the end cell") {
    CHECK(SoftDtwBandWidth(10, 3, 0.2) == 7);
    CHECK(SoftDtwBandWidth(10, 10, 0.2) == 2);
    const auto v = SoftDtw(torch::randn({10}, kD), torch::randn({3}, kD), {0.1, 0.2});
    CHECK(std::isfinite(v.item<double>()));
  }

  TEST_CASE("divergence is zero on identical inputs") {
    const auto a = Vec({1, 2, 0.5});
    CHECK(std::abs(SoftDtwDivergence(a, a).item<double>()) < 1e-12);
  }

  TEST_CASE("empty input is rejected") {
    CHECK_THROWS_AS(SoftDtw(torch::zeros({0}, kD), Vec({1})), Error);
  }
}

TEST_SUITE("reconstruction loss") {
  TEST_CASE("identical tracks give about 0") {
    torch::manual_seed(15);
    const auto f = torch::randn({2, 3, 10}, kD);
    ReconstructionOptions opts;
    opts.dtw.gamma = 1e-4;
    CHECK(std::abs(ReconstructionLoss(f, f, Ones(2, 10), opts).item<double>()) < 1e-3);
    opts.divergence = true;
    opts.dtw.gamma = 0.1;
    CHECK(std::abs(ReconstructionLoss(f, f, Ones(2, 10), opts).item<double>()) < 1e-12);
  }

  TEST_CASE("affine scaling grows the value term only") {
    torch::manual_seed(16);
    const auto x = torch::randn({10}, kD);
    const auto y = 2.0 * x + 1.0;
    const SoftDtwOptions o{0.1, 0.2};
    CHECK(SoftDtw(FRate(x), FRate(y), o).item<double>() ==
          doctest::Approx(SoftDtw(FRate(x), FRate(x), o).item<double>()).epsilon(1e-12));
    CHECK(SoftDtw(x, y, o).item<double>() > SoftDtw(x, x, o).item<double>() + 1.0);
    const auto fx = x.view({1, 1, 10});
    CHECK(ReconstructionLoss(fx, y.view({1, 1, 10}), Ones(1, 10)).item<double>() >
          ReconstructionLoss(fx, fx, Ones(1, 10)).item<double>());
  }

  TEST_CASE("gradient matches central differences on length-10 tracks") {
    torch::manual_seed(17);
    const auto feats = torch::randn({1, 3, 10}, kD);
    const double err = GradientRelativeError(
        [&](const std::vector<torch::Tensor>& in) { return ReconstructionLoss(feats, in[0], Ones(1, 10)); },
        {torch::randn({1, 3, 10}, kD)});
    CHECK(err < 1e-3);
  }

  TEST_CASE("padding does not change the value") {
    torch::manual_seed(18);
    const auto f = torch::randn({2, 3, 12}, kD);
    const auto d = torch::randn({2, 3, 12}, kD);
    auto mask = Ones(2, 12);
    mask[0].slice(0, 7).fill_(false);
    const double base = ReconstructionLoss(f, d, mask).item<double>();
    auto [pf, pmask] = PadJunk(f, mask, 30);
    auto [pd, unused] = PadJunk(d, mask, 30);
    CHECK(std::abs(ReconstructionLoss(pf, pd, pmask).item<double>() - base) < 1e-12);
  }
}

TEST_SUITE("classification and speaker losses") {
  TEST_CASE("classification loss as written") {
    CHECK(ClassificationLoss(Vec({0.4}), Vec({0.4})).item<double>() == 0.0);
    const double expect = -std::log(0.9) + std::log(0.1);
    CHECK(ClassificationLoss(Vec({0.9}), Vec({0.1})).item<double>() == doctest::Approx(expect).epsilon(1e-12));
    CHECK(expect == doctest::Approx(-2.1972).epsilon(1e-4));
    CHECK(std::isfinite(ClassificationLoss(Vec({0.0}), Vec({1.0})).item<double>()));
    CHECK(std::isfinite(ClassificationLoss(Vec({1.0}), Vec({0.0}), true).item<double>()));
    CHECK(ClassificationLoss(Vec({0.9}), Vec({0.1}), true).item<double>() ==
          doctest::Approx(-std::log(0.9) - std::log(0.9)).epsilon(1e-12));
  }

  TEST_CASE("speaker loss: identical, orthogonal, opposite") {
    const auto x = Vec({1, 2, 3, 0}).view({1, 4});
    CHECK(SpeakerLoss(x, x).item<double>() == doctest::Approx(0.0));
    CHECK(SpeakerLoss(Vec({1, 0}).view({1, 2}), Vec({0, 3}).view({1, 2})).item<double>() == doctest::Approx(1.0));
    CHECK(SpeakerLoss(x, -x).item<double>() == doctest::Approx(2.0));
    CHECK(std::isfinite(SpeakerLoss(torch::zeros({1, 4}, kD), x).item<double>()));
  }

  TEST_CASE("speaker loss gradient blocks the reference and matches differences") {
    torch::manual_seed(19);
    const auto ref = torch::randn({3, 64}, kD).requires_grad_(true);
    const auto post = torch::randn({3, 64}, kD).requires_grad_(true);
    SpeakerLoss(ref, post).backward();
    CHECK(!ref.grad().defined());
    const double err = GradientRelativeError(
        [&](const std::vector<torch::Tensor>& in) { return SpeakerLoss(ref.detach(), in[0]); },
        {torch::randn({3, 64}, kD)});
    CHECK(err < 1e-4);
  }
}

TEST_SUITE("guided attention") {
  TEST_CASE("diagonal, anti-diagonal and uniform alignments") {
    const int64_t n = 20;
    const auto lengths = torch::full({1}, n, torch::kInt64);
    const auto diag = torch::eye(n, kD).unsqueeze(0);
    CHECK(GuidedAttentionLoss(diag, lengths, lengths).item<double>() < 1e-3);
    const auto anti = torch::eye(n, kD).flip({1}).unsqueeze(0);
    CHECK(GuidedAttentionLoss(anti, lengths, lengths, 0.2).item<double>() > 0.5);
    const auto uniform = torch::full({1, 12, 7}, 1.0 / 7.0, kD);
    const auto mean_w = GuidedAttentionMask(12, 7, 0.2, kD).mean().item<double>();
    CHECK(GuidedAttentionLoss(uniform, torch::full({1}, 7, torch::kInt64), torch::full({1}, 12, torch::kInt64))
              .item<double>() == doctest::Approx(mean_w).epsilon(1e-12));
  }

  TEST_CASE("only the valid block counts and skipped items are ignored") {
    torch::manual_seed(20);
    auto a = torch::rand({2, 6, 5}, kD);
    const auto tl = torch::tensor({5, 3}, torch::kInt64);
    const auto sl = torch::tensor({6, 4}, torch::kInt64);
    const double base = GuidedAttentionLoss(a, tl, sl).item<double>();
    a[1].slice(0, 4).fill_(100.0);
    a[1].slice(1, 3).fill_(100.0);
    CHECK(GuidedAttentionLoss(a, tl, sl).item<double>() == doctest::Approx(base).epsilon(1e-12));
    const auto skip = torch::tensor({false, true});
    const double first_only = GuidedAttentionLoss(a.slice(0, 0, 1), tl.slice(0, 0, 1), sl.slice(0, 0, 1)).item<double>();
    CHECK(GuidedAttentionLoss(a, tl, sl, 0.2, skip).item<double>() == doctest::Approx(first_only).epsilon(1e-12));
  }

  TEST_CASE("gradient matches central differences") {
    torch::manual_seed(21);
    const auto tl = torch::tensor({5, 4}, torch::kInt64);
    const auto sl = torch::tensor({6, 6}, torch::kInt64);
    const double err = GradientRelativeError(
        [&](const std::vector<torch::Tensor>& in) { return GuidedAttentionLoss(torch::softmax(in[0], 2), tl, sl); },
        {torch::randn({2, 6, 5}, kD)});
    CHECK(err < 1e-4);
  }
}

TEST_SUITE("mel and gate losses") {
  TEST_CASE("mel loss is a masked mean of both squared errors") {
    auto mel = torch::zeros({1, 2, 5}, kD);
    auto dec = torch::ones({1, 2, 5}, kD);
    auto mask = Ones(1, 5);
    mask[0][4] = false;
    dec[0].select(1, 4).fill_(100.0);
    CHECK(MelLoss(mel, dec, 2.0 * dec, mask).item<double>() == doctest::Approx(5.0));
  }

  TEST_CASE("gate loss uses each step's last frame over valid steps") {
    // T_valid = 13, r = 5 -> 3 valid steps of 4; targets 0, 0, 1.
    auto targets = torch::zeros({1, 20}, kD);
    targets[0].slice(0, 12).fill_(1.0);
    const auto logits = torch::tensor({{-2.0, -1.0, 3.0, 50.0}}, kD);
    const double expect = (std::log1p(std::exp(-2.0)) * 0 + std::log1p(std::exp(-2.0)) +
                           std::log1p(std::exp(-1.0)) + std::log1p(std::exp(-3.0))) / 3.0;
    const double got = GateLoss(logits, targets, torch::tensor({13}, torch::kInt64), 5).item<double>();
    CHECK(got == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_SUITE("total loss") {
  LossTerms AllOnes() {
    LossTerms t;
    for (int i = 0; i < kNumTerms - 1; ++i) t.t[static_cast<size_t>(i)] = torch::ones({}, kD);
    return t;
  }

  TEST_CASE("zero, sum and critic sign") {
    LossTerms zero;
    for (auto& x : zero.t) x = torch::zeros({}, kD);
    CHECK(CombineLosses(zero, Phase::kAdversarial).report.total == 0.0);
    auto t = AllOnes();
    t[Term::kCritic] = torch::zeros({}, kD);
    CHECK(CombineLosses(t, Phase::kAdversarial).report.total == 8.0);
    t[Term::kCritic] = torch::full({}, 2.0, kD);
    const auto adv = CombineLosses(t, Phase::kAdversarial);
    CHECK(adv.report.total == 6.0);
    CHECK(adv.total.item<double>() == 6.0);
    CHECK(adv.report[Term::kCritic] == -2.0);
    const auto warm = CombineLosses(t, Phase::kCriticWarmup);
    CHECK(warm.report.total == 8.0);
    CHECK(warm.report[Term::kCritic] == 0.0);
  }

  TEST_CASE("total is the sum of the report fields and disabled terms are 0") {
    LossTerms t;
    t[Term::kMel] = torch::full({}, 0.25, kD);
    t[Term::kClass] = torch::full({}, -1.5, kD);
    const auto r = CombineLosses(t, Phase::kPretrain).report;
    double sum = 0.0;
    for (double v : r.values) sum += v;
    CHECK(r.total == sum);
    CHECK(r[Term::kSvd] == 0.0);
    CHECK(r.Format(3, Phase::kPretrain).rfind("step=3 phase=pretrain l_mel=0.25", 0) == 0);
  }

  TEST_CASE("non-finite components are named") {
    auto t = AllOnes();
    t[Term::kSvd] = torch::full({}, NAN, kD);
    try {
      CombineLosses(t, Phase::kPretrain);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kNumeric);
      CHECK(std::string(e.what()).find("l_svd") != std::string::npos);
    }
  }
}
