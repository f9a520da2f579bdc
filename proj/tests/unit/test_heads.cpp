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
#include <limits>
#include <random>

#include "adversarial/config.hpp"
#include "adversarial/critic.hpp"
#include "adversarial/heads.hpp"
#include "common/error.hpp"
#include "data/batch.hpp"
#include "model/acoustic_model.hpp"
#include "objectives/losses.hpp"
#include "support/corpus.hpp"

using namespace karaoker;
using namespace karaoker::adversarial;

namespace {

torch::Tensor Lengths(std::initializer_list<int64_t> l) { return torch::tensor(std::vector<int64_t>(l), torch::kInt64); }

}  // namespace

TEST_SUITE("window sampling") {
  TEST_CASE("a window as wide as the utterance starts at 0") {
    std::mt19937_64 rng(1);
    const auto w = SampleWindows(Lengths({20}), rng, 50, {20, 20});
    REQUIRE(w.size() == 50);
    for (const auto& s : w) {
      CHECK(s.start == 0);
      CHECK(s.width == 20);
    }
  }

  TEST_CASE("1000 draws of width 20 on 100 valid frames start in [0, 80]") {
    std::mt19937_64 rng(2);
    const auto w = SampleWindows(Lengths({100}), rng, 1000, {20, 20});
    int64_t lo = 1000, hi = -1;
    for (const auto& s : w) {
      lo = std::min(lo, s.start);
      hi = std::max(hi, s.start);
    }
    CHECK(lo >= 0);
    CHECK(hi <= 80);
    CHECK(hi > 70);
  }

  TEST_CASE("fixed seed gives the same draws") {
    std::mt19937_64 a(3), b(3);
    const auto wa = SampleWindows(Lengths({40, 12, 90}), a, 30, {8, 32});
    const auto wb = SampleWindows(Lengths({40, 12, 90}), b, 30, {8, 32});
    REQUIRE(wa.size() == wb.size());
    for (size_t i = 0; i < wa.size(); ++i) {
      CHECK(wa[i].batch_index == wb[i].batch_index);
      CHECK(wa[i].start == wb[i].start);
      CHECK(wa[i].width == wb[i].width);
    }
  }

  TEST_CASE("widths stay in range and short utterances are skipped") {
    std::mt19937_64 rng(4);
    const auto w = SampleWindows(Lengths({5, 30, 7}), rng, 200, {8, 16});
    for (const auto& s : w) {
      CHECK(s.batch_index == 1);
      CHECK(s.width >= 8);
      CHECK(s.width <= 16);
      CHECK(s.start + s.width <= 30);
    }
    CHECK(SampleWindows(Lengths({3, 4}), rng, 5, {8, 16}).empty());
  }

  TEST_CASE("windows never read padding") {
    std::mt19937_64 rng(5);
    auto mels = torch::randn({3, 80, 60});
    const auto lengths = Lengths({60, 25, 41});
    mels[1].slice(1, 25).fill_(std::numeric_limits<float>::quiet_NaN());
    mels[2].slice(1, 41).fill_(std::numeric_limits<float>::quiet_NaN());
    Critic critic(HeadsConfig{});
    for (int rep = 0; rep < 20; ++rep) {
      const auto samples = SampleWindows(lengths, rng, 8, {8, 32});
      const auto windows = CutWindows(mels, samples);
      CHECK(std::isfinite(critic->Scores(windows).sum().item<float>()));
    }
  }

  TEST_CASE("fixed widths are honoured") {
    std::mt19937_64 rng(6);
    const auto w = SampleWindowsWithWidths(Lengths({50, 50}), rng, {8, 13, 21});
    REQUIRE(w.size() == 3);
    CHECK(w[1].width == 13);
  }
}

TEST_SUITE("critic") {
  TEST_CASE("scores are finite, batch-independent and respond to the input") {
    torch::manual_seed(7);
    Critic critic(HeadsConfig{});
    const auto win = torch::randn({80, 20});
    const auto s = critic->Score(win);
    CHECK(s.dim() == 0);
    CHECK(std::isfinite(s.item<float>()));
    const auto pair = critic->Scores({win, win});
    CHECK(pair[0].item<float>() == pair[1].item<float>());
    CHECK(pair[0].item<float>() == s.item<float>());
    const auto perturbed = critic->Score(win + 0.1 * torch::randn({80, 20}));
    CHECK(std::abs(perturbed.item<float>() - s.item<float>()) > 1e-7);
    const auto scaled = critic->Score(win * 3.0);
    CHECK(std::abs(scaled.item<float>() - s.item<float>()) > 1e-7);
  }

  TEST_CASE("every width in range is accepted") {
    Critic critic(HeadsConfig{});
    for (int64_t w = 8; w <= 32; ++w) CHECK(std::isfinite(critic->Score(torch::randn({80, w})).item<float>()));
  }

  TEST_CASE("critic loss arithmetic") {
    const auto same = torch::tensor({1.0, -2.0, 4.0});
    CHECK(CriticLoss(same, same, {}, 0.0).item<double>() == 0.0);
    const auto real = torch::tensor({2.0, 4.0, 3.0});
    const auto fake = torch::tensor({0.0, 2.0, 1.0});
    CHECK(CriticLoss(real, fake, {}, 0.0).item<double>() == doctest::Approx(-2.0));
    CHECK(CriticLoss(real, fake, torch::tensor(0.5), 10.0).item<double>() == doctest::Approx(3.0));
    CHECK(CriticFeedback(real, fake).item<double>() == doctest::Approx(-2.0));
  }

  TEST_CASE("gradient penalty of a linear unit-gradient critic is zero") {
    std::mt19937_64 rng(8);
    auto u = torch::randn({80, 16}, torch::kFloat64);
    u = u / u.norm();
    const ScoreFn linear = [&](const torch::Tensor& x) { return (x * u).sum() + 0.3; };
    std::vector<torch::Tensor> real, fake;
    for (int i = 0; i < 4; ++i) {
      real.push_back(torch::randn({80, 16}, torch::kFloat64));
      fake.push_back(torch::randn({80, 16}, torch::kFloat64));
    }
    const auto gp = GradientPenalty(linear, real, fake, rng);
    CHECK(std::abs(gp.penalty.item<double>()) < 1e-6);
    const ScoreFn doubled = [&](const torch::Tensor& x) { return 2.0 * (x * u).sum(); };
    CHECK(GradientPenalty(doubled, real, fake, rng).penalty.item<double>() == doctest::Approx(1.0).epsilon(1e-9));
  }

  TEST_CASE("interpolates lie on the real-fake segments") {
    std::mt19937_64 rng(9);
    Critic critic(HeadsConfig{});
    std::vector<torch::Tensor> real, fake;
    for (int i = 0; i < 5; ++i) {
      real.push_back(torch::randn({80, 12}));
      fake.push_back(torch::randn({80, 12}));
    }
    const auto gp = GradientPenalty([&](const torch::Tensor& x) { return critic->Score(x); }, real, fake, rng);
    for (size_t i = 0; i < real.size(); ++i) {
      CHECK(gp.eps[i] >= 0.0);
      CHECK(gp.eps[i] <= 1.0);
      const auto expect = gp.eps[i] * real[i] + (1.0 - gp.eps[i]) * fake[i];
      CHECK((gp.interpolates[i].detach() - expect).abs().max().item<float>() < 1e-6);
    }
    gp.penalty.backward();
    double norm = 0.0;
    for (const auto& p : critic->parameters()) {
      if (p.grad().defined()) norm += p.grad().pow(2).sum().item<double>();
    }
    CHECK(norm > 0.0);
  }

  TEST_CASE("config validation and key-value round trip") {
    HeadsConfig c;
    c.windows = {6, 40};
    c.critic_channels = {8, 8, 16, 16};
    c.n_critic = 3;
    KvConfig kv;
    c.ToKv(kv);
    const auto back = HeadsConfig::FromKv(kv);
    CHECK(back.windows.min == 6);
    CHECK(back.windows.max == 40);
    CHECK(back.critic_channels == c.critic_channels);
    CHECK(back.n_critic == 3);
    CHECK(HeadsConfig{}.gp_lambda == 10.0);
    CHECK(HeadsConfig{}.n_critic == 5);
    c.critic_channels = {8, 8, 8};
    CHECK_THROWS_AS(c.Validate(), Error);
  }
}

TEST_SUITE("multi-task heads") {
  TEST_CASE("classifier output is a probability, also for constant windows") {
    torch::manual_seed(10);
    MelClassifier clf(80);
    for (int i = 0; i < 10; ++i) {
      const float p = clf(torch::randn({80, 15}) * 10.0).item<float>();
      CHECK(p > 0.0f);
      CHECK(p < 1.0f);
    }
    const float c = clf(torch::full({80, 12}, -11.5)).item<float>();
    CHECK(std::isfinite(c));
    CHECK(c > 0.0f);
    CHECK(c < 1.0f);
  }

  TEST_CASE("feature decoders keep T and own separate parameters") {
    torch::manual_seed(11);
    FeatureDecoders dec(80);
    const auto mask = torch::ones({2, 37}, torch::kBool);
    const auto out = dec(torch::randn({2, 80, 37}), mask);
    CHECK(out.sizes() == torch::IntArrayRef({2, 3, 37}));
    CHECK(dec->decoders[0]->c1->weight.data_ptr() != dec->decoders[1]->c1->weight.data_ptr());
    CHECK(dec->decoders[1]->c1->weight.data_ptr() != dec->decoders[2]->c1->weight.data_ptr());
    const int64_t per = (80 * 80 + 80) + (80 * 32 + 32) + (32 + 1);
    int64_t total = 0;
    for (const auto& p : dec->parameters()) total += p.numel();
    CHECK(total == 3 * per);
    const auto feats = torch::arange(2 * 9 * 4, torch::kFloat32).view({2, 9, 4});
    const auto t = FeatureDecodersImpl::Targets(feats);
    CHECK(torch::equal(t.select(1, 0), feats.select(1, 0)));
    CHECK(torch::equal(t.select(1, 1), feats.select(1, 1)));
    CHECK(torch::equal(t.select(1, 2), feats.select(1, 3)));
  }

  TEST_CASE("reconstruction gradient reaches mel_dec through the decoders") {
    torch::manual_seed(12);
    FeatureDecoders dec(80);
    auto mel_dec = torch::randn({2, 80, 20}, torch::requires_grad());
    auto mask = torch::ones({2, 20}, torch::kBool);
    mask[1].slice(0, 14).fill_(false);
    const auto feats = torch::rand({2, 3, 20}) * mask.unsqueeze(1);
    objectives::ReconstructionLoss(feats, dec(mel_dec, mask), mask).backward();
    CHECK(mel_dec.grad().abs().sum().item<float>() > 0.0f);
    CHECK(mel_dec.grad()[1].slice(1, 14).abs().max().item<float>() == 0.0f);
  }

  TEST_CASE("speaker head embedding size and minimum length") {
    torch::manual_seed(13);
    SpeakerHead head(80, 64);
    CHECK(head->Embed(torch::randn({80, 9})).sizes() == torch::IntArrayRef({64}));
    CHECK(head->Embed(torch::randn({80, 200})).sizes() == torch::IntArrayRef({64}));
    try {
      head->Embed(torch::randn({80, 8}));
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("utterance too short for speaker head") != std::string::npos);
    }
    const auto x = torch::randn({80, 40});
    CHECK(torch::equal(head->Embed(x), head->Embed(x.clone())));
    auto batch = torch::zeros({2, 80, 40});
    batch[0].copy_(x);
    batch[1].slice(1, 0, 20).copy_(x.slice(1, 0, 20));
    const auto emb = head(batch, Lengths({40, 20}));
    CHECK(torch::equal(emb[0], head->Embed(x)));
    CHECK(torch::equal(emb[1], head->Embed(x.slice(1, 0, 20))));
  }

  TEST_CASE("heads are optional and never alter the acoustic model") {
    auto cfg = model::ModelConfig::Desk();
    cfg.vocab_size = 20;
    cfg.n_speakers = 2;
    const auto ex = testing::SyntheticExample("a", 20, {3, 4, 5}, 0, 1);
    const auto batch = data::MakeBatch({&ex}, cfg.r);
    torch::manual_seed(14);
    model::AcousticModel bare(cfg);
    const auto before = bare->forward(batch).mel_post;
    torch::manual_seed(14);
    model::AcousticModel with(cfg);
    Heads all(HeadsConfig{}, true, true, true);
    Heads none(HeadsConfig{}, false, false, false);
    CHECK(none->parameters().empty());
    CHECK(!all->parameters().empty());
    CHECK(torch::equal(before, with->forward(batch).mel_post));
  }
}
