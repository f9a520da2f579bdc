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
#include <filesystem>
#include <map>
#include <random>
#include <string>

#include <unistd.h>

#include "common/error.hpp"
#include "data/manifest.hpp"
#include "eval/evaluate.hpp"
#include "eval/metrics.hpp"
#include "features/waveform.hpp"
#include "support/corpus.hpp"
#include "train/trainer.hpp"

using namespace karaoker;
using features::FrameTrack;
namespace fs = std::filesystem;

namespace {

FrameTrack Track(std::vector<double> values, std::vector<uint8_t> voiced = {}) {
  FrameTrack t;
  if (voiced.empty()) voiced.assign(values.size(), 1);
  t.values = std::move(values);
  t.voiced = std::move(voiced);
  t.hop_seconds = 256.0 / 22050.0;
  return t;
}

FrameTrack Melody(size_t n, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(150.0, 320.0);
  std::bernoulli_distribution unvoiced(0.2);
  FrameTrack t = Track(std::vector<double>(n));
  for (size_t i = 0; i < n; ++i) {
    t.voiced[i] = unvoiced(rng) ? 0 : 1;
    t.values[i] = t.voiced[i] ? u(rng) : 0.0;
  }
  return t;
}

FrameTrack Scaled(FrameTrack t, double k) {
  for (auto& v : t.values) v *= k;
  return t;
}

torch::Tensor Vec(std::initializer_list<double> v) { return torch::tensor(std::vector<double>(v)); }

}  // namespace

TEST_SUITE("mf0_rmse") {
  TEST_CASE("identical tracks score zero") {
    const auto t = Melody(120, 1);
    CHECK(eval::Mf0Rmse(t, t) == 0.0);
  }

  TEST_CASE("transposition does not change the score") {
    const auto ref = Melody(100, 2);
    CHECK(eval::Mf0Rmse(Scaled(ref, 2.0), ref) == doctest::Approx(0.0).epsilon(1e-12));
    const auto gen = Melody(100, 3);
    const double base = eval::Mf0Rmse(gen, ref);
    CHECK(base > 0.0);
    for (double k : {0.5, 2.0, 3.0}) {
      CHECK(eval::Mf0Rmse(Scaled(gen, k), ref) == doctest::Approx(base).epsilon(1e-12));
    }
  }

  TEST_CASE("one frame at 1.5x out of 100 scores 0.05") {
    const auto ref = Track(std::vector<double>(100, 200.0));
    auto gen = ref;
    gen.values[40] = 300.0;
    const auto d = eval::Mf0RmseDetail(gen, ref);
    CHECK(d.voiced_frames == 100);
    CHECK(d.rmse == doctest::Approx(0.05).epsilon(1e-12));
  }

  TEST_CASE("the score is symmetric") {
    const auto a = Melody(90, 4);
    const auto b = Melody(90, 5);
    CHECK(eval::Mf0Rmse(a, b) == doctest::Approx(eval::Mf0Rmse(b, a)).epsilon(1e-12));
  }

  TEST_CASE("only mutually voiced frames count") {
    auto gen = Track(std::vector<double>(10, 200.0));
    auto ref = Track(std::vector<double>(10, 100.0));
    gen.voiced[0] = 0;
    gen.values[0] = 999.0;
    ref.voiced[9] = 0;
    const auto d = eval::Mf0RmseDetail(gen, ref);
    CHECK(d.voiced_frames == 8);
    CHECK(d.rmse == 0.0);
  }

  TEST_CASE("different lengths are resampled to the shorter") {
    const auto ref = Track(std::vector<double>(50, 180.0));
    const auto gen = Track(std::vector<double>(100, 90.0));
    const auto d = eval::Mf0RmseDetail(gen, ref);
    CHECK(d.voiced_frames == 50);
    CHECK(d.rmse == 0.0);
  }

  TEST_CASE("no voiced overlap is an error") {
    auto gen = Track({200.0, 0.0}, {1, 0});
    auto ref = Track({0.0, 200.0}, {0, 1});
    CHECK_THROWS_WITH_AS(eval::Mf0Rmse(gen, ref), doctest::Contains("no voiced overlap"), Error);
    CHECK_THROWS_AS(eval::Mf0Rmse(Track({}), Track({})), Error);
  }
}

TEST_SUITE("speaker_cos") {
  TEST_CASE("identical sets give 1") {
    std::map<std::string, std::vector<torch::Tensor>> g{{"a", {Vec({1, 2, 3}), Vec({0, 1, 0})}},
                                                        {"b", {Vec({-1, 0, 4})}}};
    CHECK(eval::SpeakerCos(g, g) == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("orthogonal sets give 0") {
    std::map<std::string, std::vector<torch::Tensor>> g{{"a", {Vec({1, 0, 0})}}};
    std::map<std::string, std::vector<torch::Tensor>> r{{"a", {Vec({0, 2, 0}), Vec({0, 0, 3})}}};
    // Mean of the reference group is (0, 1, 1.5), orthogonal to (1, 0, 0).
    CHECK(std::abs(eval::SpeakerCos(g, r)) < 1e-12);
  }

  TEST_CASE("median across speakers") {
    std::map<std::string, std::vector<torch::Tensor>> g{
        {"a", {Vec({1, 0})}}, {"b", {Vec({1, 0})}}, {"c", {Vec({1, 0})}}};
    std::map<std::string, std::vector<torch::Tensor>> r{
        {"a", {Vec({1, 0})}}, {"b", {Vec({0, 1})}}, {"c", {Vec({1, 1})}}};
    CHECK(eval::SpeakerCos(g, r) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  }

  TEST_CASE("empty or disjoint groups are errors") {
    std::map<std::string, std::vector<torch::Tensor>> g{{"a", {}}};
    std::map<std::string, std::vector<torch::Tensor>> r{{"a", {Vec({1, 0})}}};
    CHECK_THROWS_AS(eval::SpeakerCos(g, r), Error);
    std::map<std::string, std::vector<torch::Tensor>> other{{"z", {Vec({1, 0})}}};
    CHECK_THROWS_AS(eval::SpeakerCos(r, other), Error);
  }
}

TEST_SUITE("evaluate") {
  TEST_CASE("a corpus scored against itself is perfect") {
    const auto root = fs::temp_directory_path() / ("karaoker_eval_" + std::to_string(::getpid()));
    fs::remove_all(root);
    testing::ToyCorpusSpec spec;
    spec.seconds = 0.6;
    testing::WriteToyCorpus((root / "corpus").string(), spec);
    data::PrepareOptions po;
    po.threads = 1;
    auto m = data::BuildManifest((root / "corpus").string(), (root / "data").string(), po);
    train::TrainConfig cfg;
    cfg.schedule.total_steps = 2;
    cfg.schedule.batch_size = 2;
    train::Trainer t(cfg, m);
    t.Step();
    t.Save((root / "m.ckpt").string());
    const auto bundle = train::LoadInferenceBundle((root / "m.ckpt").string(), true);

    Diagnostics diag;
    const auto rep = eval::EvaluateDirectories(bundle, (root / "corpus").string(), (root / "corpus").string(), &diag);
    CHECK(rep.utterances.size() == 6);
    CHECK(rep.speakers == 2);
    CHECK(rep.mf0_rmse == 0.0);
    CHECK(rep.speaker_cos == doctest::Approx(1.0).epsilon(1e-9));
    const auto text = rep.Format();
    CHECK(text.find("mf0_rmse\t0\n") == 0);
    CHECK(text.find("spk0/utt0.wav") != std::string::npos);

    fs::create_directories(root / "gen" / "spk0");
    fs::copy_file(root / "corpus" / "spk0" / "utt0.wav", root / "gen" / "spk0" / "utt0.wav");
    fs::copy_file(root / "corpus" / "spk0" / "utt0.wav", root / "gen" / "spk0" / "orphan.wav");
    Diagnostics d2;
    const auto part = eval::EvaluateDirectories(bundle, (root / "gen").string(), (root / "corpus").string(), &d2);
    CHECK(part.utterances.size() == 1);
    CHECK(d2.warnings().size() == 1);

    const auto no_head = train::LoadInferenceBundle((root / "m.ckpt").string(), false);
    CHECK_THROWS_AS(eval::EvaluateDirectories(no_head, (root / "gen").string(), (root / "corpus").string()), Error);
  }
}
