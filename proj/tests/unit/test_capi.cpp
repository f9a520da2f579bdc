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

#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include <unistd.h>

#include "karaoker/karaoker.h"
#include "support/corpus.hpp"

namespace fs = std::filesystem;

namespace {

fs::path Root() {
  static const fs::path root = [] {
    const auto r = fs::temp_directory_path() / ("karaoker_capi_" + std::to_string(::getpid()));
    fs::remove_all(r);
    karaoker::testing::ToyCorpusSpec spec;
    spec.seconds = 0.6;
    karaoker::testing::WriteToyCorpus((r / "corpus").string(), spec);
    return r;
  }();
  return root;
}

std::string P(const std::string& rel) { return (Root() / rel).string(); }

}  // namespace

TEST_CASE("status names and error reporting") {
  CHECK(std::string(kk_status_name(KK_OK)) == "ok");
  CHECK(std::string(kk_status_name(KK_ERR_NO_DATA)) == "no data");
  CHECK(std::strlen(kk_version()) > 0);

  kk_model* m = reinterpret_cast<kk_model*>(0x1);
  CHECK(kk_model_load(nullptr, &m) == KK_ERR_INVALID_ARGUMENT);
  CHECK(std::string(kk_last_error()).find("checkpoint") != std::string::npos);
  CHECK(kk_model_load(P("missing.ckpt").c_str(), &m) == KK_ERR_IO);
  CHECK(m == nullptr);
  CHECK(kk_mf0_rmse(nullptr, nullptr, 0, nullptr, nullptr, 0, nullptr) == KK_ERR_INVALID_ARGUMENT);
  double v = -1.0;
  CHECK(kk_data_prepare(P("nowhere").c_str(), P("nodata").c_str(), nullptr, 1, nullptr) != KK_OK);
  CHECK(std::strlen(kk_last_error()) > 0);

  const double a[] = {100, 200, 0, 150};
  const double b[] = {200, 400, 300, 300};
  CHECK(kk_mf0_rmse(a, nullptr, 4, b, nullptr, 4, &v) == KK_OK);
  CHECK(std::string(kk_last_error()).empty());
  CHECK(v == doctest::Approx(0.0));
  const double z[] = {0, 0};
  CHECK(kk_mf0_rmse(z, nullptr, 2, b, nullptr, 2, &v) == KK_ERR_NO_DATA);
  CHECK(std::string(kk_last_error()).find("no voiced overlap") != std::string::npos);
}

TEST_CASE("features extract writes one cache per wav") {
  int n = 0;
  REQUIRE(kk_features_extract(P("corpus").c_str(), P("feats").c_str(), nullptr, &n) == KK_OK);
  CHECK(n == 6);
  CHECK(fs::exists(Root() / "feats" / "spk0" / "utt0.kkf"));
  CHECK(kk_features_extract(P("feats").c_str(), P("feats2").c_str(), nullptr, &n) == KK_ERR_NO_DATA);

  std::ofstream(P("bad.cfg")) << "mel.n_mels = 0\n";
  CHECK(kk_features_extract(P("corpus").c_str(), P("feats3").c_str(), P("bad.cfg").c_str(), &n) != KK_OK);
}

TEST_CASE("prepare, train, synthesize and evaluate through the C interface") {
  int utts = 0;
  REQUIRE(kk_data_prepare(P("corpus").c_str(), P("data").c_str(), nullptr, 1, &utts) == KK_OK);
  CHECK(utts == 6);

  std::ofstream(P("train.cfg")) << "train.total_steps = 4\ntrain.batch_size = 3\nheads.n_critic = 1\n";
  kk_train_options to;
  kk_train_options_init(&to);
  to.config_path = nullptr;
  to.data_dir = nullptr;
  CHECK(kk_train(&to, nullptr, nullptr) == KK_ERR_INVALID_ARGUMENT);
  const auto cfg = P("train.cfg"), data = P("data"), out = P("run");
  to.config_path = cfg.c_str();
  to.data_dir = data.c_str();
  to.out_dir = out.c_str();
  to.ablation = "9";
  int64_t steps = 0;
  double mel = 0.0;
  REQUIRE(kk_train(&to, &steps, &mel) == KK_OK);
  CHECK(steps == 4);
  CHECK(mel > 0.0);
  CHECK(fs::exists(Root() / "run" / "final.ckpt"));
  to.ablation = "nonsense";
  CHECK(kk_train(&to, nullptr, nullptr) == KK_ERR_CONFIG);

  kk_model* model = nullptr;
  REQUIRE(kk_model_load(P("run/final.ckpt").c_str(), &model) == KK_OK);
  CHECK(kk_model_speaker_count(model) == 2);
  CHECK(std::string(kk_model_speaker_id(model, 0)) == "spk0");
  CHECK(kk_model_speaker_id(model, 5) == nullptr);
  CHECK(kk_model_has_speaker_head(model) == 1);

  kk_synth_options so;
  kk_synth_options_init(&so);
  const auto tmpl = P("corpus/spk1/utt0.wav");
  so.template_wav = tmpl.c_str();
  so.speaker = "spk0";
  so.textless = 1;
  so.deviations = "f0=+5,rms=-10";
  kk_synthesis* syn = nullptr;
  REQUIRE(kk_synthesize(model, &so, &syn) == KK_OK);
  int frames = 0, tframes = 0, trunc = -1;
  CHECK(kk_synthesis_info(syn, &frames, &tframes, &trunc) == KK_OK);
  CHECK(frames > 0);
  CHECK(tframes > 0);
  CHECK((trunc == 0 || trunc == 1));
  REQUIRE(kk_synthesis_write(syn, P("synth").c_str(), 4) == KK_OK);
  for (const char* f : {"mel.kkm", "alignment.txt", "gate.txt", "output.wav"}) CHECK(fs::exists(Root() / "synth" / f));
  kk_synthesis_free(syn);

  so.textless = 0;
  syn = nullptr;
  CHECK(kk_synthesize(model, &so, &syn) == KK_ERR_INVALID_ARGUMENT);
  CHECK(std::string(kk_last_error()).find("text required") != std::string::npos);
  CHECK(syn == nullptr);
  so.deviations = "f0=-100";
  so.text = "la la";
  CHECK(kk_synthesize(model, &so, &syn) == KK_ERR_INVALID_ARGUMENT);
  so.deviations = nullptr;
  so.speaker = "ghost";
  CHECK(kk_synthesize(model, &so, &syn) == KK_ERR_INVALID_ARGUMENT);

  double rmse = -1.0, cos = -2.0;
  REQUIRE(kk_evaluate(model, P("corpus").c_str(), P("corpus").c_str(), P("report.txt").c_str(), &rmse, &cos) ==
          KK_OK);
  CHECK(rmse == 0.0);
  CHECK(cos == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(fs::file_size(Root() / "report.txt") > 0);
  kk_model_free(model);
  kk_model_free(nullptr);
}
