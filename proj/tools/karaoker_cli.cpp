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

// Command-line front end. Uses only the public C interface.

#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "karaoker/karaoker.h"

namespace {

int Report(kk_status status) {
  if (status != KK_OK) std::fprintf(stderr, "error (%s): %s\n", kk_status_name(status), kk_last_error());
  return static_cast<int>(status);
}

const char* OrNull(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"karaoker: feature-conditioned singing synthesis from speech data"};
  app.require_subcommand(1);
  bool quiet = false, verbose = false;
  app.add_flag("-q,--quiet", quiet, "Only print warnings and errors");
  app.add_flag("-v,--verbose", verbose, "Print debug output");
  app.set_version_flag("--version", std::string(kk_version()));

  auto* features = app.add_subcommand("features", "Vocal feature extraction");
  features->require_subcommand(1);
  auto* extract = features->add_subcommand("extract", "Analyse a directory of wav files into feature caches");
  std::string ex_in, ex_out, ex_cfg;
  extract->add_option("--in", ex_in, "Input wav directory")->required();
  extract->add_option("--out", ex_out, "Output cache directory")->required();
  extract->add_option("--config", ex_cfg, "Feature settings file");

  auto* data = app.add_subcommand("data", "Corpus preparation");
  data->require_subcommand(1);
  auto* prepare = data->add_subcommand("prepare", "Build the manifest and feature cache of a corpus");
  std::string dp_corpus, dp_out, dp_cfg;
  int dp_threads = 0;
  prepare->add_option("--corpus", dp_corpus, "Corpus root (<speaker>/<utt>.wav + .txt)")->required();
  prepare->add_option("--out", dp_out, "Output data directory")->required();
  prepare->add_option("--config", dp_cfg, "Feature settings file");
  prepare->add_option("--threads", dp_threads, "Worker threads (0 = all cores)");

  auto* train = app.add_subcommand("train", "Train an acoustic model");
  std::string tr_cfg, tr_data, tr_out, tr_ablation;
  bool tr_resume = false, tr_force = false;
  int64_t tr_max_steps = 0;
  train->add_option("--config", tr_cfg, "Training settings file")->required();
  train->add_option("--data", tr_data, "Prepared data directory")->required();
  train->add_option("--out", tr_out, "Run directory")->required();
  train->add_option("--ablation", tr_ablation, "Ablation row (1-9 or name)");
  train->add_flag("--resume", tr_resume, "Continue from <out>/latest.ckpt");
  train->add_flag("--force", tr_force, "Resume even if the config changed");
  train->add_option("--max-steps", tr_max_steps, "Stop after this many steps");

  auto* synth = app.add_subcommand("synth", "Synthesize from a template recording");
  std::string sy_template, sy_speaker, sy_ckpt, sy_text, sy_dev, sy_out;
  bool sy_textless = false;
  uint64_t sy_seed = 0;
  int sy_iters = 60;
  synth->add_option("--template", sy_template, "Template wav")->required();
  synth->add_option("--speaker", sy_speaker, "Target speaker id")->required();
  synth->add_option("--checkpoint", sy_ckpt, "Model checkpoint")->required();
  synth->add_option("--text", sy_text, "Lyrics");
  synth->add_flag("--textless", sy_textless, "Decode without text");
  synth->add_option("--dev", sy_dev, "Relative deviations, e.g. f0=+5,rms=-10");
  synth->add_option("--out", sy_out, "Output directory")->required();
  synth->add_option("--seed", sy_seed, "Random seed");
  synth->add_option("--griffin-lim-iterations", sy_iters, "Phase reconstruction iterations (0 skips the wav)")
      ->check(CLI::NonNegativeNumber);

  auto* evaluate = app.add_subcommand("eval", "Objective metrics between generated and reference audio");
  std::string ev_gen, ev_ref, ev_ckpt, ev_out;
  evaluate->add_option("--gen", ev_gen, "Generated wav directory")->required();
  evaluate->add_option("--ref", ev_ref, "Reference wav directory")->required();
  evaluate->add_option("--checkpoint", ev_ckpt, "Checkpoint with a speaker head")->required();
  evaluate->add_option("--out", ev_out, "Report file")->required();

  CLI11_PARSE(app, argc, argv);
  kk_set_log_level(verbose ? KK_LOG_DEBUG : quiet ? KK_LOG_WARNING : KK_LOG_INFO);

  if (extract->parsed()) {
    int n = 0;
    const auto st = kk_features_extract(ex_in.c_str(), ex_out.c_str(), OrNull(ex_cfg), &n);
    if (st == KK_OK) std::printf("extracted %d files into %s\n", n, ex_out.c_str());
    return Report(st);
  }
  if (prepare->parsed()) {
    int n = 0;
    const auto st = kk_data_prepare(dp_corpus.c_str(), dp_out.c_str(), OrNull(dp_cfg), dp_threads, &n);
    if (st == KK_OK) std::printf("prepared %d utterances in %s\n", n, dp_out.c_str());
    return Report(st);
  }
  if (train->parsed()) {
    kk_train_options opts;
    kk_train_options_init(&opts);
    opts.config_path = tr_cfg.c_str();
    opts.data_dir = tr_data.c_str();
    opts.out_dir = tr_out.c_str();
    opts.ablation = OrNull(tr_ablation);
    opts.resume = tr_resume;
    opts.force = tr_force;
    opts.max_steps = tr_max_steps;
    int64_t steps = 0;
    double mel = 0.0;
    const auto st = kk_train(&opts, &steps, &mel);
    if (st == KK_OK) std::printf("ran %lld steps, final l_mel %.6g\n", static_cast<long long>(steps), mel);
    return Report(st);
  }
  if (synth->parsed()) {
    kk_model* model = nullptr;
    auto st = kk_model_load(sy_ckpt.c_str(), &model);
    if (st != KK_OK) return Report(st);
    kk_synth_options opts;
    kk_synth_options_init(&opts);
    opts.template_wav = sy_template.c_str();
    opts.speaker = sy_speaker.c_str();
    opts.text = OrNull(sy_text);
    opts.deviations = OrNull(sy_dev);
    opts.textless = sy_textless;
    opts.seed = sy_seed;
    kk_synthesis* syn = nullptr;
    st = kk_synthesize(model, &opts, &syn);
    if (st == KK_OK) st = kk_synthesis_write(syn, sy_out.c_str(), sy_iters);
    if (st == KK_OK) {
      int frames = 0, tframes = 0, truncated = 0;
      kk_synthesis_info(syn, &frames, &tframes, &truncated);
      std::printf("mel_frames %d\ntemplate_frames %d\ntruncated %d\n", frames, tframes, truncated);
    }
    kk_synthesis_free(syn);
    kk_model_free(model);
    return Report(st);
  }
  if (evaluate->parsed()) {
    kk_model* model = nullptr;
    auto st = kk_model_load(ev_ckpt.c_str(), &model);
    if (st != KK_OK) return Report(st);
    double rmse = 0.0, cos = 0.0;
    st = kk_evaluate(model, ev_gen.c_str(), ev_ref.c_str(), ev_out.c_str(), &rmse, &cos);
    if (st == KK_OK) std::printf("mf0_rmse %.9g\nspeaker_cos %.9g\n", rmse, cos);
    kk_model_free(model);
    return Report(st);
  }
  return 0;
}
