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

#include "karaoker/karaoker.h"

#include <algorithm>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "common/error.hpp"
#include "common/kv_config.hpp"
#include "common/log.hpp"
#include "data/manifest.hpp"
#include "eval/evaluate.hpp"
#include "eval/metrics.hpp"
#include "features/feature_cache.hpp"
#include "features/feature_set.hpp"
#include "features/waveform.hpp"
#include "infer/griffin_lim.hpp"
#include "infer/synthesize.hpp"
#include "train/checkpoint.hpp"
#include "train/trainer.hpp"

namespace fs = std::filesystem;
using namespace karaoker;

struct kk_model {
  train::InferenceBundle bundle;
};

struct kk_synthesis {
  infer::SynthesisResult result;
  features::MelConfig mel_config;
  uint64_t seed = 0;
};

namespace {

thread_local std::string g_error;
thread_local std::vector<std::string> g_warnings;

kk_status ToStatus(ErrorCode code) { return static_cast<kk_status>(static_cast<int>(code)); }

// Runs `fn` with a fresh diagnostics sink and converts exceptions.
template <typename Fn>
kk_status Guard(Fn&& fn) {
  g_error.clear();
  g_warnings.clear();
  Diagnostics diag;
  kk_status status = KK_OK;
  try {
    fn(&diag);
  } catch (const Error& e) {
    g_error = e.what();
    status = ToStatus(e.code());
  } catch (const c10::Error& e) {
    g_error = e.what_without_backtrace();
    status = KK_ERR_INTERNAL;
  } catch (const std::bad_alloc&) {
    g_error = "out of memory";
    status = KK_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_error = e.what();
    status = KK_ERR_INTERNAL;
  } catch (...) {
    g_error = "unknown error";
    status = KK_ERR_INTERNAL;
  }
  g_warnings = diag.warnings();
  return status;
}

void NeedArg(const void* p, const char* name) {
  if (p == nullptr) Fail(ErrorCode::kInvalidArgument, std::string(name) + " must not be null");
}

features::FeatureConfig FeatureConfigFrom(const char* path) {
  if (path == nullptr || *path == '\0') return {};
  return features::FeatureConfig::FromKv(KvConfig::Load(path));
}

}  // namespace

extern "C" {

const char* kk_version(void) { return "0.1.0"; }

const char* kk_status_name(kk_status status) {
  switch (status) {
    case KK_OK: return "ok";
    case KK_ERR_INVALID_ARGUMENT: return "invalid argument";
    case KK_ERR_IO: return "i/o error";
    case KK_ERR_FORMAT: return "format error";
    case KK_ERR_AUDIO_TOO_SHORT: return "audio too short";
    case KK_ERR_NO_DATA: return "no data";
    case KK_ERR_NUMERIC: return "numeric error";
    case KK_ERR_CONFIG: return "configuration error";
    case KK_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* kk_last_error(void) { return g_error.c_str(); }

size_t kk_warning_count(void) { return g_warnings.size(); }

const char* kk_warning(size_t index) { return index < g_warnings.size() ? g_warnings[index].c_str() : nullptr; }

void kk_set_log_level(kk_log_level level) { SetLogLevel(static_cast<LogLevel>(level)); }

kk_status kk_features_extract(const char* in_dir, const char* out_dir, const char* config_path,
                              int* files_written) {
  return Guard([&](Diagnostics* diag) {
    NeedArg(in_dir, "in_dir");
    NeedArg(out_dir, "out_dir");
    const auto cfg = FeatureConfigFrom(config_path);
    const fs::path root(in_dir);
    Require(fs::is_directory(root), std::string("not a directory: ") + in_dir, ErrorCode::kIo);
    std::vector<fs::path> wavs;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
      if (e.is_regular_file() && e.path().extension() == ".wav") wavs.push_back(fs::relative(e.path(), root));
    }
    std::sort(wavs.begin(), wavs.end());
    int written = 0;
    for (const auto& rel : wavs) {
      try {
        features::CachedUtterance entry;
        entry.utterance_id = rel.stem().string();
        entry.speaker_id = rel.has_parent_path() ? rel.begin()->string() : "default";
        entry.sample_rate = cfg.mel.sample_rate;
        entry.hop_length = cfg.mel.hop_length;
        entry.data = features::AnalyzeWaveform(features::ReadWav((root / rel).string()), cfg);
        auto dst = fs::path(out_dir) / rel;
        dst.replace_extension(".kkf");
        fs::create_directories(dst.parent_path());
        features::WriteFeatureCache(dst.string(), entry);
        ++written;
      } catch (const Error& e) {
        WarnTo(diag, "skipping " + rel.string() + ": " + e.what());
      }
    }
    if (written == 0) Fail(ErrorCode::kNoData, std::string("no wav files could be analysed in ") + in_dir);
    if (files_written != nullptr) *files_written = written;
  });
}

kk_status kk_data_prepare(const char* corpus_dir, const char* out_dir, const char* config_path, int threads,
                          int* utterances) {
  return Guard([&](Diagnostics* diag) {
    NeedArg(corpus_dir, "corpus_dir");
    NeedArg(out_dir, "out_dir");
    data::PrepareOptions po;
    po.features = FeatureConfigFrom(config_path);
    po.threads = threads;
    const auto m = data::BuildManifest(corpus_dir, out_dir, po, diag);
    if (utterances != nullptr) *utterances = static_cast<int>(m.records.size());
  });
}

void kk_train_options_init(kk_train_options* opts) {
  if (opts != nullptr) *opts = kk_train_options{nullptr, nullptr, nullptr, nullptr, 0, 0, 0};
}

kk_status kk_train(const kk_train_options* opts, int64_t* steps_run, double* final_mel_loss) {
  return Guard([&](Diagnostics* diag) {
    NeedArg(opts, "options");
    NeedArg(opts->data_dir, "data_dir");
    NeedArg(opts->out_dir, "out_dir");
    Require(opts->max_steps >= 0, "max_steps must be non-negative");
    train::TrainConfig cfg;
    if (opts->config_path != nullptr && *opts->config_path != '\0') {
      cfg = train::TrainConfig::FromKv(KvConfig::Load(opts->config_path));
    }
    if (opts->ablation != nullptr && *opts->ablation != '\0') cfg.ablation = train::AblationByName(opts->ablation);
    train::TrainRunOptions ro;
    ro.out_dir = opts->out_dir;
    ro.resume = opts->resume != 0;
    ro.force = opts->force != 0;
    ro.max_steps = opts->max_steps;
    const auto res = train::RunTraining(cfg, opts->data_dir, ro, diag);
    if (steps_run != nullptr) *steps_run = static_cast<int64_t>(res.history.size());
    if (final_mel_loss != nullptr) {
      *final_mel_loss = res.history.empty() ? 0.0 : res.history.back().report[objectives::Term::kMel];
    }
  });
}

kk_status kk_model_load(const char* checkpoint, kk_model** out) {
  return Guard([&](Diagnostics*) {
    NeedArg(checkpoint, "checkpoint");
    NeedArg(out, "out");
    *out = nullptr;
    auto m = std::make_unique<kk_model>();
    m->bundle = train::LoadInferenceBundle(checkpoint, false);
    if (m->bundle.config.ablation.components.speaker) m->bundle = train::LoadInferenceBundle(checkpoint, true);
    *out = m.release();
  });
}

void kk_model_free(kk_model* model) { delete model; }

int kk_model_speaker_count(const kk_model* model) {
  return model == nullptr ? 0 : static_cast<int>(model->bundle.meta.speakers.size());
}

const char* kk_model_speaker_id(const kk_model* model, int index) {
  if (model == nullptr || index < 0 || index >= kk_model_speaker_count(model)) return nullptr;
  return model->bundle.meta.speakers.at(index).id.c_str();
}

int kk_model_has_speaker_head(const kk_model* model) {
  return model != nullptr && !model->bundle.speaker_head.is_empty() ? 1 : 0;
}

void kk_synth_options_init(kk_synth_options* opts) {
  if (opts != nullptr) *opts = kk_synth_options{nullptr, nullptr, nullptr, nullptr, 0, 0};
}

kk_status kk_synthesize(const kk_model* model, const kk_synth_options* opts, kk_synthesis** out) {
  return Guard([&](Diagnostics* diag) {
    NeedArg(model, "model");
    NeedArg(opts, "options");
    NeedArg(out, "out");
    NeedArg(opts->template_wav, "template_wav");
    NeedArg(opts->speaker, "speaker");
    *out = nullptr;
    infer::TemplateSpec spec;
    spec.source = infer::ExtractTemplate(model->bundle, opts->template_wav);
    spec.speaker = opts->speaker;
    spec.textless = opts->textless != 0;
    if (opts->text != nullptr) spec.text = opts->text;
    if (opts->deviations != nullptr) spec.deviations = infer::Deviations::Parse(opts->deviations);
    infer::SynthesisOptions so;
    so.seed = opts->seed;
    auto s = std::make_unique<kk_synthesis>();
    s->result = infer::Synthesize(model->bundle, spec, so, diag);
    s->mel_config = model->bundle.features.mel;
    s->seed = opts->seed;
    *out = s.release();
  });
}

void kk_synthesis_free(kk_synthesis* synthesis) { delete synthesis; }

kk_status kk_synthesis_info(const kk_synthesis* synthesis, int* mel_frames, int* template_frames, int* truncated) {
  return Guard([&](Diagnostics*) {
    NeedArg(synthesis, "synthesis");
    if (mel_frames != nullptr) *mel_frames = synthesis->result.mel.frames();
    if (template_frames != nullptr) *template_frames = synthesis->result.template_frames;
    if (truncated != nullptr) *truncated = synthesis->result.truncated ? 1 : 0;
  });
}

kk_status kk_synthesis_write(const kk_synthesis* synthesis, const char* out_dir, int griffin_lim_iterations) {
  return Guard([&](Diagnostics*) {
    NeedArg(synthesis, "synthesis");
    NeedArg(out_dir, "out_dir");
    Require(griffin_lim_iterations >= 0, "griffin_lim_iterations must be non-negative");
    const fs::path dir(out_dir);
    fs::create_directories(dir);
    const auto& r = synthesis->result;
    features::WriteMelFile((dir / "mel.kkm").string(), r.mel);

    std::ofstream al(dir / "alignment.txt");
    const auto a = r.alignment.to(torch::kFloat64).contiguous();
    const auto acc = a.accessor<double, 2>();
    char buf[32];
    for (int64_t s = 0; s < a.size(0); ++s) {
      for (int64_t n = 0; n < a.size(1); ++n) {
        std::snprintf(buf, sizeof(buf), n == 0 ? "%.6g" : " %.6g", acc[s][n]);
        al << buf;
      }
      al << '\n';
    }
    std::ofstream gate(dir / "gate.txt");
    for (float g : r.gate) {
      std::snprintf(buf, sizeof(buf), "%.6g\n", static_cast<double>(g));
      gate << buf;
    }
    Require(static_cast<bool>(al) && static_cast<bool>(gate), "failed writing to " + dir.string(), ErrorCode::kIo);

    if (griffin_lim_iterations > 0) {
      const auto gl = infer::GriffinLim(r.mel, synthesis->mel_config, griffin_lim_iterations, synthesis->seed);
      features::WriteWav((dir / "output.wav").string(), gl.wave);
    }
  });
}

kk_status kk_evaluate(const kk_model* model, const char* gen_dir, const char* ref_dir, const char* report_path,
                      double* mf0_rmse, double* speaker_cos) {
  return Guard([&](Diagnostics* diag) {
    NeedArg(model, "model");
    NeedArg(gen_dir, "gen_dir");
    NeedArg(ref_dir, "ref_dir");
    const auto rep = eval::EvaluateDirectories(model->bundle, gen_dir, ref_dir, diag);
    if (report_path != nullptr) {
      std::ofstream out(report_path);
      out << rep.Format();
      Require(static_cast<bool>(out), std::string("cannot write ") + report_path, ErrorCode::kIo);
    }
    if (mf0_rmse != nullptr) *mf0_rmse = rep.mf0_rmse;
    if (speaker_cos != nullptr) *speaker_cos = rep.speaker_cos;
  });
}

kk_status kk_mf0_rmse(const double* gen, const uint8_t* gen_voiced, size_t gen_len, const double* ref,
                      const uint8_t* ref_voiced, size_t ref_len, double* out) {
  return Guard([&](Diagnostics*) {
    NeedArg(out, "out");
    Require(gen_len == 0 || gen != nullptr, "gen must not be null");
    Require(ref_len == 0 || ref != nullptr, "ref must not be null");
    const auto track = [](const double* v, const uint8_t* voiced, size_t n) {
      features::FrameTrack t;
      t.values.assign(v, v + n);
      t.voiced.resize(n);
      for (size_t i = 0; i < n; ++i) t.voiced[i] = voiced != nullptr ? voiced[i] : (v[i] > 0.0 ? 1 : 0);
      return t;
    };
    *out = eval::Mf0Rmse(track(gen, gen_voiced, gen_len), track(ref, ref_voiced, ref_len));
  });
}

}  // extern "C"
