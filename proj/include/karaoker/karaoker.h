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

#ifndef KARAOKER_KARAOKER_H_
#define KARAOKER_KARAOKER_H_

/* C interface to the karaoker library. Every call returns a kk_status;
 * on failure kk_last_error() describes the problem. Error text and
 * warnings are per thread and cover the most recent call only. */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define KK_API __declspec(dllexport)
#else
#define KK_API __attribute__((visibility("default")))
#endif

typedef enum kk_status {
  KK_OK = 0,
  KK_ERR_INVALID_ARGUMENT = 1,
  KK_ERR_IO = 2,
  KK_ERR_FORMAT = 3,
  KK_ERR_AUDIO_TOO_SHORT = 4,
  KK_ERR_NO_DATA = 5,
  KK_ERR_NUMERIC = 6,
  KK_ERR_CONFIG = 7,
  KK_ERR_INTERNAL = 8
} kk_status;

typedef enum kk_log_level {
  KK_LOG_DEBUG = 0,
  KK_LOG_INFO = 1,
  KK_LOG_WARNING = 2,
  KK_LOG_ERROR = 3
} kk_log_level;

typedef struct kk_model kk_model;
typedef struct kk_synthesis kk_synthesis;

KK_API const char* kk_version(void);
KK_API const char* kk_status_name(kk_status status);
/* Empty string after a successful call. */
KK_API const char* kk_last_error(void);
KK_API size_t kk_warning_count(void);
/* NULL when index is out of range. */
KK_API const char* kk_warning(size_t index);
KK_API void kk_set_log_level(kk_log_level level);

/* Analyses every .wav below in_dir into <out_dir>/<rel>.kkf. config_path
 * may be NULL for defaults. The speaker id is the first directory level. */
KK_API kk_status kk_features_extract(const char* in_dir, const char* out_dir, const char* config_path,
                                     int* files_written);

/* Builds <out_dir>/manifest.txt and the feature cache from a corpus laid
 * out as <speaker>/<utt>.wav + <utt>.txt. */
KK_API kk_status kk_data_prepare(const char* corpus_dir, const char* out_dir, const char* config_path,
                                 int threads, int* utterances);

typedef struct kk_train_options {
  const char* config_path; /* NULL for defaults */
  const char* data_dir;
  const char* out_dir;
  const char* ablation; /* NULL keeps the config's value */
  int resume;
  int force;
  int64_t max_steps; /* 0 runs the full schedule */
} kk_train_options;

KK_API void kk_train_options_init(kk_train_options* opts);
/* final_mel_loss may be NULL. */
KK_API kk_status kk_train(const kk_train_options* opts, int64_t* steps_run, double* final_mel_loss);

KK_API kk_status kk_model_load(const char* checkpoint, kk_model** out);
KK_API void kk_model_free(kk_model* model);
KK_API int kk_model_speaker_count(const kk_model* model);
KK_API const char* kk_model_speaker_id(const kk_model* model, int index);
KK_API int kk_model_has_speaker_head(const kk_model* model);

typedef struct kk_synth_options {
  const char* template_wav;
  const char* speaker;
  const char* text;       /* may be NULL in textless mode */
  const char* deviations; /* "f0=+5,rms=-10", may be NULL */
  int textless;
  uint64_t seed;
} kk_synth_options;

KK_API void kk_synth_options_init(kk_synth_options* opts);
KK_API kk_status kk_synthesize(const kk_model* model, const kk_synth_options* opts, kk_synthesis** out);
KK_API void kk_synthesis_free(kk_synthesis* synthesis);
KK_API kk_status kk_synthesis_info(const kk_synthesis* synthesis, int* mel_frames, int* template_frames,
                                   int* truncated);
/* Writes mel.kkm, alignment.txt (decoder steps x tokens), gate.txt and,
 * when griffin_lim_iterations > 0, output.wav. */
KK_API kk_status kk_synthesis_write(const kk_synthesis* synthesis, const char* out_dir,
                                    int griffin_lim_iterations);

/* Scores wavs in gen_dir against same-named wavs in ref_dir and writes
 * the report when report_path is not NULL. */
KK_API kk_status kk_evaluate(const kk_model* model, const char* gen_dir, const char* ref_dir,
                             const char* report_path, double* mf0_rmse, double* speaker_cos);

/* voiced may be NULL (every positive value counts as voiced). */
KK_API kk_status kk_mf0_rmse(const double* gen, const uint8_t* gen_voiced, size_t gen_len, const double* ref,
                             const uint8_t* ref_voiced, size_t ref_len, double* out);

#ifdef __cplusplus
}
#endif

#endif /* KARAOKER_KARAOKER_H_ */
