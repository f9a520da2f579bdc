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

#include <string>

#include "common/log.hpp"
#include "eval/metrics.hpp"
#include "train/checkpoint.hpp"

namespace karaoker::eval {

// Pairs <gen>/<rel>.wav with <ref>/<rel>.wav; the first directory level of
// <rel> is the speaker group ("default" for files at the top). F0 comes
// from the checkpoint's feature settings and embeddings from its speaker
// head. Unpaired or unreadable files are skipped with a warning.
EvalReport EvaluateDirectories(const train::InferenceBundle& bundle, const std::string& gen_dir,
                               const std::string& ref_dir, Diagnostics* diag = nullptr);

}  // namespace karaoker::eval
