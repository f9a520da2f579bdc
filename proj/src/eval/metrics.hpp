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

#include <torch/torch.h>

#include <map>
#include <string>
#include <vector>

#include "features/vocal_features.hpp"

namespace karaoker::eval {

struct Mf0Detail {
  double rmse = 0.0;
  int voiced_frames = 0;  // mutually voiced frames used
};

// Both tracks are resampled (nearest) to the shorter length; over mutually
// voiced frames each track is divided by its own median and the RMSE of the
// difference is returned. Throws "no voiced overlap" when none remain.
Mf0Detail Mf0RmseDetail(const features::FrameTrack& gen, const features::FrameTrack& ref);
double Mf0Rmse(const features::FrameTrack& gen, const features::FrameTrack& ref);

// Embeddings grouped by speaker id. For every speaker present in both maps:
// cosine between the mean generated and mean reference embedding; returns
// the median across speakers.
double SpeakerCos(const std::map<std::string, std::vector<torch::Tensor>>& gen,
                  const std::map<std::string, std::vector<torch::Tensor>>& ref);

struct UtteranceScore {
  std::string id;
  std::string speaker;
  double mf0_rmse = 0.0;
  int voiced_frames = 0;
};

struct EvalReport {
  double mf0_rmse = 0.0;  // mean over utterances
  double speaker_cos = 0.0;
  int speakers = 0;
  std::vector<UtteranceScore> utterances;

  std::string Format() const;
};

}  // namespace karaoker::eval
