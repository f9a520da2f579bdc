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

#include <cstdint>
#include <vector>

#include "features/mel.hpp"
#include "features/waveform.hpp"

namespace karaoker::infer {

struct GriffinLimResult {
  features::Waveform wave;
  // Spectral convergence | |STFT(y_i)| - S |_F / |S|_F after each iteration.
  std::vector<double> residuals;
};

// Linear magnitudes from the log-mel via the filter bank pseudo-inverse
// (negatives clipped), then iterative phase reconstruction. Output has
// frames * hop samples at the mel's rate.
GriffinLimResult GriffinLim(const features::MelSpectrogram& mel, const features::MelConfig& cfg,
                            int iterations = 60, uint64_t seed = 0);

}  // namespace karaoker::infer
