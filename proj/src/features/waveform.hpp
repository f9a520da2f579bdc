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
#include <vector>

namespace karaoker::features {

// Mono waveform with samples nominally in [-1, 1].
struct Waveform {
  std::vector<float> samples;
  int sample_rate = 22050;

  double duration_seconds() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }

  // Throws kInvalidArgument on a non-positive rate or non-finite samples.
  void Validate() const;
};

// Reads a RIFF/WAVE file: PCM 8/16/24/32-bit or IEEE float32, mono only.
Waveform ReadWav(const std::string& path);

// Writes 16-bit PCM; samples are clipped to [-1, 1].
void WriteWav(const std::string& path, const Waveform& wave);

}  // namespace karaoker::features
