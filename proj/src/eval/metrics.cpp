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

#include "eval/metrics.hpp"

#include <cmath>
#include <cstdio>

#include "common/error.hpp"
#include "features/dsp.hpp"

namespace karaoker::eval {

namespace {

// Index into a track of length `from` for position i of `to` columns.
size_t Nearest(size_t i, size_t to, size_t from) { return std::min(from - 1, i * from / to); }

}  // namespace

Mf0Detail Mf0RmseDetail(const features::FrameTrack& gen, const features::FrameTrack& ref) {
  Require(gen.values.size() == gen.voiced.size() && ref.values.size() == ref.voiced.size(),
          "mf0_rmse: malformed track");
  const size_t n = std::min(gen.size(), ref.size());
  std::vector<double> g, r;
  for (size_t i = 0; i < n; ++i) {
    const size_t gi = Nearest(i, n, gen.size());
    const size_t ri = Nearest(i, n, ref.size());
    if (gen.voiced[gi] && ref.voiced[ri] && gen.values[gi] > 0.0 && ref.values[ri] > 0.0) {
      g.push_back(gen.values[gi]);
      r.push_back(ref.values[ri]);
    }
  }
  if (g.empty()) Fail(ErrorCode::kNoData, "no voiced overlap");
  const double mg = features::Median(g);
  const double mr = features::Median(r);
  double ss = 0.0;
  for (size_t i = 0; i < g.size(); ++i) {
    const double d = g[i] / mg - r[i] / mr;
    ss += d * d;
  }
  return {std::sqrt(ss / static_cast<double>(g.size())), static_cast<int>(g.size())};
}

double Mf0Rmse(const features::FrameTrack& gen, const features::FrameTrack& ref) {
  return Mf0RmseDetail(gen, ref).rmse;
}

double SpeakerCos(const std::map<std::string, std::vector<torch::Tensor>>& gen,
                  const std::map<std::string, std::vector<torch::Tensor>>& ref) {
  std::vector<double> cos;
  for (const auto& [speaker, g] : gen) {
    const auto it = ref.find(speaker);
    if (it == ref.end()) continue;
    Require(!g.empty() && !it->second.empty(), "speaker_cos: empty group for speaker " + speaker);
    const auto mg = torch::stack(g).to(torch::kFloat64).mean(0);
    const auto mr = torch::stack(it->second).to(torch::kFloat64).mean(0);
    const double denom = mg.norm().item<double>() * mr.norm().item<double>();
    Require(denom > 0.0, "speaker_cos: zero mean embedding for speaker " + speaker, ErrorCode::kNumeric);
    cos.push_back((mg * mr).sum().item<double>() / denom);
  }
  if (cos.empty()) Fail(ErrorCode::kNoData, "speaker_cos: no speaker present in both sets");
  return features::Median(cos);
}

std::string EvalReport::Format() const {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "mf0_rmse\t%.9g\n", mf0_rmse);
  out += buf;
  std::snprintf(buf, sizeof(buf), "speaker_cos\t%.9g\t(internal speaker head, median over %d speakers)\n",
                speaker_cos, speakers);
  out += buf;
  out += "utterance\tspeaker\tmf0_rmse\tvoiced_frames\n";
  for (const auto& u : utterances) {
    std::snprintf(buf, sizeof(buf), "%s\t%s\t%.9g\t%d\n", u.id.c_str(), u.speaker.c_str(), u.mf0_rmse,
                  u.voiced_frames);
    out += buf;
  }
  return out;
}

}  // namespace karaoker::eval
