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

#include "eval/evaluate.hpp"

#include <algorithm>
#include <filesystem>

#include "common/error.hpp"
#include "features/waveform.hpp"
#include "infer/synthesize.hpp"

namespace karaoker::eval {

namespace fs = std::filesystem;

namespace {

std::vector<fs::path> WavFiles(const fs::path& root) {
  Require(fs::is_directory(root), "not a directory: " + root.string(), ErrorCode::kIo);
  std::vector<fs::path> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file() && e.path().extension() == ".wav") out.push_back(fs::relative(e.path(), root));
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

EvalReport EvaluateDirectories(const train::InferenceBundle& bundle, const std::string& gen_dir,
                               const std::string& ref_dir, Diagnostics* diag) {
  Require(!bundle.speaker_head.is_empty(), "evaluation needs a checkpoint with a speaker head", ErrorCode::kConfig);
  EvalReport report;
  std::map<std::string, std::vector<torch::Tensor>> gen_emb, ref_emb;
  auto head = bundle.speaker_head;
  torch::NoGradGuard no_grad;
  for (const auto& rel : WavFiles(gen_dir)) {
    const auto ref_path = fs::path(ref_dir) / rel;
    if (!fs::exists(ref_path)) {
      WarnTo(diag, "no reference for " + rel.string());
      continue;
    }
    try {
      const auto g = features::AnalyzeWaveform(features::ReadWav((fs::path(gen_dir) / rel).string()), bundle.features);
      const auto r = features::AnalyzeWaveform(features::ReadWav(ref_path.string()), bundle.features);
      UtteranceScore s;
      s.id = rel.string();
      s.speaker = rel.has_parent_path() ? rel.begin()->string() : "default";
      const auto d = Mf0RmseDetail(g.features[features::Feature::kF0], r.features[features::Feature::kF0]);
      s.mf0_rmse = d.rmse;
      s.voiced_frames = d.voiced_frames;
      gen_emb[s.speaker].push_back(head->Embed(infer::MelToTensor(g.mel)));
      ref_emb[s.speaker].push_back(head->Embed(infer::MelToTensor(r.mel)));
      report.utterances.push_back(std::move(s));
    } catch (const Error& e) {
      WarnTo(diag, "skipping " + rel.string() + ": " + e.what());
    }
  }
  if (report.utterances.empty()) Fail(ErrorCode::kNoData, "no evaluable utterance pairs");
  double sum = 0.0;
  for (const auto& u : report.utterances) sum += u.mf0_rmse;
  report.mf0_rmse = sum / static_cast<double>(report.utterances.size());
  report.speaker_cos = SpeakerCos(gen_emb, ref_emb);
  report.speakers = static_cast<int>(gen_emb.size());
  return report;
}

}  // namespace karaoker::eval
