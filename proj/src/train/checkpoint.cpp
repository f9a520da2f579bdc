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

#include "train/checkpoint.hpp"

#include <filesystem>
#include <sstream>

#include "common/error.hpp"

namespace karaoker::train {

namespace fs = std::filesystem;

void WriteString(torch::serialize::OutputArchive& ar, const std::string& key, const std::string& value) {
  ar.write(key, c10::IValue(value));
}

std::string ReadString(torch::serialize::InputArchive& ar, const std::string& key) {
  c10::IValue v;
  if (!ar.try_read(key, v) || !v.isString()) Fail(ErrorCode::kFormat, "checkpoint is missing '" + key + "'");
  return v.toStringRef();
}

void WriteInt(torch::serialize::OutputArchive& ar, const std::string& key, int64_t value) {
  ar.write(key, c10::IValue(value));
}

int64_t ReadInt(torch::serialize::InputArchive& ar, const std::string& key) {
  c10::IValue v;
  if (!ar.try_read(key, v) || !v.isInt()) Fail(ErrorCode::kFormat, "checkpoint is missing '" + key + "'");
  return v.toInt();
}

void SaveModule(torch::serialize::OutputArchive& ar, const std::string& key, const torch::nn::Module& m) {
  torch::serialize::OutputArchive sub;
  m.save(sub);
  ar.write(key, sub);
}

void LoadModule(torch::serialize::InputArchive& ar, const std::string& key, torch::nn::Module& m) {
  torch::serialize::InputArchive sub;
  if (!ar.try_read(key, sub)) Fail(ErrorCode::kFormat, "checkpoint is missing '" + key + "'");
  try {
    m.load(sub);
  } catch (const c10::Error& e) {
    Fail(ErrorCode::kFormat, "checkpoint '" + key + "' does not match the configuration: " + e.what_without_backtrace());
  }
}

void WriteMeta(torch::serialize::OutputArchive& ar, const CheckpointMeta& meta) {
  WriteInt(ar, "version", kCheckpointVersion);
  WriteInt(ar, "step", meta.step);
  WriteString(ar, "config", meta.config_text);
  WriteString(ar, "config_hash", meta.config_hash);
  WriteString(ar, "features", meta.features_text);
  WriteString(ar, "tokenizer", meta.tokenizer.Serialize());
  std::string speakers;
  for (const auto& e : meta.speakers.entries()) speakers += e.id + '\t' + data::FormatStats(e.stats) + '\n';
  WriteString(ar, "speakers", speakers);
}

CheckpointMeta ReadMeta(torch::serialize::InputArchive& ar) {
  const int64_t version = ReadInt(ar, "version");
  Require(version == kCheckpointVersion, "unsupported checkpoint version " + std::to_string(version),
          ErrorCode::kFormat);
  CheckpointMeta meta;
  meta.step = ReadInt(ar, "step");
  meta.config_text = ReadString(ar, "config");
  meta.config_hash = ReadString(ar, "config_hash");
  meta.features_text = ReadString(ar, "features");
  meta.tokenizer = data::Tokenizer::Deserialize(ReadString(ar, "tokenizer"));
  std::istringstream in(ReadString(ar, "speakers"));
  std::string line;
  while (std::getline(in, line)) {
    const auto tab = line.find('\t');
    Require(tab != std::string::npos, "malformed speaker entry in checkpoint", ErrorCode::kFormat);
    meta.speakers.Add(line.substr(0, tab), data::ParseStats(line.substr(tab + 1)));
  }
  return meta;
}

void SaveArchiveAtomic(torch::serialize::OutputArchive& ar, const std::string& path) {
  const std::string tmp = path + ".tmp";
  try {
    ar.save_to(tmp);
  } catch (const c10::Error& e) {
    Fail(ErrorCode::kIo, "cannot write checkpoint " + path + ": " + e.what_without_backtrace());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) Fail(ErrorCode::kIo, "cannot write checkpoint " + path + ": " + ec.message());
}

void LoadArchive(torch::serialize::InputArchive& ar, const std::string& path) {
  if (!fs::exists(path)) Fail(ErrorCode::kIo, "checkpoint not found: " + path);
  try {
    ar.load_from(path);
  } catch (const c10::Error& e) {
    Fail(ErrorCode::kFormat, "cannot read checkpoint " + path + ": " + e.what_without_backtrace());
  }
}

InferenceBundle LoadInferenceBundle(const std::string& path, bool with_speaker_head) {
  torch::serialize::InputArchive ar;
  LoadArchive(ar, path);
  InferenceBundle b;
  b.meta = ReadMeta(ar);
  b.config = TrainConfig::FromKv(KvConfig::Parse(b.meta.config_text));
  b.features = features::FeatureConfig::FromKv(KvConfig::Parse(b.meta.features_text));
  b.model = model::AcousticModel(b.config.model);
  LoadModule(ar, "model", *b.model);
  b.model->eval();
  if (with_speaker_head) {
    Require(b.config.ablation.components.speaker, "checkpoint was trained without a speaker head",
            ErrorCode::kConfig);
    adversarial::Heads heads(b.config.heads, b.config.ablation.components.classifier,
                             b.config.ablation.components.feature_decoders, true);
    LoadModule(ar, "heads", *heads);
    b.speaker_head = heads->speaker;
    b.speaker_head->eval();
  }
  return b;
}

}  // namespace karaoker::train
