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

#include "train/trainer.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "common/binary_io.hpp"
#include "common/error.hpp"
#include "model/layers.hpp"

namespace karaoker::train {

namespace fs = std::filesystem;
using objectives::Term;

namespace {

torch::optim::AdamOptions AdamFor(const TrainSchedule& s) {
  return torch::optim::AdamOptions(s.lr0)
      .betas({s.adam_beta1, s.adam_beta2})
      .eps(s.adam_eps)
      .weight_decay(s.weight_decay);
}

double GlobalNorm(const std::vector<torch::Tensor>& params) {
  double sq = 0.0;
  for (const auto& p : params) {
    if (p.grad().defined()) sq += p.grad().to(torch::kFloat64).pow(2).sum().item<double>();
  }
  return std::sqrt(sq);
}

std::string FormatStep(const StepResult& r) {
  char extra[160];
  std::snprintf(extra, sizeof(extra), " lr=%.9g grad_norm=%.9g critic_loss=%.9g critic_gap=%.9g", r.lr, r.grad_norm,
                r.critic_loss, r.critic_gap);
  return r.report.Format(r.step, r.phase) + extra;
}

}  // namespace

Trainer::Trainer(TrainConfig cfg, data::Manifest manifest, std::string features_text, Diagnostics* diag)
    : cfg_(std::move(cfg)),
      manifest_(std::move(manifest)),
      features_text_(std::move(features_text)),
      diag_(diag),
      dropout_gen_(model::MakeGenerator(cfg_.schedule.seed * 2654435761ULL + 17)),
      rng_(cfg_.schedule.seed + 1),
      tracker_(cfg_.schedule) {
  Require(!manifest_.records.empty(), "training data has no utterances", ErrorCode::kNoData);
  cfg_.model.vocab_size = static_cast<int>(manifest_.tokenizer.vocab_size());
  cfg_.model.n_speakers = manifest_.speakers.size();
  cfg_.Validate();

  examples_ = data::LoadExamples(manifest_, diag_);
  iterator_ = std::make_unique<data::BatchIterator>(examples_, cfg_.schedule.batch_size, cfg_.model.r,
                                                    cfg_.schedule.seed);

  torch::manual_seed(cfg_.schedule.seed);
  const auto& c = cfg_.ablation.components;
  model_ = model::AcousticModel(cfg_.model);
  heads_ = adversarial::Heads(cfg_.heads, c.classifier, c.feature_decoders, c.speaker);
  if (c.critic) critic_ = adversarial::Critic(cfg_.heads);

  gen_opt_ = std::make_unique<torch::optim::Adam>(GeneratorParameters(), AdamFor(cfg_.schedule));
  if (critic_) critic_opt_ = std::make_unique<torch::optim::Adam>(critic_->parameters(), AdamFor(cfg_.schedule));
}

std::vector<torch::Tensor> Trainer::GeneratorParameters() const {
  auto params = model_->parameters();
  for (const auto& p : heads_->parameters()) params.push_back(p);
  return params;
}

void Trainer::SetLr(double lr) {
  for (auto* opt : {gen_opt_.get(), critic_opt_.get()}) {
    if (!opt) continue;
    for (auto& group : opt->param_groups()) static_cast<torch::optim::AdamOptions&>(group.options()).lr(lr);
  }
}

void Trainer::CriticUpdates(const data::Batch& batch, const model::AcousticOutput& out, StepResult& res) {
  const auto fake_mels = out.mel_post.detach();
  const auto& hc = cfg_.heads;
  for (int i = 0; i < hc.n_critic; ++i) {
    const auto real_s = adversarial::SampleWindows(batch.mel_lengths, rng_, hc.window_count, hc.windows);
    if (real_s.empty()) return;
    std::vector<int64_t> widths;
    for (const auto& s : real_s) widths.push_back(s.width);
    const auto fake_s = adversarial::SampleWindowsWithWidths(batch.mel_lengths, rng_, widths,
                                                              adversarial::WindowSource::kGenerated);
    const auto real_w = adversarial::CutWindows(batch.mels, real_s);
    const auto fake_w = adversarial::CutWindows(fake_mels, fake_s);
    const auto rs = critic_->Scores(real_w);
    const auto fs = critic_->Scores(fake_w);
    const auto gp = adversarial::GradientPenalty([&](const torch::Tensor& x) { return critic_->Score(x); },
                                                 real_w, fake_w, rng_);
    const auto loss = adversarial::CriticLoss(rs, fs, gp.penalty, hc.gp_lambda);
    critic_opt_->zero_grad();
    loss.backward();
    critic_opt_->step();
    res.critic_loss = loss.item<double>();
    res.critic_gap = (rs.mean() - fs.mean()).item<double>();
    res.critic_updated = true;
  }
  tracker_.monitor().Push(res.critic_gap);
}

objectives::LossTerms ComputeLossTerms(const LossContext& ctx, const data::Batch& batch,
                                       const model::AcousticOutput& out, Phase phase) {
  namespace obj = objectives;
  const TrainConfig& cfg = ctx.cfg;
  auto& heads = ctx.heads;
  auto& critic = ctx.critic;
  auto& rng = ctx.rng;
  const auto& c = cfg.ablation.components;
  const auto& hc = cfg.heads;
  const auto& mask = batch.frame_mask;
  obj::LossTerms t;
  t[Term::kMel] = obj::MelLoss(batch.mels, out.mel_dec, out.mel_post, mask);
  t[Term::kGate] = obj::GateLoss(out.gate, batch.gate_targets, batch.mel_lengths, cfg.model.r);
  t[Term::kAtt] = obj::GuidedAttentionLoss(out.alignment, batch.text_lengths, out.step_lengths,
                                           cfg.guided_attention_g, batch.textless);
  if (c.svd) t[Term::kSvd] = obj::SvdLoss(batch.mels, out.mel_post, mask, cfg.svd_k);
  if (c.mel_rate) t[Term::kMelRate] = obj::MelRateLoss(batch.mels, out.mel_dec, out.mel_post, mask);

  const int64_t s = ctx.step;
  if (c.feature_decoders && s >= cfg.decoders_start) {
    const auto targets = adversarial::FeatureDecodersImpl::Targets(batch.features);
    t[Term::kRec] = obj::ReconstructionLoss(targets, heads->feature_decoders(out.mel_dec, mask), mask,
                                            cfg.reconstruction);
  }
  if (c.classifier && s >= cfg.classifier_start) {
    const auto real_s = adversarial::SampleWindows(batch.mel_lengths, rng, hc.window_count, hc.windows);
    if (!real_s.empty()) {
      std::vector<int64_t> widths;
      for (const auto& w : real_s) widths.push_back(w.width);
      const auto fake_s = adversarial::SampleWindowsWithWidths(batch.mel_lengths, rng, widths,
                                                                adversarial::WindowSource::kGenerated);
      const auto fake_src = hc.classifier_detach_fake ? out.mel_post.detach() : out.mel_post;
      const auto p_real = heads->classifier->Probabilities(adversarial::CutWindows(batch.mels, real_s)).mean();
      const auto p_fake = heads->classifier->Probabilities(adversarial::CutWindows(fake_src, fake_s)).mean();
      t[Term::kClass] = obj::ClassificationLoss(p_real, p_fake, cfg.classifier_conventional);
    }
  }
  if (c.speaker && s >= cfg.speaker_start) {
    std::vector<int64_t> keep;
    const auto len = batch.mel_lengths.to(torch::kCPU);
    for (int64_t i = 0; i < batch.size(); ++i) {
      if (len[i].item<int64_t>() >= adversarial::kSpeakerHeadMinFrames) keep.push_back(i);
    }
    if (!keep.empty()) {
      const auto idx = torch::tensor(keep, torch::kInt64);
      const auto emb = heads->speaker(out.mel_post.index_select(0, idx), batch.mel_lengths.index_select(0, idx));
      const auto x_spk = ctx.model->speaker_embedding(batch.speaker_ids.index_select(0, idx));
      t[Term::kSpk] = obj::SpeakerLoss(x_spk, emb);
    }
  }
  if (c.critic && phase == Phase::kAdversarial) {
    const auto real_s = adversarial::SampleWindows(batch.mel_lengths, rng, hc.window_count, hc.windows);
    if (!real_s.empty()) {
      std::vector<int64_t> widths;
      for (const auto& w : real_s) widths.push_back(w.width);
      const auto fake_s = adversarial::SampleWindowsWithWidths(batch.mel_lengths, rng, widths,
                                                                adversarial::WindowSource::kGenerated);
      const auto rs = critic->Scores(adversarial::CutWindows(batch.mels, real_s)).detach();
      const auto fs = critic->Scores(adversarial::CutWindows(out.mel_post, fake_s));
      t[Term::kCritic] = adversarial::CriticFeedback(rs, fs);
    }
  }
  return t;
}

StepResult Trainer::Step() {
  StepResult res;
  res.lr = LrAt(step_, cfg_.schedule);
  SetLr(res.lr);
  res.phase = tracker_.Update(step_);

  auto batch = iterator_->Next();
  if (cfg_.textless_prob > 0.0) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int64_t i = 0; i < batch.size(); ++i) {
      if (u(rng_) < cfg_.textless_prob) batch.textless[i] = true;
    }
  }

  model_->train();
  heads_->train();
  const auto out = model_->forward(batch, &dropout_gen_);
  if (critic_ && res.phase != Phase::kPretrain) CriticUpdates(batch, out, res);

  const auto terms = ComputeLossTerms({cfg_, model_, heads_, critic_, step_, rng_}, batch, out, res.phase);
  auto total = objectives::CombineLosses(terms, res.phase);
  gen_opt_->zero_grad();
  total.total.backward();
  const auto params = GeneratorParameters();
  res.grad_norm = GlobalNorm(params);
  torch::nn::utils::clip_grad_norm_(params, cfg_.schedule.grad_clip);
  res.clipped_norm = GlobalNorm(params);
  gen_opt_->step();
  if (critic_) critic_->zero_grad();

  res.report = total.report;
  res.step = ++step_;
  return res;
}

void Trainer::Save(const std::string& path) const {
  torch::serialize::OutputArchive ar;
  CheckpointMeta meta;
  meta.step = step_;
  meta.config_text = cfg_.ToKv().Serialize();
  meta.config_hash = cfg_.Hash();
  meta.features_text = features_text_;
  meta.tokenizer = manifest_.tokenizer;
  meta.speakers = manifest_.speakers;
  WriteMeta(ar, meta);
  SaveModule(ar, "model", *model_);
  SaveModule(ar, "heads", *heads_);
  if (critic_) SaveModule(ar, "critic", *critic_);
  torch::serialize::OutputArchive g;
  gen_opt_->save(g);
  ar.write("gen_opt", g);
  if (critic_opt_) {
    torch::serialize::OutputArchive co;
    critic_opt_->save(co);
    ar.write("critic_opt", co);
  }
  WriteInt(ar, "phase", static_cast<int64_t>(tracker_.phase()));
  const auto it = iterator_->state();
  WriteInt(ar, "iter_epoch", it.epoch);
  WriteInt(ar, "iter_cursor", it.cursor);
  std::ostringstream rng;
  rng << rng_;
  WriteString(ar, "rng", rng.str());
  ar.write("dropout_gen", dropout_gen_.get_state());
  const auto& gaps = tracker_.monitor().gaps();
  ar.write("divergence_gaps",
           torch::tensor(std::vector<double>(gaps.begin(), gaps.end()), torch::kFloat64).view({-1}));
  SaveArchiveAtomic(ar, path);
}

void Trainer::Load(const std::string& path, bool force) {
  torch::serialize::InputArchive ar;
  LoadArchive(ar, path);
  const auto meta = ReadMeta(ar);
  if (meta.config_hash != cfg_.Hash() && !force) {
    Fail(ErrorCode::kConfig, "checkpoint " + path + " was written with a different configuration (hash " +
                                 meta.config_hash + ", current " + cfg_.Hash() + "); use force to override");
  }
  LoadModule(ar, "model", *model_);
  LoadModule(ar, "heads", *heads_);
  if (critic_) LoadModule(ar, "critic", *critic_);
  torch::serialize::InputArchive g;
  if (!ar.try_read("gen_opt", g)) Fail(ErrorCode::kFormat, "checkpoint is missing optimizer state");
  gen_opt_->load(g);
  if (critic_opt_) {
    torch::serialize::InputArchive co;
    if (!ar.try_read("critic_opt", co)) Fail(ErrorCode::kFormat, "checkpoint is missing critic optimizer state");
    critic_opt_->load(co);
  }
  step_ = meta.step;
  const int64_t phase = ReadInt(ar, "phase");
  Require(phase >= 0 && phase <= 2, "bad phase in checkpoint", ErrorCode::kFormat);
  tracker_.Restore(static_cast<Phase>(phase));
  iterator_->set_state({ReadInt(ar, "iter_epoch"), ReadInt(ar, "iter_cursor")});
  std::istringstream rng(ReadString(ar, "rng"));
  rng >> rng_;
  Require(!rng.fail(), "bad random state in checkpoint", ErrorCode::kFormat);
  torch::Tensor gen_state, gaps;
  ar.read("dropout_gen", gen_state);
  dropout_gen_.set_state(gen_state);
  ar.read("divergence_gaps", gaps);
  gaps = gaps.contiguous();
  tracker_.monitor().Restore(std::vector<double>(gaps.data_ptr<double>(), gaps.data_ptr<double>() + gaps.numel()));
}

TrainRunResult RunTraining(const TrainConfig& cfg, const std::string& data_dir, const TrainRunOptions& opts,
                           Diagnostics* diag) {
  Require(!opts.out_dir.empty(), "train: output directory required");
  const auto manifest = data::ReadManifest((fs::path(data_dir) / "manifest.txt").string());
  std::string features_text;
  const auto feature_path = fs::path(data_dir) / data::kFeatureConfigFile;
  if (fs::exists(feature_path)) {
    features_text = io::ReadFile(feature_path.string());
  } else {
    KvConfig kv;
    features::FeatureConfig{}.ToKv(kv);
    features_text = kv.Serialize();
    WarnTo(diag, "no " + std::string(data::kFeatureConfigFile) + " in " + data_dir + "; assuming default features");
  }

  std::error_code ec;
  fs::create_directories(opts.out_dir, ec);
  if (ec) Fail(ErrorCode::kIo, "cannot create " + opts.out_dir + ": " + ec.message());

  Trainer trainer(cfg, manifest, features_text, diag);
  trainer.config().ToKv().Save((fs::path(opts.out_dir) / "config.txt").string());
  const auto latest = (fs::path(opts.out_dir) / "latest.ckpt").string();
  if (opts.resume) {
    trainer.Load(latest, opts.force);
    LogInfo("resumed from " + latest + " at step " + std::to_string(trainer.step()));
  }

  const auto log_path = (fs::path(opts.out_dir) / "losses.log").string();
  std::ofstream log(log_path, opts.resume ? std::ios::app : std::ios::trunc);
  if (!log) Fail(ErrorCode::kIo, "cannot open " + log_path);

  TrainRunResult result;
  const int64_t total = cfg.schedule.total_steps;
  const int64_t stop = opts.max_steps > 0 ? std::min(total, trainer.step() + opts.max_steps) : total;
  while (trainer.step() < stop) {
    auto r = trainer.Step();
    if (r.step == 1 || r.step % cfg.log_every == 0 || r.step == stop) {
      log << FormatStep(r) << '\n';
      log.flush();
    }
    if (r.step % (static_cast<int64_t>(cfg.log_every) * 10) == 0) LogInfo(FormatStep(r));
    if (r.step % cfg.checkpoint_every == 0 && r.step != stop) {
      trainer.Save((fs::path(opts.out_dir) / ("step_" + std::to_string(r.step) + ".ckpt")).string());
      trainer.Save(latest);
    }
    result.history.push_back(std::move(r));
  }
  result.final_checkpoint = (fs::path(opts.out_dir) / "final.ckpt").string();
  trainer.Save(result.final_checkpoint);
  trainer.Save(latest);
  return result;
}

}  // namespace karaoker::train
