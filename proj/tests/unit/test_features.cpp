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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <random>

#include "common/error.hpp"
#include "doctest.h"
#include "features/dsp.hpp"
#include "features/feature_cache.hpp"
#include "features/feature_set.hpp"
#include "features/mel.hpp"
#include "features/vocal_features.hpp"
#include "support/signals.hpp"

using namespace karaoker;
using namespace karaoker::features;
using namespace karaoker::testing;

namespace {

PitchConfig DefaultPitch() { return PitchConfig{}; }

double MedianOf(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Slaney mel scale written out independently of the library.
double OracleHzToMel(double hz) {
  return hz < 1000.0 ? 3.0 * hz / 200.0 : 15.0 + 27.0 * std::log(hz / 1000.0) / std::log(6.4);
}
double OracleMelToHz(double m) {
  return m < 15.0 ? 200.0 * m / 3.0 : 1000.0 * std::pow(6.4, (m - 15.0) / 27.0);
}

}  // namespace

TEST_SUITE("mel") {
  TEST_CASE("silence gives the log floor everywhere") {
    MelConfig cfg;
    const auto mel = ComputeMel(Silence(1.0), cfg);
    REQUIRE(mel.n_mels() == 80);
    const float floor_v = static_cast<float>(std::log(cfg.log_floor));
    for (float v : mel.data()) CHECK(v == floor_v);
  }

  TEST_CASE("frame count is ceil(samples / hop)") {
    MelConfig cfg;
    const auto mel = ComputeMel(Sine(440.0, 1.0), cfg);  // 22050 samples
    CHECK(mel.frames() == 87);
    Waveform w = Sine(300.0, 1.0);
    w.samples.resize(2048);
    CHECK(ComputeMel(w, cfg).frames() == 8);
    w.samples.resize(2049);
    CHECK(ComputeMel(w, cfg).frames() == 9);
  }

  TEST_CASE("440 Hz sine peaks in the band whose centre is nearest 440 Hz") {
    MelConfig cfg;
    // Independent oracle: centre frequencies of the 80 triangular filters.
    const double lo = OracleHzToMel(cfg.fmin), hi = OracleHzToMel(cfg.fmax);
    int expected = -1;
    double best = 1e9;
    for (int m = 0; m < 80; ++m) {
      const double centre = OracleMelToHz(lo + (hi - lo) * (m + 1) / 81.0);
      if (std::abs(centre - 440.0) < best) {
        best = std::abs(centre - 440.0);
        expected = m;
      }
    }
    const auto mel = ComputeMel(Sine(440.0, 1.0), cfg);
    std::vector<double> avg(80, 0.0);
    for (int m = 0; m < 80; ++m) {
      for (int t = 0; t < mel.frames(); ++t) avg[m] += mel.at(m, t);
    }
    const int argmax = static_cast<int>(std::max_element(avg.begin(), avg.end()) - avg.begin());
    CHECK(argmax == expected);
  }

  TEST_CASE("too-short audio is rejected") {
    MelConfig cfg;
    Waveform w = Sine(440.0, 0.01);
    try {
      ComputeMel(w, cfg);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kAudioTooShort);
      CHECK(std::string(e.what()) == "audio too short");
    }
  }

  TEST_CASE("mismatched sample rate is rejected") {
    MelConfig cfg;
    CHECK_THROWS_AS(ComputeMel(Sine(440.0, 1.0, 0.5, 16000), cfg), Error);
  }
}

TEST_SUITE("pitch") {
  TEST_CASE("220 Hz sine: median F0 within 1 Hz") {
    const auto f0 = ExtractF0(Sine(220.0, 0.5), DefaultPitch());
    const auto voiced = f0.voiced_values();
    REQUIRE(voiced.size() > f0.size() / 2);
    const double med = MedianOf(voiced);
    CHECK(med >= 219.0);
    CHECK(med <= 221.0);
  }

  TEST_CASE("white noise is mostly unvoiced") {
    const auto f0 = ExtractF0(WhiteNoise(1.0, 0.1, 7), DefaultPitch());
    CHECK(static_cast<double>(f0.voiced_count()) / f0.size() < 0.2);
  }

  TEST_CASE("silence is fully unvoiced with zero values") {
    const auto f0 = ExtractF0(Silence(0.5), DefaultPitch());
    CHECK(f0.voiced_count() == 0);
    for (double v : f0.values) CHECK(v == 0.0);
  }

  TEST_CASE("chirp 100 to 400 Hz gives a non-decreasing smoothed contour") {
    const auto f0 = ExtractF0(Chirp(100.0, 400.0, 2.0), DefaultPitch());
    const auto voiced = f0.voiced_values();
    REQUIRE(voiced.size() > f0.size() * 9 / 10);
    const auto smooth = MedianFilter(voiced, 5);
    for (size_t i = 1; i < smooth.size(); ++i) CHECK(smooth[i] >= smooth[i - 1]);
    CHECK(smooth.front() < 130.0);
    CHECK(smooth.back() > 370.0);
  }

  TEST_CASE("extraction is bitwise deterministic") {
    const auto w = Mix(Sine(180.0, 0.6), WhiteNoise(0.6, 0.05, 3));
    const auto a = AnalyzePeriodicity(w, DefaultPitch());
    const auto b = AnalyzePeriodicity(w, DefaultPitch());
    CHECK(a.f0.values == b.f0.values);
    CHECK(a.hnr.values == b.hnr.values);
    CHECK(a.f0.voiced == b.f0.voiced);
  }
}

TEST_SUITE("rms") {
  TEST_CASE("sine amplitude 0.5 gives A/sqrt(2) on interior frames") {
    MelConfig cfg;
    const auto rms = ExtractRms(Sine(440.0, 1.0, 0.5), cfg);
    for (size_t t = 4; t + 4 < rms.size(); ++t) CHECK(std::abs(rms.values[t] - 0.5 / std::sqrt(2.0)) < 1e-3);
    CHECK(rms.voiced_count() == rms.size());
  }

  TEST_CASE("silence gives zeros") {
    for (double v : ExtractRms(Silence(0.3), MelConfig{}).values) CHECK(v == 0.0);
  }

  TEST_CASE("doubling the amplitude exactly doubles every frame") {
    auto w = Mix(Sine(300.0, 0.5, 0.2), WhiteNoise(0.5, 0.05, 11));
    auto w2 = w;
    for (auto& s : w2.samples) s *= 2.0f;
    const auto a = ExtractRms(w, MelConfig{});
    const auto b = ExtractRms(w2, MelConfig{});
    for (size_t t = 0; t < a.size(); ++t) CHECK(b.values[t] == 2.0 * a.values[t]);
  }
}

TEST_SUITE("hnr") {
  TEST_CASE("clean sine has HNR above 30 dB") {
    const auto hnr = ExtractHnr(Sine(200.0, 0.6), DefaultPitch());
    CHECK(MedianOf(hnr.voiced_values()) > 30.0);
  }

  TEST_CASE("sine plus equal-power noise is near 0 dB") {
    const double amp = 0.5;
    const auto w = Mix(Sine(200.0, 1.0, amp), WhiteNoise(1.0, amp / std::sqrt(2.0), 21));
    const auto hnr = ExtractHnr(w, DefaultPitch());
    const auto v = hnr.voiced_values();
    REQUIRE(!v.empty());
    const double med = MedianOf(v);
    CHECK(med >= -3.0);
    CHECK(med <= 6.0);
  }

  TEST_CASE("unvoiced frames carry zero and are masked") {
    const auto hnr = ExtractHnr(Silence(0.3), DefaultPitch());
    CHECK(hnr.voiced_count() == 0);
    for (double v : hnr.values) CHECK(v == 0.0);
  }

  TEST_CASE("correlation to dB is clamped") {
    CHECK(HnrFromCorrelation(1.0) == kHnrMaxDb);
    CHECK(HnrFromCorrelation(0.0) == kHnrMinDb);
    CHECK(HnrFromCorrelation(0.5) == doctest::Approx(0.0));
    CHECK(HnrFromCorrelation(0.9) == doctest::Approx(10.0 * std::log10(9.0)));
  }
}

TEST_SUITE("cpp") {
  TEST_CASE("pulse train has CPP above 10 dB on voiced frames") {
    const auto cpp = ExtractCpp(PulseTrain(150.0, 0.6), DefaultPitch(), CepstralConfig{});
    const auto v = cpp.voiced_values();
    REQUIRE(v.size() > cpp.size() / 2);
    for (double x : v) CHECK(x > 10.0);
  }

  TEST_CASE("white noise has median CPP below 5 dB") {
    const auto noise = WhiteNoise(1.0, 0.1, 5);
    const PitchConfig pitch;
    const int win = pitch.WindowLength(noise.sample_rate);
    std::vector<double> raw, frame;
    for (long c = win; c + win < static_cast<long>(noise.samples.size()); c += 256) {
      CenteredFrame(noise.samples, c, win, frame);
      raw.push_back(CepstralPeakProminence(frame, noise.sample_rate, pitch, CepstralConfig{}));
    }
    CHECK(MedianOf(raw) < 5.0);
    // The voiced-gated track is zero almost everywhere as well.
    const auto cpp = ExtractCpp(noise, pitch, CepstralConfig{});
    std::vector<double> all(cpp.values.begin(), cpp.values.end());
    CHECK(MedianOf(all) < 5.0);
  }

  TEST_CASE("silence is zero and masked") {
    const auto cpp = ExtractCpp(Silence(0.3), DefaultPitch(), CepstralConfig{});
    CHECK(cpp.voiced_count() == 0);
    for (double v : cpp.values) CHECK(v == 0.0);
  }
}

TEST_SUITE("formants") {
  TEST_CASE("three-resonance vowel recovers F1-F3 within 10%") {
    const std::vector<double> targets = {700.0, 1220.0, 2600.0};
    const auto w = Vowel(120.0, targets, {80.0, 90.0, 120.0}, 0.8);
    const auto tracks = ExtractFormants(w, DefaultPitch(), FormantConfig{});
    for (int i = 0; i < 3; ++i) {
      const auto v = tracks[i].voiced_values();
      REQUIRE(v.size() > tracks[i].size() / 2);
      const double med = MedianOf(v);
      CHECK(std::abs(med - targets[i]) / targets[i] < 0.10);
    }
  }

  TEST_CASE("formants are ascending on every voiced frame") {
    const auto w = Vowel(150.0, {500.0, 1500.0, 2500.0, 3500.0}, {60, 80, 100, 120}, 0.5);
    const auto tracks = ExtractFormants(w, DefaultPitch(), FormantConfig{});
    for (size_t t = 0; t < tracks[0].size(); ++t) {
      for (int i = 0; i + 1 < 4; ++i) {
        if (tracks[i + 1].values[t] > 0.0) CHECK(tracks[i].values[t] <= tracks[i + 1].values[t]);
      }
    }
  }

  TEST_CASE("silence gives masked zeros") {
    const auto tracks = ExtractFormants(Silence(0.3), DefaultPitch(), FormantConfig{});
    for (const auto& tr : tracks) {
      CHECK(tr.voiced_count() == 0);
      for (double v : tr.values) CHECK(v == 0.0);
    }
  }

  TEST_CASE("white noise is mostly masked") {
    const auto tracks = ExtractFormants(WhiteNoise(1.0, 0.1, 9), DefaultPitch(), FormantConfig{});
    CHECK(static_cast<double>(tracks[0].voiced_count()) / tracks[0].size() < 0.2);
  }
}

TEST_SUITE("octave") {
  FrameTrack MakeF0(std::vector<double> v) {
    FrameTrack t;
    t.values = v;
    t.voiced.resize(v.size());
    for (size_t i = 0; i < v.size(); ++i) t.voiced[i] = v[i] > 0.0;
    return t;
  }

  TEST_CASE("C4 is octave 4") {
    const auto oct = ComputeOctave(MakeF0({261.63}));
    CHECK(std::abs(oct.values[0] - 4.0) < 0.01);
  }

  TEST_CASE("doubling F0 adds exactly one octave") {
    std::mt19937 gen(1);
    std::uniform_real_distribution<double> dist(60.0, 900.0);
    std::vector<double> f(50);
    for (auto& v : f) v = dist(gen);
    auto doubled = f;
    for (auto& v : doubled) v *= 2.0;
    const auto a = ComputeOctave(MakeF0(f));
    const auto b = ComputeOctave(MakeF0(doubled));
    for (size_t i = 0; i < f.size(); ++i) CHECK(b.values[i] - a.values[i] == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("unvoiced frames are zero") {
    const auto oct = ComputeOctave(MakeF0({0.0, 220.0, 0.0}));
    CHECK(oct.values[0] == 0.0);
    CHECK(oct.values[2] == 0.0);
    CHECK(oct.voiced[1] == 1);
  }
}

TEST_SUITE("align_to_mel") {
  FrameTrack Track(std::vector<double> v) {
    FrameTrack t;
    t.values = std::move(v);
    t.voiced.assign(t.values.size(), 1);
    return t;
  }

  TEST_CASE("identity at equal length") {
    const auto t = Track({3, 1, 4, 1, 5});
    CHECK(AlignToMel(t, 5) == t.values);
  }

  TEST_CASE("[1,2] to length 4 is [1,1,2,2]") {
    CHECK(AlignToMel(Track({1, 2}), 4) == std::vector<double>{1, 1, 2, 2});
  }

  TEST_CASE("constant input stays constant") {
    for (int len : {1, 3, 17, 40}) {
      for (double v : AlignToMel(Track(std::vector<double>(7, 2.5)), len)) CHECK(v == 2.5);
    }
  }

  TEST_CASE("empty track is an error") {
    CHECK_THROWS_AS(AlignToMel(FrameTrack{}, 4), Error);
  }
}

TEST_SUITE("normalize") {
  FeatureSet Constant(double v, int frames) {
    FeatureSet fs;
    for (auto& tr : fs.tracks) {
      tr.values.assign(static_cast<size_t>(frames), v);
      tr.voiced.assign(static_cast<size_t>(frames), 1);
    }
    return fs;
  }

  SpeakerStats Stats(double p5, double p95) {
    SpeakerStats s;
    for (auto& r : s.ranges) r = {p5, p95};
    return s;
  }

  TEST_CASE("range endpoints and midpoint") {
    const auto stats = Stats(100.0, 300.0);
    const auto at_p5 = NormalizeContours(Constant(100.0, 5), stats);
    const auto at_p95 = NormalizeContours(Constant(300.0, 5), stats);
    const auto at_mid = NormalizeContours(Constant(200.0, 5), stats);
    for (double v : at_p5.tracks[0].values) CHECK(v == 0.0);
    for (double v : at_p95.tracks[0].values) CHECK(v == 1.0);
    for (double v : at_mid.tracks[0].values) CHECK(v == 0.5);
  }

  TEST_CASE("out-of-range values clamp and unvoiced frames stay zero") {
    auto fs = Constant(1000.0, 4);
    fs.tracks[0].voiced[2] = 0;
    const auto out = NormalizeContours(fs, Stats(100.0, 300.0));
    CHECK(out.tracks[0].values[0] == kNormMax);
    CHECK(out.tracks[0].values[2] == 0.0);
    const auto low = NormalizeContours(Constant(-1000.0, 2), Stats(100.0, 300.0));
    CHECK(low.tracks[0].values[0] == kNormMin);
  }

  TEST_CASE("degenerate range gives 0.5 with a warning") {
    Diagnostics diag;
    const auto out = NormalizeContours(Constant(42.0, 3), Stats(5.0, 5.0), &diag);
    for (double v : out.tracks[3].values) CHECK(v == 0.5);
    CHECK(diag.warnings().size() == kNumFeatures);
  }

  TEST_CASE("stats of a shifted and scaled corpus give the same normalised output") {
    std::mt19937 gen(4);
    std::normal_distribution<double> dist(0.0, 1.0);
    std::vector<FeatureSet> corpus(3);
    for (auto& fs : corpus) {
      for (auto& tr : fs.tracks) {
        tr.values.resize(40);
        tr.voiced.resize(40);
        for (size_t i = 0; i < 40; ++i) {
          tr.values[i] = dist(gen);
          tr.voiced[i] = (i % 7) != 0;
        }
      }
    }
    for (const double scale : {0.5, 3.0, 250.0}) {
      const double shift = -17.0 * scale;
      auto moved = corpus;
      for (auto& fs : moved)
        for (auto& tr : fs.tracks)
          for (auto& v : tr.values) v = scale * v + shift;
      std::vector<const FeatureSet*> a, b;
      for (auto& fs : corpus) a.push_back(&fs);
      for (auto& fs : moved) b.push_back(&fs);
      const auto na = NormalizeContours(corpus[1], ComputeSpeakerStats(a));
      const auto nb = NormalizeContours(moved[1], ComputeSpeakerStats(b));
      for (int f = 0; f < kNumFeatures; ++f)
        for (size_t i = 0; i < 40; ++i)
          CHECK(na.tracks[f].values[i] == doctest::Approx(nb.tracks[f].values[i]).epsilon(1e-9));
    }
  }

  TEST_CASE("speaker stats use voiced frames only") {
    FeatureSet fs = Constant(0.0, 100);
    for (size_t i = 0; i < 100; ++i) {
      fs.tracks[0].values[i] = i < 50 ? 0.0 : 200.0 + i;
      fs.tracks[0].voiced[i] = i >= 50;
    }
    const auto stats = ComputeSpeakerStats({&fs});
    CHECK(stats.ranges[0].p5 >= 250.0);
    CHECK(stats.ranges[0].p5 <= stats.ranges[0].p95);
  }
}

TEST_SUITE("feature set and cache") {
  TEST_CASE("nine tracks aligned with the mel frame count") {
    const auto utt = AnalyzeWaveform(PseudoSpeech(180.0, 1.2, 2), FeatureConfig{});
    CHECK(utt.features.tracks.size() == 9);
    for (const auto& tr : utt.features.tracks) CHECK(static_cast<int>(tr.size()) == utt.mel.frames());
    CHECK(utt.mel.AllFinite());
    CHECK(utt.features[Feature::kF0].voiced_count() > 0);
  }

  TEST_CASE("input at another rate is resampled first") {
    auto w = Sine(220.0, 1.0, 0.5, 16000);
    const auto utt = AnalyzeWaveform(w, FeatureConfig{});
    CHECK(utt.mel.frames() == 87);
    CHECK(MedianOf(utt.features[Feature::kF0].voiced_values()) == doctest::Approx(220.0).epsilon(0.01));
  }

  TEST_CASE("cache round trip is bitwise") {
    CachedUtterance entry;
    entry.utterance_id = "utt_001";
    entry.speaker_id = "spk_a";
    entry.sample_rate = 22050;
    entry.hop_length = 256;
    entry.data = AnalyzeWaveform(PseudoSpeech(200.0, 0.8, 5), FeatureConfig{});
    const auto back = ParseFeatureCache(SerializeFeatureCache(entry));
    CHECK(back.utterance_id == entry.utterance_id);
    CHECK(back.speaker_id == entry.speaker_id);
    CHECK(back.sample_rate == 22050);
    CHECK(back.hop_length == 256);
    for (int f = 0; f < kNumFeatures; ++f) {
      CHECK(back.data.features.tracks[f].values == entry.data.features.tracks[f].values);
      CHECK(back.data.features.tracks[f].voiced == entry.data.features.tracks[f].voiced);
    }
    CHECK(back.data.mel.data() == entry.data.mel.data());
    CHECK(SerializeFeatureCache(back) == SerializeFeatureCache(entry));
  }

  TEST_CASE("corrupt cache is rejected") {
    CHECK_THROWS_AS(ParseFeatureCache("KKFX"), Error);
    std::string bytes = "KKFC";
    bytes += std::string("\x02\x00\x00\x00", 4);
    CHECK_THROWS_AS(ParseFeatureCache(bytes), Error);
  }

  TEST_CASE("wav write/read keeps 16-bit precision") {
    const auto dir = MakeTempDir("kk_wav");
    const auto path = dir + "/a.wav";
    const auto w = Sine(330.0, 0.25, 0.3);
    WriteWav(path, w);
    const auto r = ReadWav(path);
    REQUIRE(r.samples.size() == w.samples.size());
    CHECK(r.sample_rate == 22050);
    for (size_t i = 0; i < w.samples.size(); ++i) CHECK(std::abs(r.samples[i] - w.samples[i]) < 1.0 / 16384);
    std::filesystem::remove_all(dir);
  }
}
