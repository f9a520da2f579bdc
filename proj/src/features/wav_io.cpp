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
#include <cstring>
#include <fstream>
#include <sstream>

#include "common/binary_io.hpp"
#include "common/error.hpp"
#include "features/waveform.hpp"

namespace karaoker::features {

void Waveform::Validate() const {
  Require(sample_rate > 0, "waveform sample rate must be positive");
  for (float s : samples) {
    Require(std::isfinite(s), "waveform contains non-finite samples");
  }
}

namespace {

constexpr uint16_t kFormatPcm = 1;
constexpr uint16_t kFormatFloat = 3;
constexpr uint16_t kFormatExtensible = 0xFFFE;

}  // namespace

Waveform ReadWav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIo, "cannot open wav file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  std::istringstream s(buf.str());

  char riff[4], wave[4];
  s.read(riff, 4);
  io::ReadPod<uint32_t>(s);
  s.read(wave, 4);
  if (!s || std::memcmp(riff, "RIFF", 4) != 0 || std::memcmp(wave, "WAVE", 4) != 0) {
    Fail(ErrorCode::kFormat, "not a RIFF/WAVE file: " + path);
  }

  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  bool have_fmt = false;
  std::string data;
  while (s && data.empty()) {
    char id[4];
    s.read(id, 4);
    if (!s) break;
    const auto size = io::ReadPod<uint32_t>(s);
    if (std::memcmp(id, "fmt ", 4) == 0) {
      Require(size >= 16, "malformed fmt chunk in " + path, ErrorCode::kFormat);
      format = io::ReadPod<uint16_t>(s);
      channels = io::ReadPod<uint16_t>(s);
      rate = io::ReadPod<uint32_t>(s);
      io::ReadPod<uint32_t>(s);  // byte rate
      io::ReadPod<uint16_t>(s);  // block align
      bits = io::ReadPod<uint16_t>(s);
      uint32_t consumed = 16;
      if (format == kFormatExtensible && size >= 40) {
        io::ReadPod<uint16_t>(s);  // cb size
        io::ReadPod<uint16_t>(s);  // valid bits
        io::ReadPod<uint32_t>(s);  // channel mask
        format = io::ReadPod<uint16_t>(s);  // first two bytes of the subformat GUID
        consumed += 10;
      }
      s.seekg(size - consumed + (size & 1u), std::ios::cur);
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      data.resize(size);
      s.read(data.data(), size);
      if (static_cast<uint32_t>(s.gcount()) != size) {
        Fail(ErrorCode::kFormat, "truncated data chunk in " + path);
      }
    } else {
      s.seekg(size + (size & 1u), std::ios::cur);
    }
  }
  if (!have_fmt) Fail(ErrorCode::kFormat, "missing fmt chunk in " + path);
  if (data.empty()) Fail(ErrorCode::kFormat, "missing or empty data chunk in " + path);
  if (channels != 1) Fail(ErrorCode::kFormat, "only mono audio is supported: " + path);
  Require(rate > 0, "invalid sample rate in " + path, ErrorCode::kFormat);

  Waveform w;
  w.sample_rate = static_cast<int>(rate);
  const auto* p = reinterpret_cast<const unsigned char*>(data.data());
  if (format == kFormatPcm && bits == 16) {
    const size_t n = data.size() / 2;
    w.samples.resize(n);
    for (size_t i = 0; i < n; ++i) {
      int16_t v;
      std::memcpy(&v, p + 2 * i, 2);
      w.samples[i] = static_cast<float>(v) / 32768.0f;
    }
  } else if (format == kFormatPcm && bits == 8) {
    w.samples.resize(data.size());
    for (size_t i = 0; i < data.size(); ++i) {
      w.samples[i] = (static_cast<float>(p[i]) - 128.0f) / 128.0f;
    }
  } else if (format == kFormatPcm && bits == 24) {
    const size_t n = data.size() / 3;
    w.samples.resize(n);
    for (size_t i = 0; i < n; ++i) {
      int32_t v = (p[3 * i] << 8) | (p[3 * i + 1] << 16) | (p[3 * i + 2] << 24);
      w.samples[i] = static_cast<float>(v >> 8) / 8388608.0f;
    }
  } else if (format == kFormatPcm && bits == 32) {
    const size_t n = data.size() / 4;
    w.samples.resize(n);
    for (size_t i = 0; i < n; ++i) {
      int32_t v;
      std::memcpy(&v, p + 4 * i, 4);
      w.samples[i] = static_cast<float>(static_cast<double>(v) / 2147483648.0);
    }
  } else if (format == kFormatFloat && bits == 32) {
    const size_t n = data.size() / 4;
    w.samples.resize(n);
    std::memcpy(w.samples.data(), p, n * 4);
  } else {
    Fail(ErrorCode::kFormat, "unsupported wav encoding (format " + std::to_string(format) +
                                 ", " + std::to_string(bits) + " bits): " + path);
  }
  w.Validate();
  return w;
}

void WriteWav(const std::string& path, const Waveform& wave) {
  wave.Validate();
  std::ostringstream out;
  const uint32_t data_bytes = static_cast<uint32_t>(wave.samples.size() * 2);
  out.write("RIFF", 4);
  io::WritePod<uint32_t>(out, 36 + data_bytes);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  io::WritePod<uint32_t>(out, 16);
  io::WritePod<uint16_t>(out, kFormatPcm);
  io::WritePod<uint16_t>(out, 1);
  io::WritePod<uint32_t>(out, static_cast<uint32_t>(wave.sample_rate));
  io::WritePod<uint32_t>(out, static_cast<uint32_t>(wave.sample_rate) * 2);
  io::WritePod<uint16_t>(out, 2);
  io::WritePod<uint16_t>(out, 16);
  out.write("data", 4);
  io::WritePod<uint32_t>(out, data_bytes);
  for (float x : wave.samples) {
    const float c = std::clamp(x, -1.0f, 1.0f);
    io::WritePod<int16_t>(out, static_cast<int16_t>(std::lround(c * 32767.0f)));
  }
  io::AtomicWriteFile(path, out.str());
}

}  // namespace karaoker::features
