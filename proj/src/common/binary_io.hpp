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

// Little-endian primitive readers/writers for the on-disk containers.
// Host byte order is assumed little-endian (checked at compile time).

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "common/error.hpp"

namespace karaoker::io {

static_assert(std::endian::native == std::endian::little,
              "container formats assume a little-endian host");

template <typename T>
void WritePod(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T ReadPod(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) Fail(ErrorCode::kFormat, "unexpected end of file");
  return value;
}

inline void WriteString(std::ostream& out, const std::string& s) {
  WritePod<uint32_t>(out, static_cast<uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string ReadString(std::istream& in, uint32_t max_len = 1u << 20) {
  const auto n = ReadPod<uint32_t>(in);
  if (n > max_len) Fail(ErrorCode::kFormat, "string field too long");
  std::string s(n, '\0');
  in.read(s.data(), n);
  if (!in) Fail(ErrorCode::kFormat, "unexpected end of file");
  return s;
}

template <typename T>
void WriteArray(std::ostream& out, const std::vector<T>& v) {
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(T)));
}

template <typename T>
std::vector<T> ReadArray(std::istream& in, size_t count) {
  std::vector<T> v(count);
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(count * sizeof(T)));
  if (!in) Fail(ErrorCode::kFormat, "unexpected end of file");
  return v;
}

inline void ExpectMagic(std::istream& in, const char (&magic)[5], const std::string& what) {
  char buf[4];
  in.read(buf, 4);
  if (!in || std::memcmp(buf, magic, 4) != 0) {
    Fail(ErrorCode::kFormat, "not a " + what + " file (bad magic)");
  }
}

// Writes to `path + ".tmp"` then renames over `path`.
void AtomicWriteFile(const std::string& path, const std::string& bytes);

// Whole file as bytes; throws kIo when unreadable.
std::string ReadFile(const std::string& path);

}  // namespace karaoker::io
