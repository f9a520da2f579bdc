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

#include "data/tokenizer.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "common/error.hpp"

namespace karaoker::data {

namespace {
constexpr char kSymbolSep = '\x1f';
}

TokenizerConfig TokenizerConfig::DefaultGraphemes() {
  TokenizerConfig cfg;
  cfg.mode = Mode::kGrapheme;
  for (char c : std::string(" abcdefghijklmnopqrstuvwxyz'.,?!-;:")) {
    cfg.symbols.emplace_back(1, c);
  }
  return cfg;
}

TokenizerConfig TokenizerConfig::PhonemesFromFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kIo, "cannot open symbol table: " + path);
  TokenizerConfig cfg;
  cfg.mode = Mode::kPhoneme;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string sym;
    if (!(ss >> sym) || sym[0] == '#') continue;
    cfg.symbols.push_back(sym);
  }
  Require(!cfg.symbols.empty(), "symbol table is empty: " + path, ErrorCode::kConfig);
  return cfg;
}

Tokenizer::Tokenizer(TokenizerConfig cfg) : cfg_(std::move(cfg)) {
  for (size_t i = 0; i < cfg_.symbols.size(); ++i) {
    const auto& s = cfg_.symbols[i];
    Require(!s.empty() && s.find(kSymbolSep) == std::string::npos && s.find('\t') == std::string::npos &&
                s.find('\n') == std::string::npos,
            "invalid tokenizer symbol", ErrorCode::kConfig);
    Require(ids_.emplace(s, kFirstSymbol + static_cast<int64_t>(i)).second,
            "duplicate tokenizer symbol: " + s, ErrorCode::kConfig);
  }
}

std::vector<int64_t> Tokenizer::Encode(std::string_view text) const {
  std::vector<int64_t> out;
  if (cfg_.mode == TokenizerConfig::Mode::kGrapheme) {
    for (char raw : text) {
      if (raw == '\n' || raw == '\r' || raw == '\t') raw = ' ';
      const char c = static_cast<char>(std::tolower(static_cast<unsigned char>(raw)));
      auto it = ids_.find(std::string_view(&c, 1));
      out.push_back(it == ids_.end() ? kUnk : it->second);
    }
    return out;
  }
  std::istringstream ss{std::string(text)};
  std::string tok;
  while (ss >> tok) {
    auto it = ids_.find(tok);
    out.push_back(it == ids_.end() ? kUnk : it->second);
  }
  return out;
}

std::string Tokenizer::Serialize() const {
  std::string out = cfg_.mode == TokenizerConfig::Mode::kGrapheme ? "grapheme" : "phoneme";
  out += '\t';
  for (size_t i = 0; i < cfg_.symbols.size(); ++i) {
    if (i) out += kSymbolSep;
    out += cfg_.symbols[i];
  }
  return out;
}

Tokenizer Tokenizer::Deserialize(const std::string& line) {
  const auto tab = line.find('\t');
  Require(tab != std::string::npos, "malformed tokenizer record", ErrorCode::kFormat);
  TokenizerConfig cfg;
  const std::string mode = line.substr(0, tab);
  if (mode == "grapheme") {
    cfg.mode = TokenizerConfig::Mode::kGrapheme;
  } else if (mode == "phoneme") {
    cfg.mode = TokenizerConfig::Mode::kPhoneme;
  } else {
    Fail(ErrorCode::kFormat, "unknown tokenizer mode: " + mode);
  }
  std::string rest = line.substr(tab + 1);
  size_t start = 0;
  while (start <= rest.size() && !rest.empty()) {
    const auto end = rest.find(kSymbolSep, start);
    cfg.symbols.push_back(rest.substr(start, end == std::string::npos ? std::string::npos : end - start));
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return Tokenizer(std::move(cfg));
}

}  // namespace karaoker::data
