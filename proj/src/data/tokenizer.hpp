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
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace karaoker::data {

// Grapheme mode maps each (lower-cased) character to a symbol; phoneme mode
// splits on whitespace and looks each token up in the symbol table.
struct TokenizerConfig {
  enum class Mode { kGrapheme, kPhoneme };
  Mode mode = Mode::kGrapheme;
  // Ordered symbol inventory; ids are assigned from kFirstSymbol upwards.
  std::vector<std::string> symbols;

  static TokenizerConfig DefaultGraphemes();
  // One symbol per line; blank lines and '#' comments are skipped.
  static TokenizerConfig PhonemesFromFile(const std::string& path);
};

class Tokenizer {
 public:
  static constexpr int64_t kPad = 0;
  static constexpr int64_t kUnk = 1;
  static constexpr int64_t kFirstSymbol = 2;

  Tokenizer() : Tokenizer(TokenizerConfig::DefaultGraphemes()) {}
  explicit Tokenizer(TokenizerConfig cfg);

  std::vector<int64_t> Encode(std::string_view text) const;
  int64_t vocab_size() const { return kFirstSymbol + static_cast<int64_t>(cfg_.symbols.size()); }
  const TokenizerConfig& config() const { return cfg_; }

  // Single-line form: "<mode>\t<sym>\x1f<sym>..." for embedding in manifests
  // and checkpoints.
  std::string Serialize() const;
  static Tokenizer Deserialize(const std::string& line);

 private:
  TokenizerConfig cfg_;
  std::map<std::string, int64_t, std::less<>> ids_;
};

}  // namespace karaoker::data
