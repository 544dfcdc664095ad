// Copyright 2026 The Measex Authors.
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

#ifndef MEASEX_CORPUS_TOKENIZER_HPP_
#define MEASEX_CORPUS_TOKENIZER_HPP_

#include <vector>

#include "corpus/types.hpp"

namespace measex {

// Deterministic whitespace + punctuation tokenizer. Runs of word characters
// (ASCII alphanumerics plus every scalar >= U+0080) stay together; each
// ASCII punctuation mark is its own token, except '.' and ',' flanked by
// digits, which stay inside a number ("1.5", "10,000"). No external
// vocabulary is involved.
std::vector<Token> tokenize(const Document& doc);
std::vector<Token> tokenize_text(const std::string& text);

struct TruncateResult {
  std::vector<Token> tokens;
  bool truncated = false;
};

// Keeps the first max_len tokens and flags whether anything was dropped.
TruncateResult truncate(std::vector<Token> tokens, std::size_t max_len = 512);

}  // namespace measex

#endif  // MEASEX_CORPUS_TOKENIZER_HPP_
