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

#include "corpus/tokenizer.hpp"

#include "corpus/utf8.hpp"

namespace measex {

namespace {

bool is_space(char32_t c) {
  return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == U'\v' ||
         c == U'\f' || c == 0x00A0;
}

bool is_digit(char32_t c) { return c >= U'0' && c <= U'9'; }

bool is_word(char32_t c) {
  if (is_space(c)) return false;
  if (c >= 0x80) return true;  // non-ASCII symbols (µ, °, ±) group with words
  return (c >= U'0' && c <= U'9') || (c >= U'a' && c <= U'z') ||
         (c >= U'A' && c <= U'Z');
}

}  // namespace

std::vector<Token> tokenize_text(const std::string& text) {
  const Utf8View view(text);
  const auto& cp = view.codepoints();
  const std::size_t n = cp.size();
  std::vector<Token> tokens;

  std::size_t i = 0;
  while (i < n) {
    if (is_space(cp[i])) {
      ++i;
      continue;
    }
    if (is_word(cp[i])) {
      std::size_t j = i + 1;
      while (j < n) {
        if (is_word(cp[j])) {
          ++j;
        } else if ((cp[j] == U'.' || cp[j] == U',') && is_digit(cp[j - 1]) &&
                   j + 1 < n && is_digit(cp[j + 1])) {
          // decimal point / thousands separator inside a number
          j += 2;
        } else {
          break;
        }
      }
      tokens.push_back({view.slice(text, i, j), {i, j}});
      i = j;
    } else {
      tokens.push_back({view.slice(text, i, i + 1), {i, i + 1}});
      ++i;
    }
  }
  return tokens;
}

std::vector<Token> tokenize(const Document& doc) { return tokenize_text(doc.text); }

TruncateResult truncate(std::vector<Token> tokens, std::size_t max_len) {
  TruncateResult r;
  if (tokens.size() > max_len) {
    tokens.resize(max_len);
    r.truncated = true;
  }
  r.tokens = std::move(tokens);
  return r;
}

}  // namespace measex
