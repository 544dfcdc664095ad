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

#ifndef MEASEX_CORPUS_UTF8_HPP_
#define MEASEX_CORPUS_UTF8_HPP_

#include <cstdint>
#include <string>
#include <vector>

namespace measex {

// All span offsets in this codebase count Unicode scalar values, not bytes.
// Utf8View decodes a UTF-8 string once and maps scalar indices back to the
// byte ranges slicing needs.
class Utf8View {
 public:
  // Throws corpus ParseError (see types.hpp) on malformed UTF-8.
  explicit Utf8View(const std::string& text);

  std::size_t size() const { return cps_.size(); }
  char32_t at(std::size_t i) const { return cps_[i]; }
  const std::vector<char32_t>& codepoints() const { return cps_; }

  // UTF-8 substring covering scalar range [start, end).
  std::string slice(const std::string& text, std::size_t start,
                    std::size_t end) const;

 private:
  std::vector<char32_t> cps_;
  std::vector<std::size_t> byte_offset_;  // size() + 1 entries
};

std::size_t utf8_length(const std::string& text);
std::string utf8_slice(const std::string& text, std::size_t start,
                       std::size_t end);
std::vector<char32_t> utf8_decode(const std::string& text);
std::string utf8_encode(const std::vector<char32_t>& cps);
void utf8_append(std::string& out, char32_t cp);

}  // namespace measex

#endif  // MEASEX_CORPUS_UTF8_HPP_
