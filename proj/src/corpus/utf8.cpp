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

#include "corpus/utf8.hpp"

#include "corpus/types.hpp"

namespace measex {

namespace {

// Decodes one scalar at byte position i; advances i. Throws on malformed
// input (bad continuation bytes, overlong forms are not policed).
char32_t decode_one(const std::string& s, std::size_t& i) {
  const auto byte = [&](std::size_t k) -> unsigned char {
    if (k >= s.size()) throw ParseError("truncated UTF-8 sequence");
    return static_cast<unsigned char>(s[k]);
  };
  const unsigned char b0 = byte(i);
  if (b0 < 0x80) {
    i += 1;
    return b0;
  }
  const auto cont = [&](std::size_t k) -> char32_t {
    const unsigned char b = byte(k);
    if ((b & 0xC0) != 0x80) throw ParseError("invalid UTF-8 continuation byte");
    return b & 0x3F;
  };
  if ((b0 & 0xE0) == 0xC0) {
    const char32_t cp = ((b0 & 0x1Fu) << 6) | cont(i + 1);
    i += 2;
    return cp;
  }
  if ((b0 & 0xF0) == 0xE0) {
    const char32_t cp = ((b0 & 0x0Fu) << 12) | (cont(i + 1) << 6) | cont(i + 2);
    i += 3;
    return cp;
  }
  if ((b0 & 0xF8) == 0xF0) {
    const char32_t cp = ((b0 & 0x07u) << 18) | (cont(i + 1) << 12) |
                        (cont(i + 2) << 6) | cont(i + 3);
    i += 4;
    return cp;
  }
  throw ParseError("invalid UTF-8 lead byte");
}

}  // namespace

Utf8View::Utf8View(const std::string& text) {
  std::size_t i = 0;
  byte_offset_.push_back(0);
  while (i < text.size()) {
    cps_.push_back(decode_one(text, i));
    byte_offset_.push_back(i);
  }
}

std::string Utf8View::slice(const std::string& text, std::size_t start,
                            std::size_t end) const {
  if (start > end || end > cps_.size()) {
    throw OffsetOutOfRange("slice [" + std::to_string(start) + "," +
                           std::to_string(end) + ") of " +
                           std::to_string(cps_.size()) + " scalars");
  }
  return text.substr(byte_offset_[start], byte_offset_[end] - byte_offset_[start]);
}

std::size_t utf8_length(const std::string& text) {
  return Utf8View(text).size();
}

std::string utf8_slice(const std::string& text, std::size_t start,
                       std::size_t end) {
  return Utf8View(text).slice(text, start, end);
}

std::vector<char32_t> utf8_decode(const std::string& text) {
  return Utf8View(text).codepoints();
}

void utf8_append(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

std::string utf8_encode(const std::vector<char32_t>& cps) {
  std::string out;
  out.reserve(cps.size());
  for (char32_t cp : cps) utf8_append(out, cp);
  return out;
}

}  // namespace measex
