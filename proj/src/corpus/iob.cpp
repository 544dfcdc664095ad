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

#include "corpus/iob.hpp"

#include <algorithm>

namespace measex {

TagSequence spans_to_iob(const std::vector<Token>& tokens,
                         const std::vector<Span>& gold) {
  std::vector<Span> sorted = gold;
  std::sort(sorted.begin(), sorted.end(),
            [](const Span& a, const Span& b) { return a.start < b.start; });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i - 1].overlaps(sorted[i])) {
      throw OverlappingGold("gold spans [" + std::to_string(sorted[i - 1].start) +
                            "," + std::to_string(sorted[i - 1].end) + ") and [" +
                            std::to_string(sorted[i].start) + "," +
                            std::to_string(sorted[i].end) + ") intersect");
    }
  }

  TagSequence tags(tokens.size(), Tag::O);
  // -1: outside; otherwise index into sorted of the span the previous token
  // was assigned to.
  long prev_span = -1;
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    long hit = -1;
    for (std::size_t g = 0; g < sorted.size(); ++g) {
      if (tokens[t].span.overlaps(sorted[g])) {
        hit = static_cast<long>(g);
        break;  // earliest-starting overlapping gold claims the token
      }
    }
    if (hit < 0) {
      tags[t] = Tag::O;
    } else if (hit == prev_span) {
      tags[t] = Tag::I;
    } else {
      tags[t] = Tag::B;
    }
    prev_span = hit;
  }
  return tags;
}

bool iob_valid(const TagSequence& tags) {
  for (std::size_t i = 0; i < tags.size(); ++i) {
    if (tags[i] == Tag::I && (i == 0 || tags[i - 1] == Tag::O)) return false;
  }
  return true;
}

std::vector<Span> iob_to_spans(const std::vector<Token>& tokens,
                               const TagSequence& tags) {
  if (tags.size() != tokens.size()) {
    throw InvalidIob("tag count " + std::to_string(tags.size()) +
                     " != token count " + std::to_string(tokens.size()));
  }
  if (!iob_valid(tags)) throw InvalidIob("I after O or at position 0");

  std::vector<Span> spans;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    if (tags[i] != Tag::B) continue;
    std::size_t j = i;
    while (j + 1 < tags.size() && tags[j + 1] == Tag::I) ++j;
    spans.push_back({tokens[i].span.start, tokens[j].span.end});
  }
  return spans;
}

}  // namespace measex
