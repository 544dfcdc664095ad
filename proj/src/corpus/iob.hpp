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

#ifndef MEASEX_CORPUS_IOB_HPP_
#define MEASEX_CORPUS_IOB_HPP_

#include <vector>

#include "corpus/types.hpp"

namespace measex {

// Token tagged B on the first token overlapping a gold span, I on later
// overlapping tokens, O otherwise. Mid-token gold boundaries widen to the
// token (recall-preserving). Throws OverlappingGold when two gold spans
// intersect.
TagSequence spans_to_iob(const std::vector<Token>& tokens,
                         const std::vector<Span>& gold);

// Inverse: each maximal B I* run becomes one span from the first token's
// start to the last token's end. Throws InvalidIob on I-after-O or
// leading I.
std::vector<Span> iob_to_spans(const std::vector<Token>& tokens,
                               const TagSequence& tags);

bool iob_valid(const TagSequence& tags);

}  // namespace measex

#endif  // MEASEX_CORPUS_IOB_HPP_
