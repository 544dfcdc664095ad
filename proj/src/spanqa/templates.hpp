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

#ifndef MEASEX_SPANQA_TEMPLATES_HPP_
#define MEASEX_SPANQA_TEMPLATES_HPP_

#include <stdexcept>
#include <string>
#include <vector>

#include "corpus/types.hpp"

namespace measex {

struct ArityMismatch : std::runtime_error {
  explicit ArityMismatch(const std::string& what)
      : std::runtime_error("ArityMismatch: " + what) {}
};

// One of the six relation-typed question patterns; `___` marks slots.
struct QuestionTemplate {
  int id = 0;                 // 1..6
  RelationKind relation = RelationKind::HasQuantity;
  std::string pattern;
  std::size_t slots = 1;
  // Answers to templates 1 and 4-6 may be absent; measured-entity
  // questions (2, 3) always have an answer.
  bool answer_required = false;
  AnnotKind answer_kind = AnnotKind::MeasuredProperty;
};

const std::vector<QuestionTemplate>& question_templates();
const QuestionTemplate& question_template(int id);

// Replaces the slots in order. Throws ArityMismatch unless args.size()
// matches the slot count (empty args are rejected too).
std::string fill_template(const QuestionTemplate& t,
                          const std::vector<std::string>& args);

}  // namespace measex

#endif  // MEASEX_SPANQA_TEMPLATES_HPP_
