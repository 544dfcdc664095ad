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

#include "spanqa/templates.hpp"

namespace measex {

const std::vector<QuestionTemplate>& question_templates() {
  static const std::vector<QuestionTemplate> kTemplates = {
      {1, RelationKind::HasQuantity,
       "What is the measured property of the quantity ___?", 1, false,
       AnnotKind::MeasuredProperty},
      {2, RelationKind::HasProperty,
       "What is the measured entity that has the measured property ___ of the "
       "quantity ___?",
       2, true, AnnotKind::MeasuredEntity},
      {3, RelationKind::HasQuantity,
       "What is the measured entity that has the quantity ___?", 1, true,
       AnnotKind::MeasuredEntity},
      {4, RelationKind::Qualifies,
       "What is the qualifier corresponding to the quantity ___?", 1, false,
       AnnotKind::Qualifier},
      {5, RelationKind::Qualifies,
       "What is the qualifier corresponding to the measured entity ___?", 1, false,
       AnnotKind::Qualifier},
      {6, RelationKind::Qualifies,
       "What is the qualifier corresponding to the measured property ___?", 1,
       false, AnnotKind::Qualifier},
  };
  return kTemplates;
}

const QuestionTemplate& question_template(int id) {
  return question_templates().at(static_cast<std::size_t>(id - 1));
}

std::string fill_template(const QuestionTemplate& t,
                          const std::vector<std::string>& args) {
  if (args.size() != t.slots) {
    throw ArityMismatch("template " + std::to_string(t.id) + " takes " +
                        std::to_string(t.slots) + " argument(s), got " +
                        std::to_string(args.size()));
  }
  for (const auto& a : args) {
    if (a.empty()) throw ArityMismatch("empty slot argument");
  }
  std::string out = t.pattern;
  for (const auto& a : args) {
    const std::size_t pos = out.find("___");
    out.replace(pos, 3, a);
  }
  return out;
}

}  // namespace measex
