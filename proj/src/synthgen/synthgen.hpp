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

#ifndef MEASEX_SYNTHGEN_SYNTHGEN_HPP_
#define MEASEX_SYNTHGEN_SYNTHGEN_HPP_

#include <cstdint>
#include <map>
#include <string>

#include <json.hpp>

#include "corpus/types.hpp"

namespace measex {

struct InfeasibleSpec : std::runtime_error {
  explicit InfeasibleSpec(const std::string& what)
      : std::runtime_error("InfeasibleSpec: " + what) {}
};

// Grammar-driven corpus with planted quantities, units, modifiers,
// entities, properties, qualifiers, and relations. Deterministic per seed.
struct GrammarSpec {
  std::uint64_t seed = 7;
  std::size_t n_docs = 20;
  double long_doc_frac = 0.04;   // documents built to exceed 512 tokens
  double area_frac = 0.03;       // "A m x B m" quantities whose unit (m^2)
                                 // is not a substring of the surface
  double qualifier_frac = 0.55;  // measurement sentences carrying a qualifier
  std::string doc_prefix = "synth";
};

struct GenStats {
  std::map<std::string, std::size_t> label_counts;
  std::size_t property_sentences = 0, direct_sentences = 0;
  std::map<std::string, std::size_t> qualifier_targets;  // Quantity/Entity/Property
  std::size_t long_docs = 0;
  std::size_t quantities = 0;
  std::size_t context_unit_quantities = 0;  // unit not in surface
  double avg_words_per_doc = 0.0;
  std::size_t required_per_bucket = 0;

  nlohmann::json to_json() const;
};

// Every modifier label and sentence form appears at least
// max(1, n_docs / 20) times; violations raise InfeasibleSpec.
Corpus generate(const GrammarSpec& spec, GenStats* stats = nullptr);

}  // namespace measex

#endif  // MEASEX_SYNTHGEN_SYNTHGEN_HPP_
