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

#include <doctest.h>

#include <filesystem>

#include "corpus/tokenizer.hpp"
#include "corpus/tsv.hpp"
#include "metrics/metrics.hpp"
#include "synthgen/synthgen.hpp"
#include "unitmods/unitmods.hpp"

using namespace measex;

TEST_CASE("generation is deterministic per seed") {
  GrammarSpec spec;
  spec.seed = 7;
  spec.n_docs = 20;
  const Corpus a = generate(spec);
  const Corpus b = generate(spec);
  CHECK(to_tsv(a) == to_tsv(b));
  std::string ta, tb;
  for (const auto& d : a.docs) ta += d.doc.text;
  for (const auto& d : b.docs) tb += d.doc.text;
  CHECK(ta == tb);

  spec.seed = 8;
  const Corpus c = generate(spec);
  CHECK(to_tsv(a) != to_tsv(c));
}

TEST_CASE("a single-document corpus passes every loader invariant") {
  GrammarSpec spec;
  spec.seed = 3;
  spec.n_docs = 1;
  const Corpus corpus = generate(spec);
  REQUIRE(corpus.docs.size() == 1);
  const auto dir = std::filesystem::temp_directory_path() / "measex_gen_one";
  std::filesystem::remove_all(dir);
  save_corpus_dir(corpus, dir.string());
  const Corpus loaded = load_corpus_dir(dir.string());  // validates everything
  CHECK(loaded.docs.size() == 1);
  CHECK(to_tsv(loaded) == to_tsv(corpus));
  std::filesystem::remove_all(dir);
}

TEST_CASE("generated gold scores 1.0 against itself") {
  GrammarSpec spec;
  spec.seed = 11;
  spec.n_docs = 12;
  const Corpus corpus = generate(spec);
  const MatchReport rep = score_corpus(corpus, corpus);
  CHECK(rep.avg_f1 == 1.0);
  CHECK(rep.overlap_f1_macro == 1.0);
  CHECK(rep.em_global == 1.0);
}

TEST_CASE("coverage, long documents and context units at corpus scale") {
  GrammarSpec spec;
  spec.seed = 21;
  spec.n_docs = 120;
  GenStats stats;
  const Corpus corpus = generate(spec, &stats);

  const std::size_t need = std::max<std::size_t>(1, spec.n_docs / 20);
  for (const auto& [label, count] : stats.label_counts) {
    CHECK_MESSAGE(count >= need, label, " appears ", count);
  }
  CHECK(stats.property_sentences >= need);
  CHECK(stats.direct_sentences >= need);
  for (const auto& [target, count] : stats.qualifier_targets) {
    CHECK_MESSAGE(count >= need, target, " qualified ", count);
  }

  // Roughly 4% of documents exceed 512 tokens.
  std::size_t over = 0;
  for (const auto& d : corpus.docs) {
    if (tokenize(d.doc).size() > 512) ++over;
  }
  CHECK(over == stats.long_docs);
  CHECK(over >= 2);  // 4% of 120, rounded
  CHECK(over <= 12);

  // Context-inferred units exist and really are absent from their surface.
  CHECK(stats.context_unit_quantities > 0);
  std::size_t absent = 0;
  for (const auto& d : corpus.docs) {
    for (const auto& a : d.annotations) {
      if (a.kind != AnnotKind::Quantity || !a.payload.has_value()) continue;
      if (!a.payload->unit.empty() &&
          !locate_unit(a.surface, a.payload->unit).has_value()) {
        ++absent;
      }
    }
  }
  CHECK(absent == stats.context_unit_quantities);

  // Label distribution balance: the scheduler keeps label counts within
  // +-10% of each other at this scale.
  std::size_t lo = SIZE_MAX, hi = 0;
  for (const auto& [label, count] : stats.label_counts) {
    lo = std::min(lo, count);
    hi = std::max(hi, count);
  }
  CHECK(static_cast<double>(hi - lo) <= 0.1 * static_cast<double>(hi) + 2.0);
}

TEST_CASE("generated corpora have the documented scale") {
  GrammarSpec spec;
  spec.seed = 33;
  spec.n_docs = 60;
  GenStats stats;
  generate(spec, &stats);
  CHECK(stats.avg_words_per_doc > 100.0);
  CHECK(stats.avg_words_per_doc < 260.0);
  CHECK(stats.quantities > 100);
}
