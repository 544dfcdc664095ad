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

#ifndef MEASEX_CORPUS_TSV_HPP_
#define MEASEX_CORPUS_TSV_HPP_

#include <map>
#include <string>

#include "corpus/types.hpp"

namespace measex {

// MeasEval-style annotation table. Columns:
//   docId  annotSet  annotType  startOffset  endOffset  annotId  text  other
// `other` is a JSON object carrying unit/mods on Quantity rows, relation
// keys (HasQuantity/HasProperty/Qualifies -> annotId or [annotIds]) and any
// unknown keys, which round-trip verbatim. Offsets count Unicode scalars.
// Document texts live in sibling `<docId>.txt` files.

// Reads annotations from a TSV; document texts are taken from `texts`
// (docId -> raw text). Validates every invariant at load.
Corpus read_tsv(const std::string& tsv_path,
                const std::map<std::string, std::string>& texts);

// Loads `<dir>/<name>` TSV plus every referenced `<dir>/<docId>.txt`.
Corpus load_corpus_dir(const std::string& dir,
                       const std::string& tsv_name = "annotations.tsv");

// Reads a predictions TSV against documents borrowed from `reference`
// (no .txt files needed next to the TSV).
Corpus read_tsv_with_reference(const std::string& tsv_path,
                               const Corpus& reference);

// Canonical emission: rows sorted by (docId, annotSet, start, annotId),
// JSON keys sorted. write_tsv writes only the table; save_corpus_dir also
// writes the .txt files.
std::string to_tsv(const Corpus& corpus);
void write_tsv(const Corpus& corpus, const std::string& tsv_path);
void save_corpus_dir(const Corpus& corpus, const std::string& dir,
                     const std::string& tsv_name = "annotations.tsv");

}  // namespace measex

#endif  // MEASEX_CORPUS_TSV_HPP_
