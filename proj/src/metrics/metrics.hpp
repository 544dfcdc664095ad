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

#ifndef MEASEX_METRICS_METRICS_HPP_
#define MEASEX_METRICS_METRICS_HPP_

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "corpus/types.hpp"

namespace measex {

// Character-overlap F1 between two spans: P = |i|/|pred|, R = |i|/|gold|,
// harmonic mean; 0 when disjoint.
double overlap_f1(const Span& pred, const Span& gold);

// Greedy one-to-one matching by descending overlap_f1; ties broken by
// earlier gold start, then earlier pred start. Returns pairs of indices
// (pred_idx, gold_idx).
std::vector<std::pair<std::size_t, std::size_t>> align_spans(
    const std::vector<Span>& preds, const std::vector<Span>& golds);

// Corpus-level overlap F1 for one span kind (soft TP = summed pair overlap).
// Used as the per-epoch dev metric in training loops.
double span_set_overlap_f1(
    const std::vector<std::pair<std::vector<Span>, std::vector<Span>>>&
        pred_gold_per_doc);

struct KindScore {
  double precision = 0.0, recall = 0.0, f1 = 0.0, em = 0.0;
  std::size_t n_pred = 0, n_gold = 0;
  double soft_tp = 0.0;
  std::size_t exact = 0;
};

struct SubtaskScore {
  std::string name;
  double precision = 0.0, recall = 0.0, f1 = 0.0;
};

struct MatchReport {
  std::map<std::string, KindScore> span_kinds;      // 4 annotation kinds
  std::map<std::string, KindScore> relation_kinds;  // 3 kinds + "All"
  KindScore units;  // exact string match over aligned quantities
  KindScore mods;   // micro over (quantity, label) pairs
  std::vector<SubtaskScore> subtasks;  // the 5 subtask rows
  double avg_precision = 0.0, avg_recall = 0.0, avg_f1 = 0.0;  // means over subtasks
  double em_global = 0.0;          // over all gold span annotations
  double overlap_f1_macro = 0.0;   // mean of span-kind F1s (headline)
  double overlap_f1_micro = 0.0;   // pooled spans across kinds

  nlohmann::json to_json() const;
  std::string to_table() const;
};

// Scores predictions against gold over the same document set. Span kinds
// are aligned greedily and scored by overlap; relations match exactly over
// aligned endpoints; units/mods compare over aligned quantities. Throws
// DocumentSetMismatch when the document id sets differ.
MatchReport score_corpus(const Corpus& pred, const Corpus& gold);

}  // namespace measex

#endif  // MEASEX_METRICS_METRICS_HPP_
