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

#include <algorithm>
#include <cmath>

#include "corpus/utf8.hpp"
#include "metrics/metrics.hpp"
#include "netcore/rng.hpp"

using namespace measex;

TEST_CASE("overlap_f1 fixtures") {
  CHECK(overlap_f1({0, 10}, {5, 15}) == 0.5);  // P = R = 0.5
  CHECK(overlap_f1({3, 7}, {3, 7}) == 1.0);
  CHECK(overlap_f1({0, 2}, {10, 12}) == 0.0);
  CHECK(overlap_f1({10, 12}, {0, 2}) == 0.0);
}

TEST_CASE("overlap_f1 is symmetric and grows with the intersection") {
  Rng rng(5);
  for (int iter = 0; iter < 200; ++iter) {
    const std::size_t a = rng.below(50), b = a + 1 + rng.below(20);
    const std::size_t c = rng.below(50), d = c + 1 + rng.below(20);
    CHECK(overlap_f1({a, b}, {c, d}) == overlap_f1({c, d}, {a, b}));
  }
  // Fixed lengths, sliding toward full overlap.
  double prev = -1.0;
  for (std::size_t shift = 0; shift <= 10; ++shift) {
    const double v = overlap_f1({10 - shift, 20 - shift}, {0, 10});
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("align prefers the higher-overlap gold") {
  const std::vector<Span> preds = {{0, 10}};
  const std::vector<Span> golds = {{8, 12}, {0, 9}};
  const auto pairs = align_spans(preds, golds);
  REQUIRE(pairs.size() == 1);
  CHECK(pairs[0].first == 0);
  CHECK(pairs[0].second == 1);  // [0,9) overlaps far more than [8,12)
}

TEST_CASE("align is one-to-one and greedy") {
  const std::vector<Span> preds = {{0, 4}, {2, 6}};
  const std::vector<Span> golds = {{0, 4}};
  const auto pairs = align_spans(preds, golds);
  REQUIRE(pairs.size() == 1);
  CHECK(pairs[0].first == 0);  // exact match wins; second pred unmatched
}

namespace {

Annotation make_ann(const std::string& text, const std::string& id, int set,
                    AnnotKind kind, std::size_t a, std::size_t b,
                    std::optional<QuantityDetail> payload = std::nullopt) {
  Annotation ann;
  ann.annot_id = id;
  ann.annot_set = set;
  ann.kind = kind;
  ann.span = {a, b};
  ann.surface = utf8_slice(text, a, b);
  ann.payload = std::move(payload);
  return ann;
}

// Three documents exercising a half overlap, a missed qualifier, a wrong
// unit, a spurious modifier and one fully-missed document.
std::pair<Corpus, Corpus> fixture() {
  Corpus gold, pred;

  const std::string ta = "The mass of the beam was 5 kg at dawn.";
  DocEntry ga;
  ga.doc = {"A", ta};
  ga.annotations = {
      make_ann(ta, "T1", 1, AnnotKind::Quantity, 25, 29,
               QuantityDetail{"kg", {"IsApproximate"}}),
      make_ann(ta, "T2", 1, AnnotKind::MeasuredProperty, 4, 8),
      make_ann(ta, "T3", 1, AnnotKind::MeasuredEntity, 16, 20),
      make_ann(ta, "T4", 1, AnnotKind::Qualifier, 30, 37),
  };
  ga.relations = {{RelationKind::HasQuantity, "T2", "T1"},
                  {RelationKind::HasProperty, "T3", "T2"},
                  {RelationKind::Qualifies, "T4", "T1"}};
  DocEntry pa;
  pa.doc = ga.doc;
  pa.annotations = {
      make_ann(ta, "A-T1", 1, AnnotKind::Quantity, 25, 29,
               QuantityDetail{"kg", {"IsApproximate"}}),
      make_ann(ta, "A-T2", 1, AnnotKind::MeasuredProperty, 4, 8),
      make_ann(ta, "A-T3", 1, AnnotKind::MeasuredEntity, 16, 20),
  };
  pa.relations = {{RelationKind::HasQuantity, "A-T2", "A-T1"},
                  {RelationKind::HasProperty, "A-T3", "A-T2"}};

  const std::string tb = "Width reached 7 m.";
  DocEntry gb;
  gb.doc = {"B", tb};
  gb.annotations = {
      make_ann(tb, "T1", 1, AnnotKind::Quantity, 14, 17, QuantityDetail{"m", {}}),
      make_ann(tb, "T2", 1, AnnotKind::MeasuredProperty, 0, 5),
  };
  gb.relations = {{RelationKind::HasQuantity, "T2", "T1"}};
  DocEntry pb;
  pb.doc = gb.doc;
  pb.annotations = {
      make_ann(tb, "B-T1", 1, AnnotKind::Quantity, 14, 16,
               QuantityDetail{"mm", {"IsApproximate"}}),
      make_ann(tb, "B-T2", 1, AnnotKind::MeasuredProperty, 0, 5),
  };
  pb.relations = {{RelationKind::HasQuantity, "B-T2", "B-T1"}};

  const std::string tc = "Count of 12 samples.";
  DocEntry gc;
  gc.doc = {"C", tc};
  gc.annotations = {
      make_ann(tc, "T1", 1, AnnotKind::Quantity, 9, 11, QuantityDetail{"", {"IsCount"}}),
      make_ann(tc, "T2", 1, AnnotKind::MeasuredEntity, 12, 19),
  };
  gc.relations = {{RelationKind::HasQuantity, "T2", "T1"}};
  DocEntry pc;
  pc.doc = gc.doc;  // no predictions at all for C

  gold.docs = {ga, gb, gc};
  pred.docs = {pa, pb, pc};
  return {pred, gold};
}

}  // namespace

TEST_CASE("hand-computed three-document fixture") {
  const auto [pred, gold] = fixture();
  const MatchReport rep = score_corpus(pred, gold);
  const double tol = 1e-12;

  // Quantity: exact on A, [14,16) vs [14,17) on B, miss on C.
  const double b_overlap = 2.0 * (1.0 * 2.0 / 3.0) / (1.0 + 2.0 / 3.0);  // 0.8
  const double q_soft = 1.0 + b_overlap;
  const double q_p = q_soft / 2.0, q_r = q_soft / 3.0;
  const double q_f1 = 2.0 * q_p * q_r / (q_p + q_r);
  const auto& q = rep.span_kinds.at("Quantity");
  CHECK(std::fabs(q.precision - q_p) < tol);
  CHECK(std::fabs(q.recall - q_r) < tol);
  CHECK(std::fabs(q.f1 - q_f1) < tol);
  CHECK(std::fabs(q.em - 1.0 / 3.0) < tol);

  const auto& ent = rep.span_kinds.at("MeasuredEntity");
  CHECK(std::fabs(ent.precision - 1.0) < tol);
  CHECK(std::fabs(ent.recall - 0.5) < tol);
  const double ent_f1 = 2.0 * 1.0 * 0.5 / 1.5;
  CHECK(std::fabs(ent.f1 - ent_f1) < tol);

  const auto& prop = rep.span_kinds.at("MeasuredProperty");
  CHECK(prop.precision == 1.0);
  CHECK(prop.recall == 1.0);
  CHECK(prop.f1 == 1.0);
  CHECK(prop.em == 1.0);

  const auto& qual = rep.span_kinds.at("Qualifier");
  CHECK(qual.precision == 0.0);  // empty predictions score zero by convention
  CHECK(qual.recall == 0.0);
  CHECK(qual.f1 == 0.0);

  // Relations: HasQuantity 2 correct of 2 predicted, 3 gold; HasProperty
  // perfect; the Qualifies edge is missing.
  const auto& rq = rep.relation_kinds.at("HasQuantity");
  CHECK(std::fabs(rq.precision - 1.0) < tol);
  CHECK(std::fabs(rq.recall - 2.0 / 3.0) < tol);
  CHECK(std::fabs(rq.f1 - 2.0 * (2.0 / 3.0) / (1.0 + 2.0 / 3.0)) < tol);
  CHECK(rep.relation_kinds.at("HasProperty").f1 == 1.0);
  CHECK(rep.relation_kinds.at("Qualifies").f1 == 0.0);
  const auto& rall = rep.relation_kinds.at("All");
  CHECK(std::fabs(rall.precision - 1.0) < tol);
  CHECK(std::fabs(rall.recall - 0.6) < tol);
  CHECK(std::fabs(rall.f1 - 0.75) < tol);

  // Units: kg/kg matches, mm/m does not; C has no unit on either side.
  CHECK(std::fabs(rep.units.precision - 0.5) < tol);
  CHECK(std::fabs(rep.units.recall - 0.5) < tol);
  CHECK(std::fabs(rep.units.f1 - 0.5) < tol);

  // Modifiers micro: TP 1 (IsApproximate on A), FP 1 (B), FN 1 (IsCount on C).
  CHECK(std::fabs(rep.mods.precision - 0.5) < tol);
  CHECK(std::fabs(rep.mods.recall - 0.5) < tol);
  CHECK(std::fabs(rep.mods.f1 - 0.5) < tol);

  // Five-subtask averages.
  const double s3_f1 = (ent_f1 + 1.0) / 2.0;
  CHECK(std::fabs(rep.avg_precision - (q_p + 0.5 + 1.0 + 0.0 + 1.0) / 5.0) < tol);
  CHECK(std::fabs(rep.avg_recall - (q_r + 0.5 + 0.75 + 0.0 + 0.6) / 5.0) < tol);
  CHECK(std::fabs(rep.avg_f1 - (q_f1 + 0.5 + s3_f1 + 0.0 + 0.75) / 5.0) < tol);

  // EM over 8 gold spans: 3 exact on A plus B's property.
  CHECK(std::fabs(rep.em_global - 0.5) < tol);

  // Overlap F1: macro over kinds, micro over pooled spans.
  CHECK(std::fabs(rep.overlap_f1_macro - (q_f1 + ent_f1 + 1.0 + 0.0) / 4.0) < tol);
  const double micro_soft = q_soft + 1.0 + 2.0;
  const double micro_p = micro_soft / 5.0, micro_r = micro_soft / 8.0;
  CHECK(std::fabs(rep.overlap_f1_micro -
                  2.0 * micro_p * micro_r / (micro_p + micro_r)) < tol);
}

TEST_CASE("gold scored against itself is perfect everywhere") {
  const auto [pred, gold] = fixture();
  (void)pred;
  const MatchReport rep = score_corpus(gold, gold);
  for (const auto& [name, s] : rep.span_kinds) {
    CHECK(s.precision == 1.0);
    CHECK(s.recall == 1.0);
    CHECK(s.f1 == 1.0);
    CHECK(s.em == 1.0);
  }
  for (const auto& [name, s] : rep.relation_kinds) {
    CHECK(s.f1 == 1.0);
  }
  CHECK(rep.units.f1 == 1.0);
  CHECK(rep.mods.f1 == 1.0);
  CHECK(rep.avg_f1 == 1.0);
  CHECK(rep.em_global == 1.0);
  CHECK(rep.overlap_f1_macro == 1.0);
  CHECK(rep.overlap_f1_micro == 1.0);
}

TEST_CASE("empty predictions score zero precision and recall") {
  auto [pred, gold] = fixture();
  for (auto& d : pred.docs) {
    d.annotations.clear();
    d.relations.clear();
  }
  const MatchReport rep = score_corpus(pred, gold);
  CHECK(rep.span_kinds.at("Quantity").precision == 0.0);
  CHECK(rep.span_kinds.at("Quantity").recall == 0.0);
  CHECK(rep.avg_f1 == 0.0);
}

TEST_CASE("scoring is invariant to document and annotation order") {
  auto [pred, gold] = fixture();
  const auto baseline = score_corpus(pred, gold).to_json();

  std::reverse(pred.docs.begin(), pred.docs.end());
  std::reverse(gold.docs.begin(), gold.docs.end());
  for (auto& d : pred.docs) std::reverse(d.annotations.begin(), d.annotations.end());
  for (auto& d : gold.docs) {
    std::reverse(d.annotations.begin(), d.annotations.end());
    std::reverse(d.relations.begin(), d.relations.end());
  }
  CHECK(score_corpus(pred, gold).to_json() == baseline);
}

TEST_CASE("document set mismatch is rejected") {
  auto [pred, gold] = fixture();
  pred.docs.pop_back();
  CHECK_THROWS_AS(score_corpus(pred, gold), DocumentSetMismatch);
}
