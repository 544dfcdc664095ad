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

#include "metrics/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

namespace measex {

double overlap_f1(const Span& pred, const Span& gold) {
  const std::size_t lo = std::max(pred.start, gold.start);
  const std::size_t hi = std::min(pred.end, gold.end);
  if (hi <= lo) return 0.0;
  const double inter = static_cast<double>(hi - lo);
  const double p = inter / static_cast<double>(pred.length());
  const double r = inter / static_cast<double>(gold.length());
  return 2.0 * p * r / (p + r);
}

std::vector<std::pair<std::size_t, std::size_t>> align_spans(
    const std::vector<Span>& preds, const std::vector<Span>& golds) {
  struct Cand {
    double overlap;
    std::size_t pred, gold;
  };
  std::vector<Cand> cands;
  for (std::size_t p = 0; p < preds.size(); ++p) {
    for (std::size_t g = 0; g < golds.size(); ++g) {
      const double o = overlap_f1(preds[p], golds[g]);
      if (o > 0.0) cands.push_back({o, p, g});
    }
  }
  std::sort(cands.begin(), cands.end(), [&](const Cand& a, const Cand& b) {
    if (a.overlap != b.overlap) return a.overlap > b.overlap;
    if (golds[a.gold].start != golds[b.gold].start) {
      return golds[a.gold].start < golds[b.gold].start;
    }
    if (preds[a.pred].start != preds[b.pred].start) {
      return preds[a.pred].start < preds[b.pred].start;
    }
    if (a.gold != b.gold) return a.gold < b.gold;
    return a.pred < b.pred;
  });
  std::vector<bool> pred_used(preds.size(), false), gold_used(golds.size(), false);
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const Cand& c : cands) {
    if (pred_used[c.pred] || gold_used[c.gold]) continue;
    pred_used[c.pred] = true;
    gold_used[c.gold] = true;
    out.emplace_back(c.pred, c.gold);
  }
  return out;
}

namespace {

// P/R with the empty-side conventions: empty preds score precision 0
// against non-empty gold; two empty sides are vacuously perfect.
void finish(KindScore& s) {
  if (s.n_pred == 0 && s.n_gold == 0) {
    s.precision = s.recall = s.f1 = s.em = 1.0;
    return;
  }
  s.precision = s.n_pred > 0 ? s.soft_tp / static_cast<double>(s.n_pred) : 0.0;
  s.recall = s.n_gold > 0 ? s.soft_tp / static_cast<double>(s.n_gold) : 0.0;
  s.f1 = (s.precision + s.recall) > 0.0
             ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
             : 0.0;
  s.em = s.n_gold > 0 ? static_cast<double>(s.exact) / static_cast<double>(s.n_gold)
                      : (s.n_pred == 0 ? 1.0 : 0.0);
}

std::vector<const Annotation*> of_kind(const DocEntry& e, AnnotKind k) {
  std::vector<const Annotation*> out;
  for (const auto& a : e.annotations) {
    if (a.kind == k) out.push_back(&a);
  }
  return out;
}

constexpr AnnotKind kSpanKinds[] = {AnnotKind::Quantity, AnnotKind::MeasuredEntity,
                                    AnnotKind::MeasuredProperty, AnnotKind::Qualifier};

}  // namespace

double span_set_overlap_f1(
    const std::vector<std::pair<std::vector<Span>, std::vector<Span>>>&
        pred_gold_per_doc) {
  KindScore s;
  for (const auto& [preds, golds] : pred_gold_per_doc) {
    s.n_pred += preds.size();
    s.n_gold += golds.size();
    for (const auto& [p, g] : align_spans(preds, golds)) {
      s.soft_tp += overlap_f1(preds[p], golds[g]);
    }
  }
  finish(s);
  return s.f1;
}

MatchReport score_corpus(const Corpus& pred, const Corpus& gold) {
  std::set<std::string> pred_ids, gold_ids;
  for (const auto& d : pred.docs) pred_ids.insert(d.doc.doc_id);
  for (const auto& d : gold.docs) gold_ids.insert(d.doc.doc_id);
  if (pred_ids != gold_ids) {
    throw DocumentSetMismatch("prediction and gold corpora cover different documents");
  }

  MatchReport rep;
  for (AnnotKind k : kSpanKinds) rep.span_kinds[to_string(k)] = KindScore{};
  for (const char* rk : {"HasQuantity", "HasProperty", "Qualifies", "All"}) {
    rep.relation_kinds[rk] = KindScore{};
  }

  for (const auto& gold_entry : gold.docs) {
    const DocEntry* pred_entry = pred.find(gold_entry.doc.doc_id);
    // pred -> gold annotation id correspondence from the span alignments
    std::map<std::string, std::string> aligned_id;
    std::vector<std::pair<const Annotation*, const Annotation*>> aligned_quantities;

    for (AnnotKind k : kSpanKinds) {
      const auto golds = of_kind(gold_entry, k);
      const auto preds = pred_entry != nullptr
                             ? of_kind(*pred_entry, k)
                             : std::vector<const Annotation*>{};
      KindScore& s = rep.span_kinds[to_string(k)];
      s.n_pred += preds.size();
      s.n_gold += golds.size();
      std::vector<Span> ps, gs;
      for (const auto* a : preds) ps.push_back(a->span);
      for (const auto* a : golds) gs.push_back(a->span);
      for (const auto& [pi, gi] : align_spans(ps, gs)) {
        s.soft_tp += overlap_f1(ps[pi], gs[gi]);
        if (ps[pi] == gs[gi]) s.exact += 1;
        aligned_id[preds[pi]->annot_id] = golds[gi]->annot_id;
        if (k == AnnotKind::Quantity) {
          aligned_quantities.emplace_back(preds[pi], golds[gi]);
        }
      }
    }

    // Relations: exact triples over aligned endpoints.
    const std::vector<Relation> no_rel;
    const std::vector<Relation>& pred_rels =
        pred_entry != nullptr ? pred_entry->relations : no_rel;
    for (const Relation& r : pred_rels) {
      rep.relation_kinds[to_string(r.kind)].n_pred += 1;
      rep.relation_kinds["All"].n_pred += 1;
      const auto src = aligned_id.find(r.source);
      const auto tgt = aligned_id.find(r.target);
      if (src == aligned_id.end() || tgt == aligned_id.end()) continue;
      const Relation want{r.kind, src->second, tgt->second};
      const bool hit = std::find(gold_entry.relations.begin(), gold_entry.relations.end(),
                                 want) != gold_entry.relations.end();
      if (hit) {
        for (const char* key : {to_string(r.kind), "All"}) {
          rep.relation_kinds[key].soft_tp += 1.0;
          rep.relation_kinds[key].exact += 1;
        }
      }
    }
    for (const Relation& r : gold_entry.relations) {
      rep.relation_kinds[to_string(r.kind)].n_gold += 1;
      rep.relation_kinds["All"].n_gold += 1;
    }

    // Units and modifiers over quantities.
    const auto unit_of = [](const Annotation* a) -> std::string {
      return a->payload.has_value() ? a->payload->unit : std::string();
    };
    const auto mods_of = [](const Annotation* a) -> std::vector<std::string> {
      return a->payload.has_value() ? a->payload->mods : std::vector<std::string>();
    };
    if (pred_entry != nullptr) {
      for (const auto& a : pred_entry->annotations) {
        if (a.kind != AnnotKind::Quantity) continue;
        if (!unit_of(&a).empty()) rep.units.n_pred += 1;
        rep.mods.n_pred += mods_of(&a).size();
      }
    }
    for (const auto& a : gold_entry.annotations) {
      if (a.kind != AnnotKind::Quantity) continue;
      if (!unit_of(&a).empty()) rep.units.n_gold += 1;
      rep.mods.n_gold += mods_of(&a).size();
    }
    for (const auto& [p, g] : aligned_quantities) {
      const std::string pu = unit_of(p), gu = unit_of(g);
      if (!pu.empty() && pu == gu) {
        rep.units.soft_tp += 1.0;
        rep.units.exact += 1;
      }
      const auto pm = mods_of(p);
      const auto gm = mods_of(g);
      for (const auto& label : pm) {
        if (std::find(gm.begin(), gm.end(), label) != gm.end()) {
          rep.mods.soft_tp += 1.0;
          rep.mods.exact += 1;
        }
      }
    }
  }

  for (auto& [name, s] : rep.span_kinds) finish(s);
  for (auto& [name, s] : rep.relation_kinds) finish(s);
  finish(rep.units);
  finish(rep.mods);

  // The five subtask rows. S2 and S3 average their two components.
  const KindScore& qty = rep.span_kinds["Quantity"];
  const KindScore& ent = rep.span_kinds["MeasuredEntity"];
  const KindScore& prop = rep.span_kinds["MeasuredProperty"];
  const KindScore& qual = rep.span_kinds["Qualifier"];
  const KindScore& rel = rep.relation_kinds["All"];
  rep.subtasks = {
      {"1-quantities", qty.precision, qty.recall, qty.f1},
      {"2-units+modifiers", (rep.units.precision + rep.mods.precision) / 2.0,
       (rep.units.recall + rep.mods.recall) / 2.0, (rep.units.f1 + rep.mods.f1) / 2.0},
      {"3-entities+properties", (ent.precision + prop.precision) / 2.0,
       (ent.recall + prop.recall) / 2.0, (ent.f1 + prop.f1) / 2.0},
      {"4-qualifiers", qual.precision, qual.recall, qual.f1},
      {"5-relations", rel.precision, rel.recall, rel.f1},
  };
  for (const auto& s : rep.subtasks) {
    rep.avg_precision += s.precision / 5.0;
    rep.avg_recall += s.recall / 5.0;
    rep.avg_f1 += s.f1 / 5.0;
  }

  KindScore pooled;
  std::size_t exact_total = 0, gold_total = 0, pred_total = 0;
  double macro = 0.0;
  for (const auto& [name, s] : rep.span_kinds) {
    macro += s.f1 / 4.0;
    pooled.n_pred += s.n_pred;
    pooled.n_gold += s.n_gold;
    pooled.soft_tp += s.soft_tp;
    exact_total += s.exact;
    gold_total += s.n_gold;
    pred_total += s.n_pred;
  }
  finish(pooled);
  rep.overlap_f1_macro = macro;
  rep.overlap_f1_micro = pooled.f1;
  rep.em_global = gold_total > 0
                      ? static_cast<double>(exact_total) / static_cast<double>(gold_total)
                      : (pred_total == 0 ? 1.0 : 0.0);
  return rep;
}

namespace {

nlohmann::json kind_json(const KindScore& s) {
  return {{"precision", s.precision}, {"recall", s.recall},     {"f1", s.f1},
          {"em", s.em},               {"n_pred", s.n_pred},     {"n_gold", s.n_gold},
          {"soft_tp", s.soft_tp},     {"exact_matches", s.exact}};
}

}  // namespace

nlohmann::json MatchReport::to_json() const {
  nlohmann::json j;
  for (const auto& [name, s] : span_kinds) j["spans"][name] = kind_json(s);
  for (const auto& [name, s] : relation_kinds) j["relations"][name] = kind_json(s);
  j["units"] = kind_json(units);
  j["modifiers"] = kind_json(mods);
  for (const auto& s : subtasks) {
    j["subtasks"][s.name] = {{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}};
  }
  j["avg_precision"] = avg_precision;
  j["avg_recall"] = avg_recall;
  j["avg_f1"] = avg_f1;
  j["em"] = em_global;
  j["overlap_f1_macro"] = overlap_f1_macro;
  j["overlap_f1_micro"] = overlap_f1_micro;
  return j;
}

std::string MatchReport::to_table() const {
  std::ostringstream os;
  char buf[160];
  os << "category                      P        R       F1       EM\n";
  const auto row = [&](const std::string& name, double p, double r, double f1,
                       double em, bool with_em) {
    if (with_em) {
      std::snprintf(buf, sizeof(buf), "%-26s%7.4f  %7.4f  %7.4f  %7.4f\n",
                    name.c_str(), p, r, f1, em);
    } else {
      std::snprintf(buf, sizeof(buf), "%-26s%7.4f  %7.4f  %7.4f        -\n",
                    name.c_str(), p, r, f1);
    }
    os << buf;
  };
  for (const auto& [name, s] : span_kinds) row(name, s.precision, s.recall, s.f1, s.em, true);
  row("Unit", units.precision, units.recall, units.f1, units.em, true);
  row("Modifiers", mods.precision, mods.recall, mods.f1, mods.em, true);
  for (const auto& [name, s] : relation_kinds) {
    row("Rel:" + name, s.precision, s.recall, s.f1, s.em, true);
  }
  os << "----\n";
  for (const auto& s : subtasks) row(s.name, s.precision, s.recall, s.f1, 0, false);
  os << "----\n";
  row("average (5 subtasks)", avg_precision, avg_recall, avg_f1, em_global, true);
  std::snprintf(buf, sizeof(buf), "overlap F1  macro %.4f  micro %.4f\n",
                overlap_f1_macro, overlap_f1_micro);
  os << buf;
  return os.str();
}

}  // namespace measex
