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

#include "spanqa/spanqa.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>

#include "corpus/utf8.hpp"
#include "kernels/kernels.hpp"
#include "metrics/metrics.hpp"
#include "netcore/checkpoint.hpp"

namespace measex {

namespace {
constexpr double kAlwaysAnswer = -1e300;

std::set<std::string> normalized_set(const std::vector<Token>& tokens) {
  std::set<std::string> out;
  for (const auto& t : tokens) out.insert(Vocab::normalize(t.surface));
  return out;
}
}  // namespace

// ---------------------------------------------------------------------------
// best_span

namespace {

struct ScoredSpan {
  std::size_t i = 0, j = 0;
  double sum = 0.0;
};

ScoredSpan best_passage_span(const std::vector<double>& start_logits,
                             const std::vector<double>& end_logits,
                             std::size_t passage_begin, std::size_t passage_end,
                             std::size_t max_answer_len) {
  ScoredSpan best;
  bool found = false;
  for (std::size_t i = passage_begin; i < passage_end; ++i) {
    const std::size_t j_cap = std::min(passage_end, i + max_answer_len);
    for (std::size_t j = i; j < j_cap; ++j) {
      const double s = start_logits[i] + end_logits[j];
      if (!found || s > best.sum) {  // strict: ties keep smaller (i, j)
        best = {i, j, s};
        found = true;
      }
    }
  }
  return best;
}

}  // namespace

std::optional<std::pair<std::size_t, std::size_t>> best_span(
    const std::vector<double>& start_logits, const std::vector<double>& end_logits,
    std::size_t passage_begin, std::size_t passage_end, double s_null, double tau,
    bool answer_required, std::size_t max_answer_len) {
  const ScoredSpan best = best_passage_span(start_logits, end_logits,
                                            passage_begin, passage_end,
                                            max_answer_len);
  if (!answer_required && s_null + tau > best.sum) return std::nullopt;
  return std::make_pair(best.i, best.j);
}

// ---------------------------------------------------------------------------
// Instance construction

QaInstance build_qa_instance(const QuestionTemplate& t,
                             const std::vector<std::string>& args,
                             const std::string& doc_id,
                             const std::vector<Token>& doc_tokens,
                             std::size_t max_len) {
  QaInstance inst;
  inst.template_id = t.id;
  inst.args = args;
  inst.doc_id = doc_id;
  inst.answer_required = t.answer_required;

  const std::string question = fill_template(t, args);
  const std::vector<Token> q_tokens = tokenize_text(question);
  if (q_tokens.size() + 4 > max_len) {
    throw DimensionMismatch("question leaves no room for the passage");
  }
  const std::size_t budget = max_len - 3 - q_tokens.size();
  auto kept = truncate(doc_tokens, budget);
  inst.passage_tokens = std::move(kept.tokens);
  inst.passage_truncated = kept.truncated;

  std::set<std::string> q_set = normalized_set(q_tokens);
  std::set<std::string> arg_set;
  for (const auto& a : args) {
    for (const auto& tok : tokenize_text(a)) arg_set.insert(Vocab::normalize(tok.surface));
  }

  inst.enc_tokens.reserve(inst.passage_tokens.size() + q_tokens.size() + 3);
  inst.enc_tokens.push_back({"<null>", kSegNull, 0.0, 0.0});
  inst.enc_tokens.push_back({"<q>", kSegQuestion, 0.0, 0.0});
  for (const auto& tok : q_tokens) {
    inst.enc_tokens.push_back({tok.surface, kSegQuestion, 0.0, 0.0});
  }
  inst.enc_tokens.push_back({"<sep>", kSegSep, 0.0, 0.0});
  inst.passage_begin = inst.enc_tokens.size();
  for (const auto& tok : inst.passage_tokens) {
    const std::string key = Vocab::normalize(tok.surface);
    inst.enc_tokens.push_back({tok.surface, kSegPassage,
                               q_set.count(key) ? 1.0 : 0.0,
                               arg_set.count(key) ? 1.0 : 0.0});
  }
  return inst;
}

// ---------------------------------------------------------------------------
// Model

QaModel::QaModel(const SpanQaConfig& cfg,
                 const std::vector<std::vector<std::string>>& train_streams,
                 std::uint64_t seed)
    : cfg_(cfg) {
  if (cfg_.encoder.kind == EncoderKind::Precomputed) {
    throw DimensionMismatch(
        "the QA stage requires a trainable encoder: questions are built at "
        "runtime and cannot come from per-document embedding files");
  }
  std::vector<std::vector<std::string>> streams = train_streams;
  streams.push_back({"<null>", "<q>", "<sep>"});
  for (const auto& t : question_templates()) {
    std::string p = t.pattern;
    std::size_t pos;
    while ((pos = p.find("___")) != std::string::npos) p.replace(pos, 3, " ");
    std::vector<std::string> words;
    for (const auto& tok : tokenize_text(p)) words.push_back(tok.surface);
    streams.push_back(std::move(words));
  }
  Rng rng(Rng::mix(seed, 0x9a));
  encoder_ = std::make_unique<TrainableEncoder>(cfg_.encoder, streams, rng, "enc");
  start_vec_ = ParamTensor("scorer/S", {encoder_->out_dim()});
  end_vec_ = ParamTensor("scorer/E", {encoder_->out_dim()});
  start_vec_.init_uniform(rng, encoder_->out_dim());
  end_vec_.init_uniform(rng, encoder_->out_dim());
}

QaModel::QaModel(const std::string& checkpoint_path) {
  std::ifstream is(checkpoint_path + ".json");
  if (!is) throw CheckpointError("missing sidecar: " + checkpoint_path + ".json");
  const nlohmann::json side = nlohmann::json::parse(is);
  cfg_.encoder = EncoderConfig::from_json(side.at("encoder_config"));
  cfg_.max_len = side.at("max_len").get<std::size_t>();
  cfg_.max_answer_len = side.at("max_answer_len").get<std::size_t>();
  cfg_.tau = side.at("tau").get<double>();
  encoder_ = std::make_unique<TrainableEncoder>(cfg_.encoder, side.at("encoder_sidecar"), "enc");
  start_vec_ = ParamTensor("scorer/S", {encoder_->out_dim()});
  end_vec_ = ParamTensor("scorer/E", {encoder_->out_dim()});
  std::vector<ParamTensor*> params;
  collect(params);
  load_checkpoint(checkpoint_path, params);
}

void QaModel::collect(std::vector<ParamTensor*>& out) {
  encoder_->collect(out);
  out.push_back(&start_vec_);
  out.push_back(&end_vec_);
}

void QaModel::save(const std::string& checkpoint_path) const {
  auto* self = const_cast<QaModel*>(this);
  std::vector<ParamTensor*> params;
  self->collect(params);
  std::vector<const ParamTensor*> cparams(params.begin(), params.end());
  save_checkpoint(checkpoint_path, cparams);

  nlohmann::json side;
  side["encoder_config"] = cfg_.encoder.to_json();
  side["encoder_sidecar"] = encoder_->sidecar();
  side["max_len"] = cfg_.max_len;
  side["max_answer_len"] = cfg_.max_answer_len;
  side["tau"] = cfg_.tau;
  std::ofstream os(checkpoint_path + ".json", std::ios::trunc);
  os << side.dump(2) << '\n';
}

SpanScores score_spans(const Matrix& encoded, const std::vector<double>& start_vec,
                       const std::vector<double>& end_vec) {
  if (encoded.cols != start_vec.size() || encoded.cols != end_vec.size()) {
    throw DimensionMismatch("score_spans: vector dim != encoder dim");
  }
  if (encoded.rows == 0) throw EmptySequence();
  const auto& k = kernels::active();
  SpanScores s;
  const std::size_t n = encoded.rows;
  s.start_logits.resize(n);
  s.end_logits.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.start_logits[i] = k.dot(encoded.row(i), start_vec.data(), encoded.cols);
    s.end_logits[i] = k.dot(encoded.row(i), end_vec.data(), encoded.cols);
  }
  const double lz_s = log_sum_exp(s.start_logits.data(), n);
  const double lz_e = log_sum_exp(s.end_logits.data(), n);
  s.start_probs.resize(n);
  s.end_probs.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.start_probs[i] = std::exp(s.start_logits[i] - lz_s);
    s.end_probs[i] = std::exp(s.end_logits[i] - lz_e);
  }
  s.s_null = s.start_logits[0] + s.end_logits[0];
  return s;
}

SpanScores QaModel::score(const QaInstance& inst) const {
  const EncInput input{inst.doc_id, inst.enc_tokens};
  const Matrix T = encoder_->forward(input, nullptr);
  return score_spans(T, start_vec_.value, end_vec_.value);
}

SpanDecision QaModel::decide(const QaInstance& inst, double tau) const {
  const SpanScores s = score(inst);
  const ScoredSpan best = best_passage_span(s.start_logits, s.end_logits,
                                            inst.passage_begin,
                                            inst.enc_tokens.size(),
                                            cfg_.max_answer_len);
  SpanDecision d;
  d.best_sum = best.sum;
  d.s_null = s.s_null;
  d.answered = inst.answer_required || !(s.s_null + tau > best.sum);
  if (d.answered) {
    d.start_tok = best.i;
    d.end_tok = best.j;
    const Token& ts = inst.passage_tokens[best.i - inst.passage_begin];
    const Token& te = inst.passage_tokens[best.j - inst.passage_begin];
    d.char_span = {ts.span.start, te.span.end};
  }
  return d;
}

double QaModel::train_instance(const QaInstance& inst) {
  const EncInput input{inst.doc_id, inst.enc_tokens};
  std::unique_ptr<EncoderCtx> ctx;
  const Matrix T = encoder_->forward(input, &ctx);
  const auto& k = kernels::active();
  const std::size_t n = T.rows, d = T.cols;

  std::vector<double> start_logits(n), end_logits(n);
  for (std::size_t i = 0; i < n; ++i) {
    start_logits[i] = k.dot(T.row(i), start_vec_.value.data(), d);
    end_logits[i] = k.dot(T.row(i), end_vec_.value.data(), d);
  }
  const std::size_t ts = inst.target_start.value_or(0);
  const std::size_t te = inst.target_end.value_or(0);
  std::vector<double> dstart(n), dend(n);
  double loss = softmax_xent(start_logits.data(), n, ts, dstart.data());
  loss += softmax_xent(end_logits.data(), n, te, dend.data());

  Matrix dT(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    k.axpy(dT.row(i), dstart[i], start_vec_.value.data(), d);
    k.axpy(dT.row(i), dend[i], end_vec_.value.data(), d);
    k.axpy(start_vec_.grad.data(), dstart[i], T.row(i), d);
    k.axpy(end_vec_.grad.data(), dend[i], T.row(i), d);
  }
  encoder_->backward(input, *ctx, dT);
  return loss;
}

// ---------------------------------------------------------------------------
// Multi-turn protocol

std::vector<QuantityChain> precompute_chains(
    const QaModel& model, const Document& doc,
    const std::vector<Token>& doc_tokens,
    const std::vector<QuantityInput>& quantities) {
  const std::size_t max_len = model.config().max_len;
  const Utf8View view(doc.text);
  const auto surface_of = [&](const SpanDecision& d) {
    return view.slice(doc.text, d.char_span.start, d.char_span.end);
  };
  const auto ask = [&](int tmpl, const std::vector<std::string>& args) {
    const QaInstance inst = build_qa_instance(question_template(tmpl), args,
                                              doc.doc_id, doc_tokens, max_len);
    return model.decide(inst, kAlwaysAnswer);
  };

  std::vector<QuantityChain> chains;
  chains.reserve(quantities.size());
  for (const auto& q : quantities) {
    QuantityChain c;
    c.q1 = ask(1, {q.surface});
    const std::string prop_surface = surface_of(c.q1);
    c.has_q2 = c.has_q6 = !prop_surface.empty();
    if (c.has_q2) {
      c.q2 = ask(2, {prop_surface, q.surface});
      c.q5_with_property = ask(5, {surface_of(c.q2)});
      c.q6 = ask(6, {prop_surface});
    }
    c.q3 = ask(3, {q.surface});
    c.q5_direct = ask(5, {surface_of(c.q3)});
    c.q4 = ask(4, {q.surface});
    chains.push_back(std::move(c));
  }
  return chains;
}

namespace {

nlohmann::json question_debug(int tmpl, const std::vector<std::string>& args,
                              const SpanDecision& d, double tau, bool used) {
  const bool required = question_template(tmpl).answer_required;
  return {{"template", tmpl},
          {"args", args},
          {"question", fill_template(question_template(tmpl), args)},
          {"best_sum", d.best_sum},
          {"s_null", d.s_null},
          {"gap", d.best_sum - d.s_null},
          {"tau", tau},
          {"answered", used && (required || d.best_sum - d.s_null >= tau)},
          {"used", used},
          {"span", {d.char_span.start, d.char_span.end}}};
}

}  // namespace

DocEntry assemble_graph(const Document& doc,
                        const std::vector<QuantityInput>& quantities,
                        const std::vector<QuantityChain>& chains, double tau,
                        nlohmann::json* debug) {
  DocEntry entry;
  entry.doc = doc;
  const Utf8View view(doc.text);
  int next_id = 1;
  const auto new_id = [&]() { return doc.doc_id + "-T" + std::to_string(next_id++); };
  const auto add = [&](AnnotKind kind, const Span& span, int set,
                       std::optional<QuantityDetail> payload) -> std::string {
    Annotation a;
    a.annot_id = new_id();
    a.annot_set = set;
    a.kind = kind;
    a.span = span;
    a.surface = view.slice(doc.text, span.start, span.end);
    a.payload = std::move(payload);
    entry.annotations.push_back(std::move(a));
    return entry.annotations.back().annot_id;
  };

  nlohmann::json debug_questions = nlohmann::json::array();
  for (std::size_t k = 0; k < quantities.size(); ++k) {
    const QuantityInput& q = quantities[k];
    const QuantityChain& c = chains[k];
    const int set = static_cast<int>(k) + 1;
    const std::string qid = add(AnnotKind::Quantity, q.span, set, q.payload);

    const auto answered = [&](const SpanDecision& d) {
      return d.best_sum - d.s_null >= tau;
    };
    const bool use_property = c.has_q2 && answered(c.q1);

    std::string eid, pid;
    if (use_property) {
      pid = add(AnnotKind::MeasuredProperty, c.q1.char_span, set, std::nullopt);
      entry.relations.push_back({RelationKind::HasQuantity, pid, qid});
      eid = add(AnnotKind::MeasuredEntity, c.q2.char_span, set, std::nullopt);
      entry.relations.push_back({RelationKind::HasProperty, eid, pid});
    } else {
      eid = add(AnnotKind::MeasuredEntity, c.q3.char_span, set, std::nullopt);
      entry.relations.push_back({RelationKind::HasQuantity, eid, qid});
    }

    // Qualifier turns; identical spans within this annotation set merge.
    std::map<std::pair<std::size_t, std::size_t>, std::string> qual_ids;
    const auto attach = [&](const SpanDecision& d, const std::string& target) {
      if (!answered(d)) return;
      const auto key = std::make_pair(d.char_span.start, d.char_span.end);
      auto it = qual_ids.find(key);
      if (it == qual_ids.end()) {
        it = qual_ids.emplace(key, add(AnnotKind::Qualifier, d.char_span, set,
                                       std::nullopt)).first;
      }
      const Relation rel{RelationKind::Qualifies, it->second, target};
      if (std::find(entry.relations.begin(), entry.relations.end(), rel) ==
          entry.relations.end()) {
        entry.relations.push_back(rel);
      }
    };
    attach(c.q4, qid);
    attach(use_property ? c.q5_with_property : c.q5_direct, eid);
    if (use_property) attach(c.q6, pid);

    if (debug != nullptr) {
      debug_questions.push_back(question_debug(1, {q.surface}, c.q1, tau, true));
      if (c.has_q2) {
        debug_questions.push_back(question_debug(
            2, {view.slice(doc.text, c.q1.char_span.start, c.q1.char_span.end), q.surface},
            c.q2, tau, use_property));
      }
      debug_questions.push_back(question_debug(3, {q.surface}, c.q3, tau, !use_property));
      debug_questions.push_back(question_debug(4, {q.surface}, c.q4, tau, true));
      const SpanDecision& q5 = use_property ? c.q5_with_property : c.q5_direct;
      const Span& espan = use_property ? c.q2.char_span : c.q3.char_span;
      debug_questions.push_back(question_debug(
          5, {view.slice(doc.text, espan.start, espan.end)}, q5, tau, true));
      if (c.has_q6) {
        debug_questions.push_back(question_debug(
            6, {view.slice(doc.text, c.q1.char_span.start, c.q1.char_span.end)}, c.q6,
            tau, use_property));
      }
    }
  }
  if (debug != nullptr) (*debug)["questions"] = std::move(debug_questions);
  return entry;
}

DocEntry multi_turn(const QaModel& model, const Document& doc,
                    const std::vector<QuantityInput>& quantities,
                    nlohmann::json* debug) {
  const std::vector<Token> doc_tokens = tokenize(doc);
  const auto chains = precompute_chains(model, doc, doc_tokens, quantities);
  DocEntry entry = assemble_graph(doc, quantities, chains, model.tau(), debug);
  validate_relation_graph(entry);
  return entry;
}

void validate_relation_graph(const DocEntry& entry) {
  validate_entry(entry);
  std::map<std::string, AnnotKind> kind_of;
  std::map<std::string, std::vector<const Relation*>> out_edges;
  for (const auto& a : entry.annotations) kind_of[a.annot_id] = a.kind;
  for (const auto& r : entry.relations) out_edges[r.source].push_back(&r);

  for (const auto& a : entry.annotations) {
    const auto& outs = out_edges[a.annot_id];
    switch (a.kind) {
      case AnnotKind::MeasuredProperty:
        if (outs.size() != 1 || outs[0]->kind != RelationKind::HasQuantity) {
          throw ParseError("property " + a.annot_id +
                           " must have exactly one HasQuantity edge");
        }
        break;
      case AnnotKind::MeasuredEntity:
        if (outs.size() != 1 || (outs[0]->kind != RelationKind::HasProperty &&
                                 outs[0]->kind != RelationKind::HasQuantity)) {
          throw ParseError("entity " + a.annot_id + " must have exactly one out-edge");
        }
        break;
      case AnnotKind::Qualifier:
        if (outs.empty()) {
          throw ParseError("qualifier " + a.annot_id + " has no Qualifies edge");
        }
        for (const auto* r : outs) {
          if (r->kind != RelationKind::Qualifies) {
            throw ParseError("qualifier " + a.annot_id + " has a non-Qualifies edge");
          }
        }
        break;
      case AnnotKind::Quantity:
        if (!outs.empty()) {
          throw ParseError("quantity " + a.annot_id + " must not have out-edges");
        }
        break;
    }
  }

  // Cycle check over the directed relation graph.
  std::map<std::string, int> state;  // 0 fresh, 1 active, 2 done
  const std::function<void(const std::string&)> dfs = [&](const std::string& id) {
    state[id] = 1;
    for (const auto* r : out_edges[id]) {
      if (state[r->target] == 1) throw ParseError("relation cycle at " + r->target);
      if (state[r->target] == 0) dfs(r->target);
    }
    state[id] = 2;
  };
  for (const auto& a : entry.annotations) {
    if (state[a.annot_id] == 0) dfs(a.annot_id);
  }
}

// ---------------------------------------------------------------------------
// Training instances

namespace {

// Token-index targets for a gold char span within the instance, outward
// snapped. nullopt when the span is not inside the (possibly truncated)
// passage.
std::optional<std::pair<std::size_t, std::size_t>> locate_answer(
    const QaInstance& inst, const Span& gold) {
  std::optional<std::size_t> first, last;
  for (std::size_t i = 0; i < inst.passage_tokens.size(); ++i) {
    if (inst.passage_tokens[i].span.overlaps(gold)) {
      if (!first.has_value()) first = i;
      last = i;
    }
  }
  if (!first.has_value()) return std::nullopt;
  return std::make_pair(inst.passage_begin + *first, inst.passage_begin + *last);
}

const Annotation* find_ann(const DocEntry& e, const std::string& id) {
  for (const auto& a : e.annotations) {
    if (a.annot_id == id) return &a;
  }
  return nullptr;
}

// Gold sources pointing at `target_id` with the given relation kind.
std::vector<const Annotation*> sources_of(const DocEntry& e, RelationKind kind,
                                          const std::string& target_id) {
  std::vector<const Annotation*> out;
  for (const auto& r : e.relations) {
    if (r.kind == kind && r.target == target_id) {
      if (const Annotation* a = find_ann(e, r.source)) out.push_back(a);
    }
  }
  return out;
}

const Annotation* nearest_to(std::vector<const Annotation*> cands,
                             std::size_t anchor) {
  if (cands.empty()) return nullptr;
  std::sort(cands.begin(), cands.end(), [&](const Annotation* a, const Annotation* b) {
    const auto da = a->span.start > anchor ? a->span.start - anchor : anchor - a->span.start;
    const auto db = b->span.start > anchor ? b->span.start - anchor : anchor - b->span.start;
    if (da != db) return da < db;
    return a->span.start < b->span.start;
  });
  return cands[0];
}

}  // namespace

std::vector<QaInstance> make_training_instances(const Corpus& corpus,
                                                const std::vector<std::size_t>& docs,
                                                std::size_t max_len) {
  std::vector<QaInstance> out;
  for (std::size_t di : docs) {
    const DocEntry& entry = corpus.docs[di];
    const std::vector<Token> doc_tokens = tokenize(entry.doc);
    if (doc_tokens.empty()) continue;

    std::vector<const Annotation*> quantities;
    for (const auto& a : entry.annotations) {
      if (a.kind == AnnotKind::Quantity) quantities.push_back(&a);
    }
    std::sort(quantities.begin(), quantities.end(),
              [](const Annotation* a, const Annotation* b) {
                return a->span.start < b->span.start;
              });

    const auto push = [&](int tmpl, const std::vector<std::string>& args,
                          const Annotation* answer) {
      QaInstance inst = build_qa_instance(question_template(tmpl), args,
                                          entry.doc.doc_id, doc_tokens, max_len);
      if (answer != nullptr) {
        const auto loc = locate_answer(inst, answer->span);
        if (!loc.has_value()) {
          // Answer truncated away. Required questions cannot train toward
          // null; drop them. Abstainable ones become no-answer targets.
          if (inst.answer_required) return;
          inst.target_start = 0;
          inst.target_end = 0;
        } else {
          inst.target_start = loc->first;
          inst.target_end = loc->second;
          inst.gold_char = answer->span;
        }
      } else {
        if (inst.answer_required) return;  // no gold answer recorded; skip
        inst.target_start = 0;
        inst.target_end = 0;
      }
      out.push_back(std::move(inst));
    };

    for (const Annotation* q : quantities) {
      const std::size_t anchor = q->span.start;
      // Property via HasQuantity(property -> quantity).
      std::vector<const Annotation*> props;
      for (const auto* a : sources_of(entry, RelationKind::HasQuantity, q->annot_id)) {
        if (a->kind == AnnotKind::MeasuredProperty) props.push_back(a);
      }
      const Annotation* prop = nearest_to(props, anchor);

      push(1, {q->surface}, prop);

      const Annotation* entity = nullptr;
      if (prop != nullptr) {
        entity = nearest_to(sources_of(entry, RelationKind::HasProperty, prop->annot_id),
                            anchor);
        if (entity != nullptr) push(2, {prop->surface, q->surface}, entity);
      } else {
        std::vector<const Annotation*> ents;
        for (const auto* a : sources_of(entry, RelationKind::HasQuantity, q->annot_id)) {
          if (a->kind == AnnotKind::MeasuredEntity) ents.push_back(a);
        }
        entity = nearest_to(ents, anchor);
        if (entity != nullptr) push(3, {q->surface}, entity);
      }

      push(4, {q->surface},
           nearest_to(sources_of(entry, RelationKind::Qualifies, q->annot_id), anchor));
      if (entity != nullptr) {
        push(5, {entity->surface},
             nearest_to(sources_of(entry, RelationKind::Qualifies, entity->annot_id), anchor));
      }
      if (prop != nullptr) {
        push(6, {prop->surface},
             nearest_to(sources_of(entry, RelationKind::Qualifies, prop->annot_id), anchor));
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation / training / tuning

QaEval eval_qa(const QaModel& model, const std::vector<QaInstance>& instances,
               double tau) {
  QaEval e;
  double sum = 0.0;
  double ent_sum = 0.0, prop_sum = 0.0, qual_sum = 0.0;
  for (const auto& inst : instances) {
    const SpanDecision d = model.decide(inst, tau);
    double score = 0.0;
    if (!inst.gold_char.has_value()) {
      score = d.answered ? 0.0 : 1.0;
    } else if (d.answered) {
      score = overlap_f1(d.char_span, *inst.gold_char);
    }
    sum += score;
    switch (inst.template_id) {
      case 2:
      case 3:
        ent_sum += score;
        ++e.n_entity;
        break;
      case 1:
        prop_sum += score;
        ++e.n_property;
        break;
      default:
        qual_sum += score;
        ++e.n_qualifier;
    }
  }
  if (!instances.empty()) e.overall = sum / static_cast<double>(instances.size());
  if (e.n_entity > 0) e.entity = ent_sum / static_cast<double>(e.n_entity);
  if (e.n_property > 0) e.property = prop_sum / static_cast<double>(e.n_property);
  if (e.n_qualifier > 0) e.qualifier = qual_sum / static_cast<double>(e.n_qualifier);
  return e;
}

TrainResult train_qa(QaModel& model, const std::vector<QaInstance>& train_instances,
                     const std::vector<QaInstance>& dev_instances,
                     const TrainHyper& hyper, const TrainLogger& log) {
  std::vector<ParamTensor*> params;
  model.collect(params);
  AdamState adam;
  adam.lr = hyper.lr;

  TrainResult result;
  std::vector<std::vector<double>> best_values;
  const auto snapshot = [&]() {
    best_values.clear();
    for (const ParamTensor* p : params) best_values.push_back(p->value);
  };
  snapshot();

  Rng shuffle_rng(Rng::mix(hyper.seed, 0x9a9a));
  std::vector<std::size_t> order(train_instances.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (std::size_t epoch = 1; epoch <= hyper.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double loss_sum = 0.0;
    for (std::size_t pos = 0; pos < order.size(); pos += hyper.batch_size) {
      const std::size_t batch_end = std::min(order.size(), pos + hyper.batch_size);
      for (std::size_t k = pos; k < batch_end; ++k) {
        loss_sum += model.train_instance(train_instances[order[k]]);
      }
      scale_grads(params, 1.0 / static_cast<double>(batch_end - pos));
      clip_global_norm(params, hyper.clip_norm);
      adam_step(params, adam);
    }
    const QaEval ev = eval_qa(model, dev_instances, /*tau=*/0.0);
    EpochStat stat;
    stat.epoch = epoch;
    stat.mean_loss = train_instances.empty()
                         ? 0.0
                         : loss_sum / static_cast<double>(train_instances.size());
    stat.dev_metric = ev.overall;
    if (stat.dev_metric > result.best_dev_metric + 1e-12 || result.epochs.empty()) {
      result.best_dev_metric = stat.dev_metric;
      result.best_epoch = epoch;
      stat.is_best = true;
      snapshot();
    }
    result.epochs.push_back(stat);
    if (log) {
      nlohmann::json j{{"epoch", epoch},
                       {"mean_loss", stat.mean_loss},
                       {"dev_overall", ev.overall},
                       {"dev_entity", ev.entity},
                       {"dev_property", ev.property},
                       {"dev_qualifier", ev.qualifier},
                       {"best", stat.is_best}};
      log(j.dump());
    }
    if (stat.dev_metric >= 1.0 - 1e-9) break;
    if (epoch - result.best_epoch >= hyper.patience) break;
  }

  for (std::size_t i = 0; i < params.size(); ++i) {
    params[i]->value = best_values[i];
    params[i]->zero_grad();
  }
  return result;
}

ThresholdResult tune_threshold(const QaModel& model, const Corpus& dev_corpus) {
  if (dev_corpus.docs.empty()) throw EmptyDevSet();

  struct DocChains {
    const DocEntry* entry;
    std::vector<QuantityInput> quantities;
    std::vector<QuantityChain> chains;
  };
  std::vector<DocChains> per_doc;
  std::vector<double> gaps;
  for (const auto& entry : dev_corpus.docs) {
    DocChains dc;
    dc.entry = &entry;
    for (const auto& a : entry.annotations) {
      if (a.kind == AnnotKind::Quantity) {
        dc.quantities.push_back(
            {a.span, a.surface, a.payload.value_or(QuantityDetail{})});
      }
    }
    std::sort(dc.quantities.begin(), dc.quantities.end(),
              [](const QuantityInput& a, const QuantityInput& b) {
                return a.span.start < b.span.start;
              });
    dc.chains = precompute_chains(model, entry.doc, tokenize(entry.doc), dc.quantities);
    for (const auto& c : dc.chains) {
      gaps.push_back(c.q1.best_sum - c.q1.s_null);
      gaps.push_back(c.q4.best_sum - c.q4.s_null);
      gaps.push_back(c.q5_direct.best_sum - c.q5_direct.s_null);
      if (c.has_q2) {
        gaps.push_back(c.q5_with_property.best_sum - c.q5_with_property.s_null);
        gaps.push_back(c.q6.best_sum - c.q6.s_null);
      }
    }
    per_doc.push_back(std::move(dc));
  }
  if (gaps.empty()) return {0.0, 0.0, 0};

  std::sort(gaps.begin(), gaps.end());
  gaps.erase(std::unique(gaps.begin(), gaps.end()), gaps.end());
  gaps.push_back(gaps.back() + 1.0);  // abstain on everything

  ThresholdResult best;
  best.objective = -1.0;
  best.n_candidates = gaps.size();
  for (const double tau : gaps) {
    Corpus pred;
    for (const auto& dc : per_doc) {
      pred.docs.push_back(
          assemble_graph(dc.entry->doc, dc.quantities, dc.chains, tau, nullptr));
    }
    const MatchReport rep = score_corpus(pred, dev_corpus);
    const double obj = (rep.span_kinds.at("MeasuredEntity").f1 +
                        rep.span_kinds.at("MeasuredProperty").f1 +
                        rep.span_kinds.at("Qualifier").f1 +
                        rep.relation_kinds.at("All").f1) /
                       4.0;
    if (obj > best.objective + 1e-12) {
      best.objective = obj;
      best.tau = tau;
    }
  }
  return best;
}

}  // namespace measex
