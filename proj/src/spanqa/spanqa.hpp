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

#ifndef MEASEX_SPANQA_SPANQA_HPP_
#define MEASEX_SPANQA_SPANQA_HPP_

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "corpus/tokenizer.hpp"
#include "spanqa/templates.hpp"
#include "tagger/tagger.hpp"

namespace measex {

struct EmptyDevSet : std::runtime_error {
  EmptyDevSet() : std::runtime_error("EmptyDevSet") {}
};

struct SpanQaConfig {
  EncoderConfig encoder;     // segments + overlap features on by default
  std::size_t max_len = 512;           // question + passage after truncation
  std::size_t max_answer_len = 30;     // tokens
  double tau = 0.0;                    // answerability threshold

  SpanQaConfig() {
    encoder.use_segments = true;
    encoder.use_overlap_features = true;
    encoder.char_hidden = 0;
  }
};

// A (question, passage) pair fed to the encoder as
//   <null> <q> question-tokens <sep> passage-tokens
// with position 0 standing in for [CLS]. The passage is truncated so the
// whole sequence fits max_len; the question never is.
struct QaInstance {
  int template_id = 1;
  std::vector<std::string> args;
  std::string doc_id;
  std::vector<Token> passage_tokens;  // post-truncation, with char offsets
  std::vector<EncToken> enc_tokens;
  std::size_t passage_begin = 0;  // enc index of the first passage token
  bool answer_required = false;
  bool passage_truncated = false;
  // Training target (enc-token indices); 0/0 encodes no-answer.
  std::optional<std::size_t> target_start, target_end;
  std::optional<Span> gold_char;  // evaluation
};

struct SpanScores {
  std::vector<double> start_logits, end_logits;  // T_i . S and T_i . E
  std::vector<double> start_probs, end_probs;    // softmax over all positions
  double s_null = 0.0;                           // start+end logit at position 0
};

struct SpanDecision {
  bool answered = false;
  std::size_t start_tok = 0, end_tok = 0;  // enc-token indices when answered
  double best_sum = 0.0;
  double s_null = 0.0;
  Span char_span;  // document offsets when answered
};

// Start/end logits T_i.S and T_i.E with softmax over all positions;
// s_null is the position-0 logit sum.
SpanScores score_spans(const Matrix& encoded, const std::vector<double>& start_vec,
                       const std::vector<double>& end_vec);

// argmax over passage positions i <= j (span length capped) of
// start[i] + end[j]; abstains iff allowed and s_null + tau > best sum.
// Ties prefer smaller i, then smaller j.
std::optional<std::pair<std::size_t, std::size_t>> best_span(
    const std::vector<double>& start_logits, const std::vector<double>& end_logits,
    std::size_t passage_begin, std::size_t passage_end, double s_null, double tau,
    bool answer_required, std::size_t max_answer_len);

// Builds the encoder input for one question against a document's tokens.
QaInstance build_qa_instance(const QuestionTemplate& t,
                             const std::vector<std::string>& args,
                             const std::string& doc_id,
                             const std::vector<Token>& doc_tokens,
                             std::size_t max_len);

class QaModel {
 public:
  QaModel(const SpanQaConfig& cfg,
          const std::vector<std::vector<std::string>>& train_streams,
          std::uint64_t seed);
  explicit QaModel(const std::string& checkpoint_path);

  SpanScores score(const QaInstance& inst) const;
  SpanDecision decide(const QaInstance& inst, double tau) const;

  // Start + end cross-entropy against the instance targets; accumulates
  // gradients through the scorer and encoder.
  double train_instance(const QaInstance& inst);

  void collect(std::vector<ParamTensor*>& out);
  void save(const std::string& checkpoint_path) const;

  const SpanQaConfig& config() const { return cfg_; }
  double tau() const { return cfg_.tau; }
  void set_tau(double tau) { cfg_.tau = tau; }

 private:
  SpanQaConfig cfg_;
  std::unique_ptr<TrainableEncoder> encoder_;
  ParamTensor start_vec_, end_vec_;
};

// ---------------------------------------------------------------------------
// Multi-turn protocol

struct QuantityInput {
  Span span;
  std::string surface;
  QuantityDetail payload;
};

// Per-quantity cached question chain; spans are computed once (they do not
// depend on tau), abstention is applied during assembly.
struct QuantityChain {
  SpanDecision q1, q2, q3, q4, q5_with_property, q5_direct, q6;
  bool has_q2 = false, has_q6 = false;  // q1 produced a non-empty span
};

std::vector<QuantityChain> precompute_chains(const QaModel& model,
                                             const Document& doc,
                                             const std::vector<Token>& doc_tokens,
                                             const std::vector<QuantityInput>& quantities);

// Applies the protocol at threshold tau over cached chains: template 1,
// then 2 (property found) or 3, then qualifiers 4-6; duplicate qualifier
// spans within one annotation set merge. Returns a full document entry
// whose annotation ids are `<docId>-T<n>`.
DocEntry assemble_graph(const Document& doc,
                        const std::vector<QuantityInput>& quantities,
                        const std::vector<QuantityChain>& chains, double tau,
                        nlohmann::json* debug);

// precompute_chains + assemble_graph, validated.
DocEntry multi_turn(const QaModel& model, const Document& doc,
                    const std::vector<QuantityInput>& quantities,
                    nlohmann::json* debug);

// Structural invariants of an assembled graph (exact out-degrees, qualifier
// sources, acyclicity) on top of validate_entry.
void validate_relation_graph(const DocEntry& entry);

// ---------------------------------------------------------------------------
// Training / evaluation / threshold tuning

// Instantiates the six templates against gold annotations, including
// no-answer instances (target position 0).
std::vector<QaInstance> make_training_instances(const Corpus& corpus,
                                                const std::vector<std::size_t>& docs,
                                                std::size_t max_len);

struct QaEval {
  double overall = 0.0;
  double entity = 0.0, property = 0.0, qualifier = 0.0;
  std::size_t n_entity = 0, n_property = 0, n_qualifier = 0;
};

// Instance-level score at tau: abstention on a no-answer instance scores 1,
// answers score their char overlap F1 against gold.
QaEval eval_qa(const QaModel& model, const std::vector<QaInstance>& instances,
               double tau);

TrainResult train_qa(QaModel& model, const std::vector<QaInstance>& train_instances,
                     const std::vector<QaInstance>& dev_instances,
                     const TrainHyper& hyper, const TrainLogger& log);

struct ThresholdResult {
  double tau = 0.0;
  double objective = 0.0;  // mean of entity/property/qualifier/relation F1
  std::size_t n_candidates = 0;
};

// Sweeps tau over the observed (best_sum - s_null) gaps on dev documents
// (gold quantities) and returns the maximizer; ties pick the smallest tau.
ThresholdResult tune_threshold(const QaModel& model, const Corpus& dev_corpus);

}  // namespace measex

#endif  // MEASEX_SPANQA_SPANQA_HPP_
