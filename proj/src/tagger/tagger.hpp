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

#ifndef MEASEX_TAGGER_TAGGER_HPP_
#define MEASEX_TAGGER_TAGGER_HPP_

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "corpus/tokenizer.hpp"
#include "corpus/types.hpp"
#include "crf/crf.hpp"
#include "netcore/adam.hpp"
#include "tagger/encoder.hpp"

namespace measex {

struct TrainHyper {
  std::size_t epochs = 10;
  double lr = 1e-3;
  std::size_t batch_size = 8;
  double dev_frac = 0.1;
  std::uint64_t seed = 42;
  std::size_t max_len = 512;
  double clip_norm = 5.0;
  std::size_t patience = 5;  // early stop after this many flat epochs
};

// Receives one line per training event (JSON for epoch stats).
using TrainLogger = std::function<void(const std::string&)>;

struct EpochStat {
  std::size_t epoch = 0;
  double mean_loss = 0.0;
  double dev_metric = 0.0;
  bool is_best = false;
};

struct TrainResult {
  std::vector<EpochStat> epochs;
  double best_dev_metric = 0.0;
  std::size_t best_epoch = 0;
};

// Seeded document-level split; dev gets round(n * dev_frac) docs.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_dev(
    std::size_t n_docs, double dev_frac, std::uint64_t seed);

// Quantity identification: encoder -> ReLU projection to 3 tag logits ->
// linear-chain CRF head.
class TaggerModel {
 public:
  // Fresh model; vocabularies come from the given token streams (the
  // training split's documents).
  TaggerModel(const EncoderConfig& enc_cfg,
              const std::vector<std::vector<std::string>>& train_streams,
              std::uint64_t seed, std::size_t max_len = 512);
  // Precomputed-embedding variant; enc_dim must match the MEMB files.
  TaggerModel(const EncoderConfig& enc_cfg, std::size_t enc_dim,
              std::uint64_t seed, std::size_t max_len = 512);
  // Restore from checkpoint (`path` + sidecar `path.json`).
  explicit TaggerModel(const std::string& checkpoint_path);

  // Row-wise ReLU(W_l^T e_i + b_l); every entry >= 0.
  Matrix emit(const Matrix& encoded, LinearCtx* ctx) const;

  std::vector<Span> predict(const Document& doc) const;
  std::vector<Span> predict_tokens(const std::string& doc_id,
                                   const std::vector<Token>& tokens) const;

  // One document's CRF NLL with full backward pass; grads accumulate.
  double train_instance(const EncInput& input, const std::vector<int>& gold);

  void collect(std::vector<ParamTensor*>& out);
  void save(const std::string& checkpoint_path) const;

  const EncoderConfig& encoder_config() const { return enc_cfg_; }
  const Encoder& encoder() const { return *encoder_; }
  Encoder& encoder() { return *encoder_; }
  CrfParams& crf() { return crf_; }
  const CrfParams& crf() const { return crf_; }
  LinearParams& projection() { return proj_; }
  std::size_t max_len() const { return max_len_; }

 private:
  void init_head(Rng& rng);
  void collect_const(std::vector<const ParamTensor*>& out) const;

  EncoderConfig enc_cfg_;
  std::unique_ptr<Encoder> encoder_;
  TrainableEncoder* trainable_ = nullptr;  // null for Precomputed
  LinearParams proj_;
  CrfParams crf_;
  std::size_t max_len_ = 512;
};

// Gold IOB targets for one document against its quantity spans.
std::vector<int> gold_tags_for(const DocEntry& entry,
                               const std::vector<Token>& tokens);

// Trains with Adam on a seeded 90/10 document split, evaluating quantity
// span overlap F1 on dev each epoch; the best-dev weights are left in the
// model. Early-stops on a perfect dev score or `patience` flat epochs.
TrainResult train_tagger(TaggerModel& model, const Corpus& corpus,
                         const std::vector<std::size_t>& train_docs,
                         const std::vector<std::size_t>& dev_docs,
                         const TrainHyper& hyper, const TrainLogger& log);

}  // namespace measex

#endif  // MEASEX_TAGGER_TAGGER_HPP_
