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

#ifndef MEASEX_TAGGER_ENCODER_HPP_
#define MEASEX_TAGGER_ENCODER_HPP_

#include <map>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "corpus/types.hpp"
#include "netcore/layers.hpp"

namespace measex {

struct EmbeddingFileMissing : std::runtime_error {
  explicit EmbeddingFileMissing(const std::string& what)
      : std::runtime_error("EmbeddingFileMissing: " + what) {}
};

enum class EncoderKind { TrainableBiLstm, Precomputed };

struct EncoderConfig {
  EncoderKind kind = EncoderKind::TrainableBiLstm;
  std::size_t word_embed_dim = 64;
  std::size_t char_embed_dim = 32;
  std::size_t char_hidden = 64;  // 0 disables the character path
  std::size_t token_hidden = 128;
  std::size_t layers = 2;
  // Extras used by the QA stage: a small additive segment embedding over
  // {null, question, separator, passage} and two binary per-token features
  // flagging lexical overlap with the question / with its slot arguments.
  bool use_segments = false;
  bool use_overlap_features = false;
  std::string embeddings_dir;  // Precomputed kind

  nlohmann::json to_json() const;
  static EncoderConfig from_json(const nlohmann::json& j);
};

enum Segment : int { kSegNull = 0, kSegQuestion = 1, kSegSep = 2, kSegPassage = 3 };
constexpr std::size_t kNumSegments = 4;

struct EncToken {
  std::string surface;
  int segment = kSegPassage;
  double overlap_q = 0.0;    // surface occurs among question tokens
  double overlap_arg = 0.0;  // surface occurs among slot-argument tokens
};

// Token/char -> id map with <unk> at id 0. Lookup keys fold ASCII digits to
// '9' so unseen numbers share statistics with seen ones.
struct Vocab {
  std::map<std::string, int> ids;

  static std::string normalize(const std::string& surface);
  int lookup(const std::string& surface) const;
  void add(const std::string& surface);
  std::size_t size() const { return ids.size() + 1; }  // + <unk>

  nlohmann::json to_json() const;
  static Vocab from_json(const nlohmann::json& j);
};

struct EncInput {
  std::string doc_id;  // Precomputed lookup key
  std::vector<EncToken> tokens;
};

// Per-call activation cache for the trainable encoder's backward pass.
struct EncoderCtx {
  std::vector<int> word_ids;
  std::vector<int> seg_ids;
  std::vector<std::vector<int>> char_ids;
  std::vector<BiLstmCtx> char_ctx;
  Matrix feats;
  BiLstmCtx token_ctx;
};

class Encoder {
 public:
  virtual ~Encoder() = default;
  virtual std::size_t out_dim() const = 0;
  // ctx may be null at inference. Thread-safe for concurrent calls.
  virtual Matrix forward(const EncInput& input, std::unique_ptr<EncoderCtx>* ctx) const = 0;
  virtual void backward(const EncInput& input, const EncoderCtx& ctx, const Matrix& dy) = 0;
  virtual void collect(std::vector<ParamTensor*>& out) = 0;
};

class TrainableEncoder final : public Encoder {
 public:
  // Builds vocabularies from the training token streams.
  TrainableEncoder(const EncoderConfig& cfg,
                   const std::vector<std::vector<std::string>>& train_tokens,
                   Rng& rng, const std::string& prefix = "enc");
  // Restores from a config sidecar (vocab included); weights come from the
  // checkpoint afterwards.
  TrainableEncoder(const EncoderConfig& cfg, const nlohmann::json& sidecar,
                   const std::string& prefix = "enc");

  std::size_t out_dim() const override { return token_lstm_.out_dim(); }
  Matrix forward(const EncInput& input, std::unique_ptr<EncoderCtx>* ctx) const override;
  void backward(const EncInput& input, const EncoderCtx& ctx, const Matrix& dy) override;
  void collect(std::vector<ParamTensor*>& out) override;

  nlohmann::json sidecar() const;  // vocab state for the config sidecar
  const EncoderConfig& config() const { return cfg_; }

 private:
  void build_params(const std::string& prefix, Rng* rng);
  std::size_t token_feat_dim() const;

  EncoderConfig cfg_;
  Vocab word_vocab_, char_vocab_;
  EmbeddingParams word_emb_, char_emb_, seg_emb_;
  BiLstmParams char_lstm_;   // single layer over each token's characters
  BiLstmParams token_lstm_;  // cfg.layers deep
};

// Per-document vectors from `<dir>/<docId>.memb`: magic MEMB, token count
// u32, dim u32, then row-major little-endian f64. Token count must match
// the tokenizer output for the document.
class PrecomputedEncoder final : public Encoder {
 public:
  PrecomputedEncoder(std::string dir, std::size_t dim);

  std::size_t out_dim() const override { return dim_; }
  Matrix forward(const EncInput& input, std::unique_ptr<EncoderCtx>* ctx) const override;
  void backward(const EncInput&, const EncoderCtx&, const Matrix&) override {}
  void collect(std::vector<ParamTensor*>&) override {}

 private:
  std::string dir_;
  std::size_t dim_;
};

void write_memb(const std::string& path, const Matrix& embeddings);
Matrix read_memb(const std::string& path);

}  // namespace measex

#endif  // MEASEX_TAGGER_ENCODER_HPP_
