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

#include "tagger/encoder.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>

#include "corpus/utf8.hpp"

namespace measex {

namespace {
constexpr std::size_t kSegDim = 8;
}

// ---------------------------------------------------------------------------
// Config / vocab plumbing

nlohmann::json EncoderConfig::to_json() const {
  return {
      {"kind", kind == EncoderKind::TrainableBiLstm ? "trainable" : "precomputed"},
      {"word_embed_dim", word_embed_dim},
      {"char_embed_dim", char_embed_dim},
      {"char_hidden", char_hidden},
      {"token_hidden", token_hidden},
      {"layers", layers},
      {"use_segments", use_segments},
      {"use_overlap_features", use_overlap_features},
      {"embeddings_dir", embeddings_dir},
  };
}

EncoderConfig EncoderConfig::from_json(const nlohmann::json& j) {
  EncoderConfig c;
  c.kind = j.at("kind").get<std::string>() == "precomputed"
               ? EncoderKind::Precomputed
               : EncoderKind::TrainableBiLstm;
  c.word_embed_dim = j.at("word_embed_dim").get<std::size_t>();
  c.char_embed_dim = j.at("char_embed_dim").get<std::size_t>();
  c.char_hidden = j.at("char_hidden").get<std::size_t>();
  c.token_hidden = j.at("token_hidden").get<std::size_t>();
  c.layers = j.at("layers").get<std::size_t>();
  c.use_segments = j.at("use_segments").get<bool>();
  c.use_overlap_features = j.at("use_overlap_features").get<bool>();
  c.embeddings_dir = j.at("embeddings_dir").get<std::string>();
  return c;
}

std::string Vocab::normalize(const std::string& surface) {
  std::string out = surface;
  for (char& c : out) {
    if (c >= '0' && c <= '9') c = '9';
  }
  return out;
}

int Vocab::lookup(const std::string& surface) const {
  const auto it = ids.find(normalize(surface));
  return it == ids.end() ? 0 : it->second;
}

void Vocab::add(const std::string& surface) {
  const std::string key = normalize(surface);
  if (!ids.count(key)) {
    const int next = static_cast<int>(ids.size()) + 1;  // 0 is <unk>
    ids[key] = next;
  }
}

nlohmann::json Vocab::to_json() const {
  std::vector<std::string> entries(ids.size());
  for (const auto& [tok, id] : ids) entries[static_cast<std::size_t>(id) - 1] = tok;
  return entries;
}

Vocab Vocab::from_json(const nlohmann::json& j) {
  Vocab v;
  int next = 1;
  for (const auto& e : j) v.ids[e.get<std::string>()] = next++;
  return v;
}

// ---------------------------------------------------------------------------
// Trainable encoder

TrainableEncoder::TrainableEncoder(
    const EncoderConfig& cfg,
    const std::vector<std::vector<std::string>>& train_tokens, Rng& rng,
    const std::string& prefix)
    : cfg_(cfg) {
  std::set<std::string> words, chars;
  for (const auto& seq : train_tokens) {
    for (const auto& tok : seq) {
      words.insert(Vocab::normalize(tok));
      if (cfg_.char_hidden > 0) {
        for (char32_t cp : utf8_decode(tok)) {
          std::string c;
          utf8_append(c, cp);
          chars.insert(Vocab::normalize(c));
        }
      }
    }
  }
  for (const auto& w : words) word_vocab_.add(w);
  for (const auto& c : chars) char_vocab_.add(c);
  build_params(prefix, &rng);
}

TrainableEncoder::TrainableEncoder(const EncoderConfig& cfg,
                                   const nlohmann::json& sidecar,
                                   const std::string& prefix)
    : cfg_(cfg) {
  word_vocab_ = Vocab::from_json(sidecar.at("word_vocab"));
  if (cfg_.char_hidden > 0) char_vocab_ = Vocab::from_json(sidecar.at("char_vocab"));
  build_params(prefix, nullptr);
}

std::size_t TrainableEncoder::token_feat_dim() const {
  std::size_t d = cfg_.word_embed_dim;
  if (cfg_.char_hidden > 0) d += 2 * cfg_.char_hidden;
  if (cfg_.use_segments) d += kSegDim;
  if (cfg_.use_overlap_features) d += 2;
  return d;
}

void TrainableEncoder::build_params(const std::string& prefix, Rng* rng) {
  word_emb_ = EmbeddingParams(prefix + "/word_emb", word_vocab_.size(),
                              cfg_.word_embed_dim);
  if (cfg_.char_hidden > 0) {
    char_emb_ = EmbeddingParams(prefix + "/char_emb", char_vocab_.size(),
                                cfg_.char_embed_dim);
    char_lstm_ = BiLstmParams(prefix + "/char_lstm", cfg_.char_embed_dim,
                              cfg_.char_hidden, 1);
  }
  if (cfg_.use_segments) {
    seg_emb_ = EmbeddingParams(prefix + "/seg_emb", kNumSegments, kSegDim);
  }
  token_lstm_ = BiLstmParams(prefix + "/token_lstm", token_feat_dim(),
                             cfg_.token_hidden, cfg_.layers);
  if (rng != nullptr) {
    word_emb_.init(*rng);
    if (cfg_.char_hidden > 0) {
      char_emb_.init(*rng);
      char_lstm_.init(*rng);
    }
    if (cfg_.use_segments) seg_emb_.init(*rng);
    token_lstm_.init(*rng);
  }
}

Matrix TrainableEncoder::forward(const EncInput& input,
                                 std::unique_ptr<EncoderCtx>* ctx) const {
  const std::size_t n = input.tokens.size();
  if (n == 0) throw EmptySequence();
  EncoderCtx local;
  EncoderCtx& c = *(ctx != nullptr ? (*ctx = std::make_unique<EncoderCtx>()).get()
                                   : &local);
  const bool with_ctx = ctx != nullptr;

  c.word_ids.resize(n);
  for (std::size_t t = 0; t < n; ++t) {
    c.word_ids[t] = word_vocab_.lookup(input.tokens[t].surface);
  }

  const std::size_t feat_dim = token_feat_dim();
  Matrix feats(n, feat_dim);
  const std::size_t ch = cfg_.char_hidden;
  if (with_ctx && ch > 0) {
    c.char_ids.resize(n);
    c.char_ctx.resize(n);
  }
  if (cfg_.use_segments) c.seg_ids.resize(n);

  for (std::size_t t = 0; t < n; ++t) {
    double* row = feats.row(t);
    std::size_t off = 0;
    std::memcpy(row, word_emb_.table.value.data() +
                         static_cast<std::size_t>(c.word_ids[t]) * cfg_.word_embed_dim,
                cfg_.word_embed_dim * sizeof(double));
    off += cfg_.word_embed_dim;

    if (ch > 0) {
      std::vector<int> cids;
      for (char32_t cp : utf8_decode(input.tokens[t].surface)) {
        std::string s;
        utf8_append(s, cp);
        cids.push_back(char_vocab_.lookup(s));
      }
      if (cids.empty()) cids.push_back(0);
      const Matrix ce = embedding_forward(char_emb_, cids);
      BiLstmCtx char_local;
      BiLstmCtx* cc = with_ctx ? &c.char_ctx[t] : &char_local;
      const Matrix hs = bilstm_forward(char_lstm_, ce, cc);
      // final forward state || final backward state
      std::memcpy(row + off, hs.row(hs.rows - 1), ch * sizeof(double));
      std::memcpy(row + off + ch, hs.row(0) + ch, ch * sizeof(double));
      off += 2 * ch;
      if (with_ctx) c.char_ids[t] = std::move(cids);
    }

    if (cfg_.use_segments) {
      const int seg = input.tokens[t].segment;
      c.seg_ids[t] = seg;
      std::memcpy(row + off,
                  seg_emb_.table.value.data() + static_cast<std::size_t>(seg) * kSegDim,
                  kSegDim * sizeof(double));
      off += kSegDim;
    }
    if (cfg_.use_overlap_features) {
      row[off] = input.tokens[t].overlap_q;
      row[off + 1] = input.tokens[t].overlap_arg;
      off += 2;
    }
  }

  Matrix out = bilstm_forward(token_lstm_, feats,
                              with_ctx ? &c.token_ctx : nullptr);
  if (with_ctx) c.feats = std::move(feats);
  return out;
}

void TrainableEncoder::backward(const EncInput& input, const EncoderCtx& ctx,
                                const Matrix& dy) {
  const std::size_t n = input.tokens.size();
  Matrix dfeats = bilstm_backward(token_lstm_, ctx.token_ctx, dy);

  const std::size_t ch = cfg_.char_hidden;
  Matrix dword(n, cfg_.word_embed_dim);
  for (std::size_t t = 0; t < n; ++t) {
    const double* row = dfeats.row(t);
    std::size_t off = 0;
    std::memcpy(dword.row(t), row, cfg_.word_embed_dim * sizeof(double));
    off += cfg_.word_embed_dim;

    if (ch > 0) {
      const std::size_t m = ctx.char_ctx[t].inputs.empty()
                                ? 1
                                : ctx.char_ctx[t].inputs[0].rows;
      Matrix dh(m, 2 * ch);
      std::memcpy(dh.row(m - 1), row + off, ch * sizeof(double));
      for (std::size_t j = 0; j < ch; ++j) dh.at(0, ch + j) += row[off + ch + j];
      Matrix dce = bilstm_backward(char_lstm_, ctx.char_ctx[t], dh);
      embedding_backward(char_emb_, ctx.char_ids[t], dce);
      off += 2 * ch;
    }
    if (cfg_.use_segments) {
      Matrix ds(1, kSegDim);
      std::memcpy(ds.row(0), row + off, kSegDim * sizeof(double));
      embedding_backward(seg_emb_, {ctx.seg_ids[t]}, ds);
      off += kSegDim;
    }
  }
  embedding_backward(word_emb_, ctx.word_ids, dword);
}

void TrainableEncoder::collect(std::vector<ParamTensor*>& out) {
  word_emb_.collect(out);
  if (cfg_.char_hidden > 0) {
    char_emb_.collect(out);
    char_lstm_.collect(out);
  }
  if (cfg_.use_segments) seg_emb_.collect(out);
  token_lstm_.collect(out);
}

nlohmann::json TrainableEncoder::sidecar() const {
  nlohmann::json j;
  j["word_vocab"] = word_vocab_.to_json();
  if (cfg_.char_hidden > 0) j["char_vocab"] = char_vocab_.to_json();
  return j;
}

// ---------------------------------------------------------------------------
// Precomputed encoder

PrecomputedEncoder::PrecomputedEncoder(std::string dir, std::size_t dim)
    : dir_(std::move(dir)), dim_(dim) {}

Matrix PrecomputedEncoder::forward(const EncInput& input,
                                   std::unique_ptr<EncoderCtx>*) const {
  const std::filesystem::path path =
      std::filesystem::path(dir_) / (input.doc_id + ".memb");
  if (!std::filesystem::exists(path)) {
    throw EmbeddingFileMissing(path.string());
  }
  Matrix m = read_memb(path.string());
  if (m.cols != dim_) {
    throw DimensionMismatch("embedding file " + path.string() + " has dim " +
                            std::to_string(m.cols) + ", expected " +
                            std::to_string(dim_));
  }
  if (m.rows != input.tokens.size()) {
    throw DimensionMismatch("embedding file " + path.string() + " has " +
                            std::to_string(m.rows) + " rows for " +
                            std::to_string(input.tokens.size()) + " tokens");
  }
  return m;
}

void write_memb(const std::string& path, const Matrix& embeddings) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw ParseError("cannot open for write: " + path);
  os.write("MEMB", 4);
  const std::uint32_t n = static_cast<std::uint32_t>(embeddings.rows);
  const std::uint32_t d = static_cast<std::uint32_t>(embeddings.cols);
  os.write(reinterpret_cast<const char*>(&n), 4);
  os.write(reinterpret_cast<const char*>(&d), 4);
  os.write(reinterpret_cast<const char*>(embeddings.data.data()),
           static_cast<std::streamsize>(embeddings.data.size() * sizeof(double)));
}

Matrix read_memb(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw EmbeddingFileMissing(path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "MEMB", 4) != 0) {
    throw ParseError("bad MEMB magic in " + path);
  }
  std::uint32_t n = 0, d = 0;
  is.read(reinterpret_cast<char*>(&n), 4);
  is.read(reinterpret_cast<char*>(&d), 4);
  Matrix m(n, d);
  is.read(reinterpret_cast<char*>(m.data.data()),
          static_cast<std::streamsize>(m.data.size() * sizeof(double)));
  if (!is) throw ParseError("truncated MEMB file: " + path);
  return m;
}

}  // namespace measex
