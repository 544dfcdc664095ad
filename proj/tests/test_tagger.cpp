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
#include <fstream>

#include "corpus/utf8.hpp"
#include "netcore/gradcheck.hpp"
#include "synthgen/synthgen.hpp"
#include "tagger/tagger.hpp"

using namespace measex;

namespace {

namespace fs = std::filesystem;

EncoderConfig small_encoder() {
  EncoderConfig e;
  e.word_embed_dim = 16;
  e.char_embed_dim = 8;
  e.char_hidden = 8;
  e.token_hidden = 16;
  e.layers = 1;
  return e;
}

std::vector<std::vector<std::string>> streams_of(const Corpus& corpus) {
  std::vector<std::vector<std::string>> out;
  for (const auto& d : corpus.docs) {
    std::vector<std::string> words;
    for (const auto& t : tokenize(d.doc)) words.push_back(t.surface);
    out.push_back(std::move(words));
  }
  return out;
}

std::string file_bytes(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("encode returns one row per token") {
  TaggerModel model(small_encoder(), {{"a", "b", "3"}}, 1);
  const Matrix m = model.encoder().forward(
      {"d", {{"a", kSegPassage, 0, 0}}}, nullptr);
  CHECK(m.rows == 1);
  CHECK(m.cols == model.encoder().out_dim());
}

TEST_CASE("emit clamps negatives and zero weights give zero logits") {
  TaggerModel model(small_encoder(), {{"a", "b"}}, 2);
  std::vector<ParamTensor*> params;
  model.projection().collect(params);
  for (auto* p : params) p->fill(0.0);
  Matrix enc(2, model.encoder().out_dim());
  for (auto& v : enc.data) v = -1.0;
  const Matrix logits = model.emit(enc, nullptr);
  for (double v : logits.data) CHECK(v == 0.0);
}

TEST_CASE("emission logits are never negative") {
  TaggerModel model(small_encoder(), {{"alpha", "beta", "5", "kg"}}, 3);
  const Matrix enc = model.encoder().forward(
      {"d",
       {{"alpha", kSegPassage, 0, 0}, {"5", kSegPassage, 0, 0}, {"kg", kSegPassage, 0, 0}}},
      nullptr);
  const Matrix logits = model.emit(enc, nullptr);
  for (double v : logits.data) CHECK(v >= 0.0);
}

TEST_CASE("projection + crf gradients match finite differences end to end") {
  EncoderConfig ec = small_encoder();
  ec.word_embed_dim = 6;
  ec.char_hidden = 4;
  ec.char_embed_dim = 4;
  ec.token_hidden = 5;
  TaggerModel model(ec, {{"w1", "w2", "w3"}}, 7);
  const EncInput input{"d",
                       {{"w1", kSegPassage, 0, 0},
                        {"w2", kSegPassage, 0, 0},
                        {"w3", kSegPassage, 0, 0}}};
  const std::vector<int> gold = {2, 0, 1};  // O B I

  std::vector<ParamTensor*> params;
  model.collect(params);
  const auto loss_fn = [&]() {
    for (auto* p : params) p->zero_grad();
    return model.train_instance(input, gold);
  };
  const auto rep = grad_check(loss_fn, params, 1e-5, 1e-4);
  CHECK_MESSAGE(rep.pass, rep.worst_param, " rel err ", rep.max_rel_err);
}

TEST_CASE("identical tokens diverge across contexts after a training step") {
  TaggerModel model(small_encoder(), {{"x", "same", "y", "same"}}, 9);
  const EncInput input{"d",
                       {{"x", kSegPassage, 0, 0},
                        {"same", kSegPassage, 0, 0},
                        {"y", kSegPassage, 0, 0},
                        {"same", kSegPassage, 0, 0}}};
  model.train_instance(input, {2, 0, 2, 2});
  std::vector<ParamTensor*> params;
  model.collect(params);
  AdamState adam;
  adam.lr = 1e-2;
  adam_step(params, adam);

  const Matrix enc = model.encoder().forward(input, nullptr);
  bool differs = false;
  for (std::size_t j = 0; j < enc.cols; ++j) {
    if (enc.at(1, j) != enc.at(3, j)) differs = true;
  }
  CHECK(differs);
}

TEST_CASE("precomputed encoder validates dimensions and file presence") {
  const auto dir = fs::temp_directory_path() / "measex_memb";
  fs::remove_all(dir);
  fs::create_directories(dir);
  Matrix emb(3, 4);
  for (std::size_t i = 0; i < emb.data.size(); ++i) emb.data[i] = static_cast<double>(i);
  write_memb((dir / "doc1.memb").string(), emb);

  EncoderConfig pc;
  pc.kind = EncoderKind::Precomputed;
  pc.embeddings_dir = dir.string();
  TaggerModel model(pc, 4, 1);
  const EncInput ok{"doc1",
                    {{"a", kSegPassage, 0, 0},
                     {"b", kSegPassage, 0, 0},
                     {"c", kSegPassage, 0, 0}}};
  const Matrix got = model.encoder().forward(ok, nullptr);
  CHECK(got.rows == 3);
  CHECK(got.data == emb.data);

  TaggerModel wrong_dim(pc, 5, 1);
  CHECK_THROWS_AS(wrong_dim.encoder().forward(ok, nullptr), DimensionMismatch);
  CHECK_THROWS_AS(model.encoder().forward({"missing", ok.tokens}, nullptr),
                  EmbeddingFileMissing);
  const EncInput short_input{"doc1", {{"a", kSegPassage, 0, 0}}};
  CHECK_THROWS_AS(model.encoder().forward(short_input, nullptr), DimensionMismatch);
  fs::remove_all(dir);
}

TEST_CASE("tagger trains to high dev F1 on a small synthetic corpus") {
  GrammarSpec spec;
  spec.seed = 5;
  spec.n_docs = 36;
  spec.long_doc_frac = 0.0;
  const Corpus corpus = generate(spec);

  TrainHyper hyper;
  hyper.epochs = 8;
  hyper.lr = 2e-3;
  hyper.batch_size = 8;
  hyper.dev_frac = 0.15;
  hyper.seed = 17;
  hyper.patience = 8;

  auto [train_idx, dev_idx] = split_dev(corpus.docs.size(), hyper.dev_frac, hyper.seed);
  EncoderConfig ec;
  ec.word_embed_dim = 32;
  ec.char_embed_dim = 12;
  ec.char_hidden = 16;
  ec.token_hidden = 32;
  ec.layers = 1;

  std::vector<std::vector<std::string>> streams;
  for (std::size_t di : train_idx) {
    std::vector<std::string> words;
    for (const auto& t : tokenize(corpus.docs[di].doc)) words.push_back(t.surface);
    streams.push_back(std::move(words));
  }
  TaggerModel model(ec, streams, hyper.seed);
  const TrainResult res = train_tagger(model, corpus, train_idx, dev_idx, hyper, nullptr);
  CHECK(res.best_dev_metric >= 0.85);

  // Predictions are valid spans: in bounds, non-overlapping, ordered.
  for (std::size_t di : dev_idx) {
    const Document& doc = corpus.docs[di].doc;
    const auto spans = model.predict(doc);
    const std::size_t len = utf8_length(doc.text);
    for (std::size_t i = 0; i < spans.size(); ++i) {
      CHECK(spans[i].start < spans[i].end);
      CHECK(spans[i].end <= len);
      if (i > 0) CHECK(spans[i - 1].end <= spans[i].start);
    }
  }
}

TEST_CASE("training with lr = 0 leaves the loss unchanged") {
  GrammarSpec spec;
  spec.seed = 6;
  spec.n_docs = 6;
  spec.long_doc_frac = 0.0;
  const Corpus corpus = generate(spec);
  TrainHyper hyper;
  hyper.epochs = 2;
  hyper.lr = 0.0;
  hyper.seed = 3;
  hyper.patience = 10;
  auto [train_idx, dev_idx] = split_dev(corpus.docs.size(), 0.2, hyper.seed);
  TaggerModel model(small_encoder(), streams_of(corpus), hyper.seed);
  const TrainResult res = train_tagger(model, corpus, train_idx, dev_idx, hyper, nullptr);
  REQUIRE(res.epochs.size() == 2);
  CHECK(res.epochs[0].mean_loss == doctest::Approx(res.epochs[1].mean_loss).epsilon(1e-12));
}

TEST_CASE("zero epochs returns the initialized model") {
  GrammarSpec spec;
  spec.seed = 6;
  spec.n_docs = 4;
  spec.long_doc_frac = 0.0;
  const Corpus corpus = generate(spec);
  TrainHyper hyper;
  hyper.epochs = 0;
  auto [train_idx, dev_idx] = split_dev(corpus.docs.size(), 0.25, 1);
  TaggerModel model(small_encoder(), streams_of(corpus), 1);
  const TrainResult res = train_tagger(model, corpus, train_idx, dev_idx, hyper, nullptr);
  CHECK(res.epochs.empty());
  for (const auto& d : corpus.docs) {
    (void)model.predict(d.doc);  // still usable
  }
}

TEST_CASE("no predicted span starts beyond the truncation limit") {
  GrammarSpec spec;
  spec.seed = 44;
  spec.n_docs = 4;
  spec.long_doc_frac = 1.0;  // every document exceeds 512 tokens
  const Corpus corpus = generate(spec);
  TaggerModel model(small_encoder(), streams_of(corpus), 2);
  for (const auto& d : corpus.docs) {
    const auto tokens = tokenize(d.doc);
    REQUIRE(tokens.size() > 512);
    const std::size_t limit = tokens[511].span.end;
    for (const auto& s : model.predict(d.doc)) {
      CHECK(s.start < limit);
      CHECK(s.end <= limit);
    }
  }
}

TEST_CASE("same seed and data give bit-identical checkpoints and predictions") {
  GrammarSpec spec;
  spec.seed = 10;
  spec.n_docs = 10;
  spec.long_doc_frac = 0.0;
  const Corpus corpus = generate(spec);
  TrainHyper hyper;
  hyper.epochs = 2;
  hyper.lr = 1e-3;
  hyper.seed = 77;
  auto [train_idx, dev_idx] = split_dev(corpus.docs.size(), 0.2, hyper.seed);

  const auto dir = fs::temp_directory_path() / "measex_det";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::string bytes[2];
  std::vector<Span> spans[2];
  for (int run = 0; run < 2; ++run) {
    TaggerModel model(small_encoder(), streams_of(corpus), hyper.seed);
    train_tagger(model, corpus, train_idx, dev_idx, hyper, nullptr);
    const std::string path = (dir / ("run" + std::to_string(run) + ".mprm")).string();
    model.save(path);
    bytes[run] = file_bytes(path);
    spans[run] = model.predict(corpus.docs[0].doc);
  }
  CHECK(bytes[0] == bytes[1]);
  CHECK(bytes[0].substr(0, 4) == "MPRM");
  CHECK(spans[0] == spans[1]);
  fs::remove_all(dir);
}

TEST_CASE("checkpoint restore reproduces predictions") {
  GrammarSpec spec;
  spec.seed = 12;
  spec.n_docs = 8;
  spec.long_doc_frac = 0.0;
  const Corpus corpus = generate(spec);
  TaggerModel model(small_encoder(), streams_of(corpus), 5);
  const auto dir = fs::temp_directory_path() / "measex_restore";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string path = (dir / "tagger.mprm").string();
  model.save(path);
  const TaggerModel restored(path);
  for (const auto& d : corpus.docs) {
    CHECK(restored.predict(d.doc) == model.predict(d.doc));
  }
  fs::remove_all(dir);
}
