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

#include "tagger/tagger.hpp"

#include <cmath>
#include <fstream>

#include "corpus/iob.hpp"
#include "metrics/metrics.hpp"
#include "netcore/checkpoint.hpp"

namespace measex {

namespace {

std::vector<EncToken> plain_tokens(const std::vector<Token>& tokens) {
  std::vector<EncToken> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back({t.surface, kSegPassage, 0.0, 0.0});
  return out;
}

nlohmann::json load_sidecar(const std::string& checkpoint_path) {
  std::ifstream is(checkpoint_path + ".json");
  if (!is) throw CheckpointError("missing sidecar: " + checkpoint_path + ".json");
  return nlohmann::json::parse(is);
}

}  // namespace

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_dev(
    std::size_t n_docs, double dev_frac, std::uint64_t seed) {
  std::vector<std::size_t> order(n_docs);
  for (std::size_t i = 0; i < n_docs; ++i) order[i] = i;
  Rng rng(Rng::mix(seed, 0x5117));
  rng.shuffle(order);
  std::size_t n_dev = static_cast<std::size_t>(
      std::llround(static_cast<double>(n_docs) * dev_frac));
  if (n_dev >= n_docs && n_docs > 1) n_dev = n_docs - 1;
  const std::size_t n_train = n_docs - n_dev;
  return {{order.begin(), order.begin() + static_cast<long>(n_train)},
          {order.begin() + static_cast<long>(n_train), order.end()}};
}

TaggerModel::TaggerModel(const EncoderConfig& enc_cfg,
                         const std::vector<std::vector<std::string>>& train_streams,
                         std::uint64_t seed, std::size_t max_len)
    : enc_cfg_(enc_cfg), max_len_(max_len) {
  if (enc_cfg_.kind == EncoderKind::Precomputed) {
    throw DimensionMismatch(
        "precomputed encoders take an explicit dimension; use the "
        "(config, dim, seed) constructor");
  }
  Rng rng(Rng::mix(seed, 0x7a66e5));
  auto enc = std::make_unique<TrainableEncoder>(enc_cfg_, train_streams, rng, "enc");
  trainable_ = enc.get();
  encoder_ = std::move(enc);
  init_head(rng);
}

TaggerModel::TaggerModel(const EncoderConfig& enc_cfg, std::size_t enc_dim,
                         std::uint64_t seed, std::size_t max_len)
    : enc_cfg_(enc_cfg), max_len_(max_len) {
  if (enc_cfg_.kind != EncoderKind::Precomputed || enc_cfg_.embeddings_dir.empty()) {
    throw DimensionMismatch("this constructor is for precomputed encoders");
  }
  Rng rng(Rng::mix(seed, 0x7a66e5));
  encoder_ = std::make_unique<PrecomputedEncoder>(enc_cfg_.embeddings_dir, enc_dim);
  init_head(rng);
}

void TaggerModel::init_head(Rng& rng) {
  proj_ = LinearParams("proj", encoder_->out_dim(), kNumTags);
  proj_.w.name = "proj/W_l";
  proj_.b.name = "proj/b_l";
  proj_.init(rng);
  crf_ = CrfParams(kNumTags, "crf");
  crf_.init(rng);
}

TaggerModel::TaggerModel(const std::string& checkpoint_path) {
  const nlohmann::json side = load_sidecar(checkpoint_path);
  enc_cfg_ = EncoderConfig::from_json(side.at("encoder_config"));
  max_len_ = side.at("max_len").get<std::size_t>();
  std::size_t enc_dim = 0;
  if (enc_cfg_.kind == EncoderKind::Precomputed) {
    enc_dim = side.at("encoder_dim").get<std::size_t>();
    encoder_ = std::make_unique<PrecomputedEncoder>(enc_cfg_.embeddings_dir, enc_dim);
  } else {
    auto enc = std::make_unique<TrainableEncoder>(enc_cfg_, side.at("encoder_sidecar"), "enc");
    trainable_ = enc.get();
    encoder_ = std::move(enc);
    enc_dim = encoder_->out_dim();
  }
  proj_ = LinearParams("proj", enc_dim, kNumTags);
  proj_.w.name = "proj/W_l";
  proj_.b.name = "proj/b_l";
  crf_ = CrfParams(kNumTags, "crf");
  crf_.use_boundary = side.at("crf_use_boundary").get<bool>();
  crf_.constrain_iob = side.at("crf_constrain_iob").get<bool>();

  std::vector<ParamTensor*> params;
  collect(params);
  load_checkpoint(checkpoint_path, params);
}

Matrix TaggerModel::emit(const Matrix& encoded, LinearCtx* ctx) const {
  return linear_forward(proj_, encoded, /*relu=*/true, ctx);
}

std::vector<Span> TaggerModel::predict_tokens(const std::string& doc_id,
                                              const std::vector<Token>& tokens) const {
  if (tokens.empty()) return {};
  auto kept = truncate(tokens, max_len_);
  EncInput input{doc_id, plain_tokens(kept.tokens)};
  const Matrix encoded = encoder_->forward(input, nullptr);
  const Matrix logits = emit(encoded, nullptr);
  const std::vector<int> tags = viterbi(crf_, logits);
  TagSequence seq(tags.size());
  for (std::size_t i = 0; i < tags.size(); ++i) seq[i] = static_cast<Tag>(tags[i]);
  return iob_to_spans(kept.tokens, seq);
}

std::vector<Span> TaggerModel::predict(const Document& doc) const {
  return predict_tokens(doc.doc_id, tokenize(doc));
}

double TaggerModel::train_instance(const EncInput& input,
                                   const std::vector<int>& gold) {
  std::unique_ptr<EncoderCtx> enc_ctx;
  const Matrix encoded = encoder_->forward(input, &enc_ctx);
  LinearCtx proj_ctx;
  const Matrix logits = linear_forward(proj_, encoded, /*relu=*/true, &proj_ctx);
  Matrix dlogits;
  const double loss = crf_nll(crf_, logits, gold, &dlogits);
  const Matrix denc = linear_backward(proj_, proj_ctx, dlogits, /*relu=*/true);
  if (trainable_ != nullptr) trainable_->backward(input, *enc_ctx, denc);
  return loss;
}

void TaggerModel::collect(std::vector<ParamTensor*>& out) {
  encoder_->collect(out);
  proj_.collect(out);
  crf_.collect(out);
}

void TaggerModel::collect_const(std::vector<const ParamTensor*>& out) const {
  auto* self = const_cast<TaggerModel*>(this);
  std::vector<ParamTensor*> params;
  self->collect(params);
  out.assign(params.begin(), params.end());
}

void TaggerModel::save(const std::string& checkpoint_path) const {
  std::vector<const ParamTensor*> params;
  collect_const(params);
  save_checkpoint(checkpoint_path, params);

  nlohmann::json side;
  side["encoder_config"] = enc_cfg_.to_json();
  side["max_len"] = max_len_;
  side["crf_use_boundary"] = crf_.use_boundary;
  side["crf_constrain_iob"] = crf_.constrain_iob;
  side["encoder_dim"] = encoder_->out_dim();
  if (trainable_ != nullptr) side["encoder_sidecar"] = trainable_->sidecar();
  std::ofstream os(checkpoint_path + ".json", std::ios::trunc);
  os << side.dump(2) << '\n';
}

std::vector<int> gold_tags_for(const DocEntry& entry,
                               const std::vector<Token>& tokens) {
  std::vector<Span> gold;
  for (const auto& a : entry.annotations) {
    if (a.kind == AnnotKind::Quantity) gold.push_back(a.span);
  }
  const TagSequence tags = spans_to_iob(tokens, gold);
  std::vector<int> out(tags.size());
  for (std::size_t i = 0; i < tags.size(); ++i) out[i] = static_cast<int>(tags[i]);
  return out;
}

TrainResult train_tagger(TaggerModel& model, const Corpus& corpus,
                         const std::vector<std::size_t>& train_docs,
                         const std::vector<std::size_t>& dev_docs,
                         const TrainHyper& hyper, const TrainLogger& log) {
  struct Instance {
    EncInput input;
    std::vector<int> gold;
  };
  std::vector<Instance> instances;
  for (std::size_t di : train_docs) {
    const DocEntry& entry = corpus.docs[di];
    auto kept = truncate(tokenize(entry.doc), hyper.max_len);
    if (kept.tokens.empty()) continue;
    instances.push_back({EncInput{entry.doc.doc_id, plain_tokens(kept.tokens)},
                         gold_tags_for(entry, kept.tokens)});
  }

  std::vector<ParamTensor*> params;
  model.collect(params);
  AdamState adam;
  adam.lr = hyper.lr;

  const auto eval_dev = [&]() {
    std::vector<std::pair<std::vector<Span>, std::vector<Span>>> per_doc;
    for (std::size_t di : dev_docs) {
      const DocEntry& entry = corpus.docs[di];
      std::vector<Span> gold;
      for (const auto& a : entry.annotations) {
        if (a.kind == AnnotKind::Quantity) gold.push_back(a.span);
      }
      per_doc.emplace_back(model.predict(entry.doc), std::move(gold));
    }
    return span_set_overlap_f1(per_doc);
  };

  TrainResult result;
  std::vector<std::vector<double>> best_values;
  const auto snapshot = [&]() {
    best_values.clear();
    for (const ParamTensor* p : params) best_values.push_back(p->value);
  };
  snapshot();  // epochs == 0 keeps the initialized weights

  Rng shuffle_rng(Rng::mix(hyper.seed, 0x50f1));
  std::vector<std::size_t> order(instances.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (std::size_t epoch = 1; epoch <= hyper.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double loss_sum = 0.0;
    std::size_t seen = 0;
    for (std::size_t pos = 0; pos < order.size(); pos += hyper.batch_size) {
      const std::size_t batch_end = std::min(order.size(), pos + hyper.batch_size);
      for (std::size_t k = pos; k < batch_end; ++k) {
        const Instance& inst = instances[order[k]];
        loss_sum += model.train_instance(inst.input, inst.gold);
        ++seen;
      }
      scale_grads(params, 1.0 / static_cast<double>(batch_end - pos));
      clip_global_norm(params, hyper.clip_norm);
      adam_step(params, adam);
    }
    EpochStat stat;
    stat.epoch = epoch;
    stat.mean_loss = seen > 0 ? loss_sum / static_cast<double>(seen) : 0.0;
    stat.dev_metric = eval_dev();
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
                       {"dev_f1", stat.dev_metric},
                       {"best", stat.is_best}};
      log(j.dump());
    }
    if (stat.dev_metric >= 1.0 - 1e-9) break;                       // cannot improve
    if (epoch - result.best_epoch >= hyper.patience) break;         // flat
  }

  for (std::size_t i = 0; i < params.size(); ++i) {
    params[i]->value = best_values[i];
    params[i]->zero_grad();
  }
  return result;
}

}  // namespace measex
