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

#include "unitmods/unitmods.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "corpus/utf8.hpp"
#include "netcore/checkpoint.hpp"

namespace measex {

std::vector<std::string> default_modifier_labels() {
  return {"IsCount",       "IsApproximate",      "IsMean",
          "IsMedian",      "IsRange",            "IsList",
          "HasTolerance",  "IsMeanHasTolerance", "IsMeanHasSD",
          "IsRangeHasTolerance", "Other"};
}

nlohmann::json UnitModsConfig::to_json() const {
  return {{"char_embed", char_embed}, {"hidden", hidden},
          {"layers", layers},         {"shared_trunk", shared_trunk},
          {"threshold", threshold},   {"labels", labels}};
}

UnitModsConfig UnitModsConfig::from_json(const nlohmann::json& j) {
  UnitModsConfig c;
  c.char_embed = j.at("char_embed").get<std::size_t>();
  c.hidden = j.at("hidden").get<std::size_t>();
  c.layers = j.at("layers").get<std::size_t>();
  c.shared_trunk = j.at("shared_trunk").get<bool>();
  c.threshold = j.at("threshold").get<double>();
  c.labels = j.at("labels").get<std::vector<std::string>>();
  return c;
}

std::optional<Span> locate_unit(const std::string& surface,
                                const std::string& unit) {
  if (unit.empty()) return std::nullopt;
  const auto hay = utf8_decode(surface);
  const auto needle = utf8_decode(unit);
  if (needle.empty() || needle.size() > hay.size()) return std::nullopt;
  for (std::size_t i = 0; i + needle.size() <= hay.size(); ++i) {
    if (std::equal(needle.begin(), needle.end(), hay.begin() + static_cast<long>(i))) {
      return Span{i, i + needle.size()};
    }
  }
  return std::nullopt;
}

UnitModsModel::UnitModsModel(const UnitModsConfig& cfg,
                             const std::vector<QuantityRecord>& train_records,
                             std::uint64_t seed)
    : cfg_(cfg) {
  std::set<std::string> chars;
  for (const auto& r : train_records) {
    for (char32_t cp : utf8_decode(r.surface)) {
      std::string s;
      utf8_append(s, cp);
      chars.insert(Vocab::normalize(s));
    }
  }
  for (const auto& c : chars) char_vocab_.add(c);

  Rng rng(Rng::mix(seed, 0x4171));
  emb_unit_ = EmbeddingParams("unit/char_emb", char_vocab_.size(), cfg_.char_embed);
  trunk_unit_ = BiLstmParams("unit/lstm", cfg_.char_embed, cfg_.hidden, cfg_.layers);
  unit_head_ = LinearParams("unit/head", 2 * cfg_.hidden, kNumTags);
  emb_unit_.init(rng);
  trunk_unit_.init(rng);
  unit_head_.init(rng);
  if (!cfg_.shared_trunk) {
    emb_mods_ = EmbeddingParams("mods/char_emb", char_vocab_.size(), cfg_.char_embed);
    trunk_mods_ = BiLstmParams("mods/lstm", cfg_.char_embed, cfg_.hidden, cfg_.layers);
    emb_mods_.init(rng);
    trunk_mods_.init(rng);
  }
  mods_head_ = LinearParams("mods/head", 2 * cfg_.hidden, cfg_.labels.size());
  mods_head_.init(rng);
}

UnitModsModel::UnitModsModel(const std::string& checkpoint_path) {
  std::ifstream is(checkpoint_path + ".json");
  if (!is) throw CheckpointError("missing sidecar: " + checkpoint_path + ".json");
  const nlohmann::json side = nlohmann::json::parse(is);
  cfg_ = UnitModsConfig::from_json(side.at("config"));
  char_vocab_ = Vocab::from_json(side.at("char_vocab"));

  emb_unit_ = EmbeddingParams("unit/char_emb", char_vocab_.size(), cfg_.char_embed);
  trunk_unit_ = BiLstmParams("unit/lstm", cfg_.char_embed, cfg_.hidden, cfg_.layers);
  unit_head_ = LinearParams("unit/head", 2 * cfg_.hidden, kNumTags);
  if (!cfg_.shared_trunk) {
    emb_mods_ = EmbeddingParams("mods/char_emb", char_vocab_.size(), cfg_.char_embed);
    trunk_mods_ = BiLstmParams("mods/lstm", cfg_.char_embed, cfg_.hidden, cfg_.layers);
  }
  mods_head_ = LinearParams("mods/head", 2 * cfg_.hidden, cfg_.labels.size());

  std::vector<ParamTensor*> params;
  collect(params);
  load_checkpoint(checkpoint_path, params);
}

void UnitModsModel::collect(std::vector<ParamTensor*>& out) {
  emb_unit_.collect(out);
  trunk_unit_.collect(out);
  unit_head_.collect(out);
  if (!cfg_.shared_trunk) {
    emb_mods_.collect(out);
    trunk_mods_.collect(out);
  }
  mods_head_.collect(out);
}

void UnitModsModel::save(const std::string& checkpoint_path) const {
  auto* self = const_cast<UnitModsModel*>(this);
  std::vector<ParamTensor*> params;
  self->collect(params);
  std::vector<const ParamTensor*> cparams(params.begin(), params.end());
  save_checkpoint(checkpoint_path, cparams);

  nlohmann::json side;
  side["config"] = cfg_.to_json();
  side["char_vocab"] = char_vocab_.to_json();
  std::ofstream os(checkpoint_path + ".json", std::ios::trunc);
  os << side.dump(2) << '\n';
}

std::vector<int> UnitModsModel::char_ids(const std::string& surface) const {
  std::vector<int> ids;
  for (char32_t cp : utf8_decode(surface)) {
    std::string s;
    utf8_append(s, cp);
    ids.push_back(char_vocab_.lookup(s));
  }
  return ids;
}

Matrix UnitModsModel::trunk_forward(bool mods_side, const std::vector<int>& ids,
                                    BiLstmCtx* ctx, Matrix* emb) const {
  const bool use_mods = mods_side && !cfg_.shared_trunk;
  const EmbeddingParams& e = use_mods ? emb_mods_ : emb_unit_;
  const BiLstmParams& t = use_mods ? trunk_mods_ : trunk_unit_;
  Matrix ce = embedding_forward(e, ids);
  if (emb != nullptr) *emb = ce;
  return bilstm_forward(t, ce, ctx);
}

std::optional<UnitSpan> UnitModsModel::extract_unit(const std::string& surface) const {
  const auto ids = char_ids(surface);
  if (ids.empty()) return std::nullopt;
  const Matrix hs = trunk_forward(false, ids, nullptr, nullptr);
  const Matrix logits = linear_forward(unit_head_, hs, /*relu=*/false, nullptr);
  // Per-char argmax; ties keep the lowest tag index (B before I before O).
  std::size_t b = ids.size();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const double* row = logits.row(i);
    std::size_t best = 0;
    for (std::size_t k = 1; k < kNumTags; ++k) {
      if (row[k] > row[best]) best = k;
    }
    if (best == static_cast<std::size_t>(Tag::B)) {
      b = i;
      break;
    }
  }
  if (b == ids.size()) return std::nullopt;
  std::size_t e = b + 1;
  while (e < ids.size()) {
    const double* row = logits.row(e);
    std::size_t best = 0;
    for (std::size_t k = 1; k < kNumTags; ++k) {
      if (row[k] > row[best]) best = k;
    }
    if (best != static_cast<std::size_t>(Tag::I)) break;
    ++e;
  }
  return UnitSpan{utf8_slice(surface, b, e), b, e};
}

ModifierSet UnitModsModel::classify_mods(const std::string& surface) const {
  const auto ids = char_ids(surface);
  ModifierSet out;
  out.probs.assign(cfg_.labels.size(), 0.0);
  out.selected.assign(cfg_.labels.size(), false);
  if (ids.empty()) return out;
  const Matrix hs = trunk_forward(true, ids, nullptr, nullptr);
  std::vector<double> pooled(hs.cols, 0.0);
  for (std::size_t r = 0; r < hs.rows; ++r) {
    for (std::size_t c = 0; c < hs.cols; ++c) pooled[c] += hs.at(r, c);
  }
  for (double& v : pooled) v /= static_cast<double>(hs.rows);
  Matrix pm(1, hs.cols);
  pm.data = pooled;
  const Matrix logits = linear_forward(mods_head_, pm, /*relu=*/false, nullptr);
  for (std::size_t i = 0; i < cfg_.labels.size(); ++i) {
    out.probs[i] = sigmoid(logits.at(0, i));
    out.selected[i] = out.probs[i] > cfg_.threshold;
  }
  return out;
}

std::vector<std::string> UnitModsModel::selected_labels(const ModifierSet& set) const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < set.selected.size(); ++i) {
    if (set.selected[i]) out.push_back(cfg_.labels[i]);
  }
  return out;
}

std::pair<double, bool> UnitModsModel::train_record(const QuantityRecord& record) {
  const auto ids = char_ids(record.surface);
  if (ids.empty()) return {0.0, false};
  const std::size_t n = ids.size();

  double loss = 0.0;
  bool unit_trained = false;

  // Gold char tags: all O unless the unit string occurs in the surface.
  const auto span = locate_unit(record.surface, record.unit);
  const bool trainable_unit = record.unit.empty() || span.has_value();

  Matrix d_hs_unit;  // gradient into the unit trunk output
  BiLstmCtx unit_ctx;
  Matrix unit_emb;
  const Matrix hs_u = trunk_forward(false, ids, &unit_ctx, &unit_emb);
  if (trainable_unit) {
    unit_trained = true;
    std::vector<int> tags(n, static_cast<int>(Tag::O));
    if (span.has_value()) {
      tags[span->start] = static_cast<int>(Tag::B);
      for (std::size_t i = span->start + 1; i < span->end; ++i) {
        tags[i] = static_cast<int>(Tag::I);
      }
    }
    LinearCtx head_ctx;
    const Matrix logits = linear_forward(unit_head_, hs_u, false, &head_ctx);
    Matrix dlogits(n, kNumTags);
    double unit_loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      unit_loss += softmax_xent(logits.row(i), kNumTags,
                                static_cast<std::size_t>(tags[i]), dlogits.row(i));
    }
    const double inv = 1.0 / static_cast<double>(n);
    for (double& v : dlogits.data) v *= inv;
    loss += unit_loss * inv;
    d_hs_unit = linear_backward(unit_head_, head_ctx, dlogits, false);
  }

  // Modifier head on the mean-pooled trunk states.
  std::vector<double> targets(cfg_.labels.size(), 0.0);
  for (const auto& label : record.mods) {
    const auto it = std::find(cfg_.labels.begin(), cfg_.labels.end(), label);
    if (it == cfg_.labels.end()) {
      throw ParseError("modifier label '" + label + "' missing from the inventory");
    }
    targets[static_cast<std::size_t>(it - cfg_.labels.begin())] = 1.0;
  }

  BiLstmCtx mods_ctx;
  Matrix mods_emb;
  const Matrix hs_m = cfg_.shared_trunk ? hs_u : trunk_forward(true, ids, &mods_ctx, &mods_emb);
  const std::size_t width = hs_m.cols;
  Matrix pooled(1, width);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < width; ++c) pooled.at(0, c) += hs_m.at(r, c);
  }
  for (double& v : pooled.data) v /= static_cast<double>(n);

  LinearCtx mods_head_ctx;
  const Matrix mlogits = linear_forward(mods_head_, pooled, false, &mods_head_ctx);
  Matrix dmlogits(1, cfg_.labels.size());
  loss += sigmoid_bce(mlogits.row(0), targets.data(), cfg_.labels.size(),
                      dmlogits.row(0));
  const Matrix dpooled = linear_backward(mods_head_, mods_head_ctx, dmlogits, false);
  Matrix d_hs_mods(n, width);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      d_hs_mods.at(r, c) = dpooled.at(0, c) * inv_n;
    }
  }

  if (cfg_.shared_trunk) {
    if (d_hs_unit.rows > 0) {
      for (std::size_t i = 0; i < d_hs_mods.data.size(); ++i) {
        d_hs_mods.data[i] += d_hs_unit.data[i];
      }
    }
    const Matrix demb = bilstm_backward(trunk_unit_, unit_ctx, d_hs_mods);
    embedding_backward(emb_unit_, ids, demb);
  } else {
    if (d_hs_unit.rows > 0) {
      const Matrix demb_u = bilstm_backward(trunk_unit_, unit_ctx, d_hs_unit);
      embedding_backward(emb_unit_, ids, demb_u);
    }
    const Matrix demb_m = bilstm_backward(trunk_mods_, mods_ctx, d_hs_mods);
    embedding_backward(emb_mods_, ids, demb_m);
  }
  return {loss, unit_trained};
}

std::vector<QuantityRecord> quantity_records(const Corpus& corpus,
                                             const std::vector<std::size_t>& docs) {
  std::vector<QuantityRecord> out;
  for (std::size_t di : docs) {
    for (const auto& a : corpus.docs[di].annotations) {
      if (a.kind != AnnotKind::Quantity) continue;
      QuantityRecord r;
      r.surface = a.surface;
      if (a.payload.has_value()) {
        r.unit = a.payload->unit;
        r.mods = a.payload->mods;
      }
      out.push_back(std::move(r));
    }
  }
  return out;
}

UnitModsEval eval_unitmods(const UnitModsModel& model,
                           const std::vector<QuantityRecord>& records) {
  UnitModsEval e;
  if (records.empty()) return e;
  std::size_t unit_hits = 0;
  double tp = 0, fp = 0, fn = 0;
  for (const auto& r : records) {
    const auto pred = model.extract_unit(r.surface);
    const std::string pred_unit = pred.has_value() ? pred->text : "";
    if (pred_unit == r.unit) ++unit_hits;

    const ModifierSet set = model.classify_mods(r.surface);
    const auto selected = model.selected_labels(set);
    for (const auto& label : selected) {
      if (std::find(r.mods.begin(), r.mods.end(), label) != r.mods.end()) {
        tp += 1;
      } else {
        fp += 1;
      }
    }
    for (const auto& label : r.mods) {
      if (std::find(selected.begin(), selected.end(), label) == selected.end()) {
        fn += 1;
      }
    }
  }
  e.unit_exact = static_cast<double>(unit_hits) / static_cast<double>(records.size());
  const double denom = 2 * tp + fp + fn;
  e.mods_micro_f1 = denom > 0 ? 2 * tp / denom : 1.0;
  e.combined = (e.unit_exact + e.mods_micro_f1) / 2.0;
  return e;
}

TrainResult train_unitmods(UnitModsModel& model,
                           const std::vector<QuantityRecord>& train_records,
                           const std::vector<QuantityRecord>& dev_records,
                           const TrainHyper& hyper, const TrainLogger& log,
                           UnitModsStats* stats) {
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

  Rng shuffle_rng(Rng::mix(hyper.seed, 0x0d5));
  std::vector<std::size_t> order(train_records.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (std::size_t epoch = 1; epoch <= hyper.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double loss_sum = 0.0;
    std::size_t trained = 0, skipped = 0;
    for (std::size_t pos = 0; pos < order.size(); pos += hyper.batch_size) {
      const std::size_t batch_end = std::min(order.size(), pos + hyper.batch_size);
      for (std::size_t k = pos; k < batch_end; ++k) {
        const auto [loss, unit_trained] = model.train_record(train_records[order[k]]);
        loss_sum += loss;
        unit_trained ? ++trained : ++skipped;
      }
      scale_grads(params, 1.0 / static_cast<double>(batch_end - pos));
      clip_global_norm(params, hyper.clip_norm);
      adam_step(params, adam);
    }
    if (stats != nullptr && epoch == 1) {
      stats->unit_trained = trained;
      stats->unit_skipped = skipped;
    }
    const UnitModsEval ev = eval_unitmods(model, dev_records);
    EpochStat stat;
    stat.epoch = epoch;
    stat.mean_loss = train_records.empty()
                         ? 0.0
                         : loss_sum / static_cast<double>(train_records.size());
    stat.dev_metric = ev.combined;
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
                       {"dev_unit_exact", ev.unit_exact},
                       {"dev_mods_micro_f1", ev.mods_micro_f1},
                       {"dev_combined", ev.combined},
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

}  // namespace measex
