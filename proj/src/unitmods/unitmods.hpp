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

#ifndef MEASEX_UNITMODS_UNITMODS_HPP_
#define MEASEX_UNITMODS_UNITMODS_HPP_

#include <optional>
#include <string>
#include <vector>

#include "netcore/layers.hpp"
#include "tagger/encoder.hpp"
#include "tagger/tagger.hpp"

namespace measex {

// The eleven-label value-modifier inventory (configurable).
std::vector<std::string> default_modifier_labels();

struct UnitModsConfig {
  std::size_t char_embed = 32;
  std::size_t hidden = 64;
  std::size_t layers = 2;
  bool shared_trunk = false;  // one BiLSTM feeding both heads
  double threshold = 0.5;     // strict > for label selection
  std::vector<std::string> labels = default_modifier_labels();

  nlohmann::json to_json() const;
  static UnitModsConfig from_json(const nlohmann::json& j);
};

struct QuantityRecord {
  std::string surface;
  std::string unit;  // empty when the quantity has no unit
  std::vector<std::string> mods;
};

struct UnitSpan {
  std::string text;
  std::size_t start = 0, end = 0;  // scalar offsets within the surface
};

struct ModifierSet {
  std::vector<double> probs;   // one per label, in (0,1)
  std::vector<bool> selected;  // probs[i] > threshold
};

// Scalar-offset span of the annotated unit inside the quantity surface
// (first occurrence), or nullopt when the unit string does not occur there
// (context-inferred units are untrainable for a surface-only tagger).
std::optional<Span> locate_unit(const std::string& surface,
                                const std::string& unit);

// Character-level models for subtask 2: per-char IOB unit tagging and
// mean-pooled eleven-way sigmoid modifier classification.
class UnitModsModel {
 public:
  UnitModsModel(const UnitModsConfig& cfg,
                const std::vector<QuantityRecord>& train_records,
                std::uint64_t seed);
  explicit UnitModsModel(const std::string& checkpoint_path);

  // Per-char argmax IOB decode (no CRF); first maximal B I* run, if any.
  std::optional<UnitSpan> extract_unit(const std::string& surface) const;

  // sigmoid(W . mean(h_1..h_n) + b); selection is strict > threshold.
  ModifierSet classify_mods(const std::string& surface) const;
  std::vector<std::string> selected_labels(const ModifierSet& set) const;

  // Accumulates gradients for both heads; returns (loss, unit_trained).
  std::pair<double, bool> train_record(const QuantityRecord& record);

  void collect(std::vector<ParamTensor*>& out);
  void save(const std::string& checkpoint_path) const;
  const UnitModsConfig& config() const { return cfg_; }

 private:
  std::vector<int> char_ids(const std::string& surface) const;
  Matrix trunk_forward(bool mods_side, const std::vector<int>& ids,
                       BiLstmCtx* ctx, Matrix* emb) const;

  UnitModsConfig cfg_;
  Vocab char_vocab_;
  EmbeddingParams emb_unit_, emb_mods_;
  BiLstmParams trunk_unit_, trunk_mods_;
  LinearParams unit_head_;  // 2H -> 3 IOB logits per char
  LinearParams mods_head_;  // 2H -> |labels| from the pooled state
};

struct UnitModsStats {
  std::size_t unit_trained = 0;
  std::size_t unit_skipped = 0;  // annotated unit absent from the surface
};

// Gold quantity records of a corpus (one per Quantity annotation).
std::vector<QuantityRecord> quantity_records(const Corpus& corpus,
                                             const std::vector<std::size_t>& docs);

// Dev metric: mean of unit exact-match rate and modifier micro-F1.
struct UnitModsEval {
  double unit_exact = 0.0;
  double mods_micro_f1 = 0.0;
  double combined = 0.0;
};
UnitModsEval eval_unitmods(const UnitModsModel& model,
                           const std::vector<QuantityRecord>& records);

TrainResult train_unitmods(UnitModsModel& model,
                           const std::vector<QuantityRecord>& train_records,
                           const std::vector<QuantityRecord>& dev_records,
                           const TrainHyper& hyper, const TrainLogger& log,
                           UnitModsStats* stats = nullptr);

}  // namespace measex

#endif  // MEASEX_UNITMODS_UNITMODS_HPP_
