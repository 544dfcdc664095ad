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

#include "synthgen/synthgen.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "corpus/utf8.hpp"
#include "netcore/rng.hpp"
#include "unitmods/unitmods.hpp"

namespace measex {

namespace {

// ---------------------------------------------------------------------------
// Lexicons

const std::vector<std::string> kEntities = {
    "steel beam",      "copper wire",     "water sample",   "granite slab",
    "polymer membrane","aluminium rod",   "glass capillary","soil core",
    "silicon wafer",   "titanium plate",  "carbon filament","cement block",
    "fuel cell",       "graphite anode",  "quartz crystal", "rubber gasket",
    "sediment column", "nickel coating",  "plasma chamber", "ceramic tile",
    "optical fibre",   "battery pack",    "leaf specimen",  "ice core",
    "alloy ingot",     "protein solution","catalyst bed",   "solar panel",
    "bacterial culture","concrete pillar"};

const std::vector<std::string> kProperties = {
    "mass",            "length",          "width",          "thickness",
    "temperature",     "density",         "tensile strength","conductivity",
    "viscosity",       "hardness",        "porosity",       "resistance",
    "capacitance",     "salinity",        "acidity",        "humidity",
    "elasticity",      "luminosity",      "pressure",       "volume"};

const std::vector<std::string> kAreaProperties = {"surface area", "cross section",
                                                  "footprint"};

const std::vector<std::string> kUnits = {"kg", "g",  "mg",  "m",   "cm", "mm",
                                         "km", "s",  "ms",  "MPa", "Pa", "K",
                                         "°C", "µm", "mol", "Hz",  "V",  "A",
                                         "N",  "J",  "W",   "%"};

const std::vector<std::string> kCountNouns = {"samples",  "trials",   "specimens",
                                              "readings", "segments", "batches",
                                              "cycles",   "replicates"};

// Qualifier phrasing is keyed to its attachment so the wording itself tells
// the QA model which question the phrase answers.
const std::vector<std::string> kQualQuantity = {
    "at room temperature", "under ambient pressure",  "at sea level",
    "during the initial phase", "after calibration",  "in dry conditions",
    "at peak load"};
const std::vector<std::string> kQualEntity = {
    "from the northern site",  "collected in the field", "from the second batch",
    "supplied by the vendor",  "stored in the archive",  "from the pilot plant"};
const std::vector<std::string> kQualProperty = {
    "according to the standard protocol", "as defined by the revised method",
    "per the reference procedure",        "following the updated guideline"};

const std::vector<std::string> kPropPatterns = {
    "The PROP of the ENT was QTYQUAL.",
    "The PROP of the ENT reached QTYQUAL.",
    "Researchers found that the PROP of the ENT was QTYQUAL.",
    "In the experiment, the PROP of the ENT measured QTYQUAL.",
};
const std::vector<std::string> kDirectPatterns = {
    "The ENT yielded QTYQUAL.",
    "The ENT showed a reading of QTYQUAL.",
    "Each ENT required QTYQUAL.",
    "The ENT recorded QTYQUAL.",
};
const std::vector<std::string> kCountPatterns = {
    "The ENT included QTY NOUNQUAL.",
    "The ENT comprised QTY NOUNQUAL.",
};

// Pseudo-word vocabulary for distractor prose (~8k forms).
std::vector<std::string> build_filler_vocab() {
  static const std::vector<std::string> onset = {
      "ba", "ce", "di", "fo", "gu", "ha", "ji", "ko", "lu", "me",
      "no", "pa", "qui", "ro", "su", "ta", "ve", "wo", "xi", "za"};
  static const std::vector<std::string> mid = {
      "lan", "ber", "tir", "mon", "des", "ral", "pin", "sot", "ken", "fur",
      "gal", "hem", "vik", "nor", "pel", "rud", "sam", "tol", "wen", "yor"};
  static const std::vector<std::string> coda = {
      "ic", "al", "on", "ure", "ent", "ism", "ate", "or", "ine", "ous",
      "ary", "ive", "age", "ity", "ex", "um", "ia", "esc", "ond", "ul"};
  std::set<std::string> taboo;
  for (const auto& e : kEntities) {
    for (const auto& t : tokenize_text(e)) taboo.insert(t.surface);
  }
  for (const auto& p : kProperties) {
    for (const auto& t : tokenize_text(p)) taboo.insert(t.surface);
  }
  std::vector<std::string> vocab;
  vocab.reserve(8000);
  for (const auto& a : onset) {
    for (const auto& b : mid) {
      for (const auto& c : coda) {
        if (vocab.size() >= 8000) return vocab;
        std::string w = a + b + c;
        if (!taboo.count(w)) vocab.push_back(std::move(w));
      }
    }
  }
  return vocab;
}

// ---------------------------------------------------------------------------
// Quantity realizations. Each form yields the text to embed, the quantity
// span within it, the (possibly context-only) unit and the label set.

struct QtyRealization {
  std::string text;          // e.g. "a mean of 5 kg"
  std::size_t span_begin = 0;  // scalar offset of the quantity span in text
  std::size_t span_end = 0;
  std::string unit;
  std::vector<std::string> mods;
  bool unit_in_surface = true;
  bool is_count = false;
};

struct FormDef {
  std::string name;
  std::vector<std::string> labels;
};

// The eleven modifier labels are covered by these twelve forms (plain and
// area carry no labels and are scheduled separately).
const std::vector<FormDef> kLabelForms = {
    {"approx", {"IsApproximate"}},
    {"count", {"IsCount"}},
    {"approx_count", {"IsApproximate", "IsCount"}},
    {"mean", {"IsMean"}},
    {"median", {"IsMedian"}},
    {"range", {"IsRange"}},
    {"list", {"IsList"}},
    {"tol", {"HasTolerance"}},
    {"mean_tol", {"IsMeanHasTolerance"}},
    {"mean_sd", {"IsMeanHasSD"}},
    {"range_tol", {"IsRangeHasTolerance"}},
    {"other", {"Other"}},
};

std::string format_value(Rng& rng, std::set<std::string>& used) {
  for (int attempt = 0; attempt < 64; ++attempt) {
    std::string v;
    if (rng.below(3) == 0) {
      const double x = (1.0 + static_cast<double>(rng.below(8999))) / 10.0;
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.1f", x);
      v = buf;
    } else {
      v = std::to_string(1 + rng.below(9000));
    }
    if (!used.count(v)) {
      used.insert(v);
      return v;
    }
  }
  throw InfeasibleSpec("value space exhausted within one document");
}

std::string small_value(Rng& rng) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "0.%zu", 1 + rng.below(9));
  return buf;
}

QtyRealization realize(const std::string& form, Rng& rng,
                       std::set<std::string>& used_values) {
  QtyRealization r;
  const std::string v = format_value(rng, used_values);
  const std::string u = kUnits[rng.below(kUnits.size())];
  static const std::vector<std::string> kApprox = {"approximately", "about",
                                                   "roughly", "around", "nearly"};
  const auto span_all = [&](const std::string& text) {
    r.text = text;
    r.span_begin = 0;
    r.span_end = utf8_length(text);
  };
  if (form == "plain") {
    span_all(v + " " + u);
    r.unit = u;
  } else if (form == "approx") {
    span_all(kApprox[rng.below(kApprox.size())] + " " + v + " " + u);
    r.unit = u;
    r.mods = {"IsApproximate"};
  } else if (form == "count") {
    span_all(v);
    r.mods = {"IsCount"};
    r.is_count = true;
  } else if (form == "approx_count") {
    span_all(kApprox[rng.below(kApprox.size())] + " " + v);
    r.mods = {"IsApproximate", "IsCount"};
    r.is_count = true;
  } else if (form == "mean" || form == "median") {
    const std::string head = form == "mean" ? "mean" : "median";
    r.text = "a " + head + " of " + v + " " + u;
    r.span_begin = 2;  // skip "a "
    r.span_end = utf8_length(r.text);
    r.unit = u;
    r.mods = {form == "mean" ? "IsMean" : "IsMedian"};
  } else if (form == "range") {
    const std::string v2 = format_value(rng, used_values);
    span_all("between " + v + " and " + v2 + " " + u);
    r.unit = u;
    r.mods = {"IsRange"};
  } else if (form == "list") {
    const std::string v2 = format_value(rng, used_values);
    const std::string v3 = format_value(rng, used_values);
    span_all(v + ", " + v2 + ", and " + v3 + " " + u);
    r.unit = u;
    r.mods = {"IsList"};
  } else if (form == "tol") {
    span_all(v + " ± " + small_value(rng) + " " + u);
    r.unit = u;
    r.mods = {"HasTolerance"};
  } else if (form == "mean_tol") {
    r.text = "a mean of " + v + " ± " + small_value(rng) + " " + u;
    r.span_begin = 2;
    r.span_end = utf8_length(r.text);
    r.unit = u;
    r.mods = {"IsMeanHasTolerance"};
  } else if (form == "mean_sd") {
    r.text = "a mean of " + v + " " + u + " (SD " + small_value(rng) + ")";
    r.span_begin = 2;
    r.span_end = utf8_length(r.text);
    r.unit = u;
    r.mods = {"IsMeanHasSD"};
  } else if (form == "range_tol") {
    const std::string v2 = format_value(rng, used_values);
    const std::string t = small_value(rng);
    span_all("between " + v + " ± " + t + " and " + v2 + " ± " + t + " " + u);
    r.unit = u;
    r.mods = {"IsRangeHasTolerance"};
  } else if (form == "other") {
    span_all("on the order of " + v + " " + u);
    r.unit = u;
    r.mods = {"Other"};
  } else if (form == "area") {
    const std::string v2 = format_value(rng, used_values);
    span_all(v + " m x " + v2 + " m");
    r.unit = "m²";  // inferred from context, never a surface substring
    r.unit_in_surface = false;
  } else {
    throw InfeasibleSpec("unknown quantity form: " + form);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Document assembly with scalar-offset tracking.

struct DocBuilder {
  std::string text;
  std::size_t cp = 0;

  // Appends and returns the scalar span the piece occupies.
  Span append(const std::string& piece) {
    const std::size_t len = utf8_length(piece);
    text += piece;
    const Span s{cp, cp + len};
    cp += len;
    return s;
  }
};

struct Scheduler {
  std::map<std::string, std::size_t> label_counts;
  std::size_t property_count = 0, direct_count = 0;
  std::map<std::string, std::size_t> qual_targets{
      {"Quantity", 0}, {"MeasuredEntity", 0}, {"MeasuredProperty", 0}};

  explicit Scheduler() {
    for (const auto& l : default_modifier_labels()) label_counts[l] = 0;
  }

  std::string pick_form(Rng& rng, bool allow_area, double area_frac) {
    if (allow_area && rng.uniform() < area_frac) return "area";
    if (rng.uniform() < 0.15) return "plain";
    // Least-covered label first; random tie-break among its forms.
    std::string label;
    std::size_t best = SIZE_MAX;
    for (const auto& [l, c] : label_counts) {
      if (c < best) {
        best = c;
        label = l;
      }
    }
    std::vector<const FormDef*> options;
    for (const auto& f : kLabelForms) {
      if (std::find(f.labels.begin(), f.labels.end(), label) != f.labels.end()) {
        options.push_back(&f);
      }
    }
    const FormDef* chosen = options[rng.below(options.size())];
    for (const auto& l : chosen->labels) label_counts[l] += 1;
    return chosen->name;
  }

  bool pick_property_form(Rng& rng) {
    bool prop;
    if (property_count == direct_count) {
      prop = rng.below(2) == 0;
    } else {
      prop = property_count < direct_count;
    }
    (prop ? property_count : direct_count) += 1;
    return prop;
  }

  std::string pick_qual_target(Rng& rng, bool has_property) {
    std::vector<std::string> options = {"Quantity", "MeasuredEntity"};
    if (has_property) options.push_back("MeasuredProperty");
    std::sort(options.begin(), options.end(), [&](const auto& a, const auto& b) {
      return qual_targets[a] < qual_targets[b];
    });
    const std::size_t lowest = qual_targets[options[0]];
    std::vector<std::string> tied;
    for (const auto& o : options) {
      if (qual_targets[o] == lowest) tied.push_back(o);
    }
    const std::string target = tied[rng.below(tied.size())];
    qual_targets[target] += 1;
    return target;
  }
};

}  // namespace

nlohmann::json GenStats::to_json() const {
  nlohmann::json j;
  j["label_counts"] = label_counts;
  j["property_sentences"] = property_sentences;
  j["direct_sentences"] = direct_sentences;
  j["qualifier_targets"] = qualifier_targets;
  j["long_docs"] = long_docs;
  j["quantities"] = quantities;
  j["context_unit_quantities"] = context_unit_quantities;
  j["avg_words_per_doc"] = avg_words_per_doc;
  j["required_per_bucket"] = required_per_bucket;
  return j;
}

Corpus generate(const GrammarSpec& spec, GenStats* stats) {
  if (spec.n_docs < 1) throw InfeasibleSpec("n_docs must be >= 1");
  if (kEntities.empty() || kProperties.empty() || kUnits.empty()) {
    throw InfeasibleSpec("empty lexicon");
  }
  const std::vector<std::string> filler = build_filler_vocab();

  Rng root(spec.seed);
  Scheduler sched;
  GenStats local;
  GenStats& st = stats != nullptr ? *stats : local;
  st = GenStats{};
  for (const auto& l : default_modifier_labels()) st.label_counts[l] = 0;
  st.qualifier_targets = {{"Quantity", 0}, {"MeasuredEntity", 0}, {"MeasuredProperty", 0}};

  // Long documents: ceil(frac * n) of them, spread deterministically.
  const std::size_t n_long = static_cast<std::size_t>(
      std::max(0.0, spec.long_doc_frac * static_cast<double>(spec.n_docs) + 0.5));
  std::vector<bool> is_long(spec.n_docs, false);
  {
    Rng pick = root.fork(0xd0c5);
    std::vector<std::size_t> idx(spec.n_docs);
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    pick.shuffle(idx);
    for (std::size_t i = 0; i < std::min(n_long, idx.size()); ++i) is_long[idx[i]] = true;
  }

  Corpus corpus;
  std::size_t total_words = 0;
  char idbuf[64];
  for (std::size_t d = 0; d < spec.n_docs; ++d) {
    Rng rng = root.fork(1000 + d);
    std::snprintf(idbuf, sizeof(idbuf), "%s-%04zu", spec.doc_prefix.c_str(), d + 1);
    DocEntry entry;
    entry.doc.doc_id = idbuf;

    const std::size_t n_meas = is_long[d] ? 10 + rng.below(5) : 2 + rng.below(4);
    const std::size_t n_distract = is_long[d] ? 20 + rng.below(6) : 5 + rng.below(4);
    if (is_long[d]) st.long_docs += 1;

    // Sentence plan: measurement sentences interleaved with distractors.
    std::vector<int> plan;
    for (std::size_t i = 0; i < n_meas; ++i) plan.push_back(1);
    for (std::size_t i = 0; i < n_distract; ++i) plan.push_back(0);
    rng.shuffle(plan);

    DocBuilder builder;
    std::set<std::string> used_values;
    int next_id = 1, next_set = 1;
    const auto new_id = [&]() {
      return entry.doc.doc_id + "-T" + std::to_string(next_id++);
    };

    for (std::size_t si = 0; si < plan.size(); ++si) {
      if (si > 0) builder.append(" ");
      if (plan[si] == 0) {
        // Distractor prose, digit-free.
        const std::size_t words = 8 + rng.below(12);
        std::string s = "The";
        for (std::size_t w = 0; w < words; ++w) {
          s += " " + filler[rng.below(filler.size())];
        }
        s += ".";
        builder.append(s);
        continue;
      }

      const int set = next_set++;
      const std::string form = sched.pick_form(rng, /*allow_area=*/true, spec.area_frac);
      QtyRealization qty = realize(form, rng, used_values);
      const bool property_form = qty.is_count ? false : sched.pick_property_form(rng);
      if (qty.is_count) sched.direct_count += 1;

      const std::string entity = kEntities[rng.below(kEntities.size())];
      const std::string property =
          form == "area" ? kAreaProperties[rng.below(kAreaProperties.size())]
                         : kProperties[rng.below(kProperties.size())];

      const bool with_qual = rng.uniform() < spec.qualifier_frac;
      std::string qual_target_kind;
      std::string qual_phrase;
      if (with_qual) {
        qual_target_kind = sched.pick_qual_target(rng, property_form);
        const auto& lex = qual_target_kind == "Quantity"
                              ? kQualQuantity
                              : (qual_target_kind == "MeasuredEntity" ? kQualEntity
                                                                      : kQualProperty);
        qual_phrase = lex[rng.below(lex.size())];
      }

      // Pattern pieces around the slots.
      std::string pattern;
      if (qty.is_count) {
        pattern = kCountPatterns[rng.below(kCountPatterns.size())];
      } else if (property_form) {
        pattern = kPropPatterns[rng.below(kPropPatterns.size())];
      } else {
        pattern = kDirectPatterns[rng.below(kDirectPatterns.size())];
      }

      Span ent_span{}, prop_span{}, qty_span{}, qual_span{};
      bool have_prop = false, have_qual = false;
      std::size_t pos = 0;
      while (pos < pattern.size()) {
        if (pattern.compare(pos, 4, "PROP") == 0) {
          prop_span = builder.append(property);
          have_prop = true;
          pos += 4;
        } else if (pattern.compare(pos, 3, "ENT") == 0) {
          ent_span = builder.append(entity);
          pos += 3;
        } else if (pattern.compare(pos, 7, "QTYQUAL") == 0 ||
                   pattern.compare(pos, 3, "QTY") == 0) {
          const bool fused = pattern.compare(pos, 7, "QTYQUAL") == 0;
          const Span whole = builder.append(qty.text);
          qty_span = {whole.start + qty.span_begin, whole.start + qty.span_end};
          pos += 3;
          if (fused) {
            if (with_qual) {
              builder.append(" ");
              qual_span = builder.append(qual_phrase);
              have_qual = true;
            }
            pos += 4;
          }
        } else if (pattern.compare(pos, 8, "NOUNQUAL") == 0) {
          builder.append(kCountNouns[rng.below(kCountNouns.size())]);
          if (with_qual) {
            builder.append(" ");
            qual_span = builder.append(qual_phrase);
            have_qual = true;
          }
          pos += 8;
        } else {
          std::size_t next = pattern.size();
          for (const char* token : {"PROP", "ENT", "QTYQUAL", "QTY", "NOUNQUAL"}) {
            const std::size_t p = pattern.find(token, pos);
            next = std::min(next, p == std::string::npos ? pattern.size() : p);
          }
          builder.append(pattern.substr(pos, next - pos));
          pos = next;
        }
      }

      // Annotations + relations for this sentence.
      Annotation q;
      q.annot_id = new_id();
      q.annot_set = set;
      q.kind = AnnotKind::Quantity;
      q.span = qty_span;
      q.payload = QuantityDetail{qty.unit, qty.mods};
      entry.annotations.push_back(q);
      st.quantities += 1;
      if (!qty.unit_in_surface && !qty.unit.empty()) st.context_unit_quantities += 1;

      std::string prop_id;
      if (property_form && have_prop) {
        Annotation p;
        p.annot_id = new_id();
        p.annot_set = set;
        p.kind = AnnotKind::MeasuredProperty;
        p.span = prop_span;
        entry.annotations.push_back(p);
        prop_id = p.annot_id;
        entry.relations.push_back({RelationKind::HasQuantity, prop_id, q.annot_id});
      }
      Annotation e;
      e.annot_id = new_id();
      e.annot_set = set;
      e.kind = AnnotKind::MeasuredEntity;
      e.span = ent_span;
      entry.annotations.push_back(e);
      if (!prop_id.empty()) {
        entry.relations.push_back({RelationKind::HasProperty, e.annot_id, prop_id});
      } else {
        entry.relations.push_back({RelationKind::HasQuantity, e.annot_id, q.annot_id});
      }
      if (have_qual) {
        Annotation ql;
        ql.annot_id = new_id();
        ql.annot_set = set;
        ql.kind = AnnotKind::Qualifier;
        ql.span = qual_span;
        entry.annotations.push_back(ql);
        const std::string target = qual_target_kind == "Quantity"
                                       ? q.annot_id
                                       : (qual_target_kind == "MeasuredEntity"
                                              ? e.annot_id
                                              : prop_id);
        st.qualifier_targets[qual_target_kind] += 1;
        entry.relations.push_back({RelationKind::Qualifies, ql.annot_id, target});
      }
    }

    // Fill in surfaces from the assembled text and validate.
    const Utf8View view(builder.text);
    entry.doc.text = builder.text;
    for (auto& a : entry.annotations) {
      a.surface = view.slice(entry.doc.text, a.span.start, a.span.end);
    }
    validate_entry(entry);
    total_words += tokenize(entry.doc).size();
    corpus.docs.push_back(std::move(entry));
  }

  std::sort(corpus.docs.begin(), corpus.docs.end(),
            [](const DocEntry& a, const DocEntry& b) { return a.doc.doc_id < b.doc.doc_id; });

  st.label_counts = sched.label_counts;
  st.property_sentences = sched.property_count;
  st.direct_sentences = sched.direct_count;
  st.qualifier_targets = sched.qual_targets;
  st.avg_words_per_doc =
      static_cast<double>(total_words) / static_cast<double>(spec.n_docs);
  st.required_per_bucket = std::max<std::size_t>(1, spec.n_docs / 20);

  const std::size_t need = st.required_per_bucket;
  for (const auto& [label, count] : st.label_counts) {
    if (count < need) {
      throw InfeasibleSpec("modifier label '" + label + "' appears " +
                           std::to_string(count) + " < " + std::to_string(need) +
                           " times; increase n_docs");
    }
  }
  for (const auto& [target, count] : st.qualifier_targets) {
    if (count < need) {
      throw InfeasibleSpec("qualifier target '" + target + "' appears " +
                           std::to_string(count) + " < " + std::to_string(need) + " times");
    }
  }
  if (st.property_sentences < need || st.direct_sentences < need) {
    throw InfeasibleSpec("sentence form coverage below " + std::to_string(need));
  }
  return corpus;
}

}  // namespace measex
