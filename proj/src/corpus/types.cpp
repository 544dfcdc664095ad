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

#include "corpus/types.hpp"

#include <algorithm>
#include <map>

#include "corpus/utf8.hpp"

namespace measex {

const char* to_string(AnnotKind k) {
  switch (k) {
    case AnnotKind::Quantity: return "Quantity";
    case AnnotKind::MeasuredEntity: return "MeasuredEntity";
    case AnnotKind::MeasuredProperty: return "MeasuredProperty";
    case AnnotKind::Qualifier: return "Qualifier";
  }
  return "?";
}

AnnotKind annot_kind_from_string(const std::string& s) {
  if (s == "Quantity") return AnnotKind::Quantity;
  if (s == "MeasuredEntity") return AnnotKind::MeasuredEntity;
  if (s == "MeasuredProperty") return AnnotKind::MeasuredProperty;
  if (s == "Qualifier") return AnnotKind::Qualifier;
  throw ParseError("unknown annotType '" + s + "'");
}

const char* to_string(RelationKind k) {
  switch (k) {
    case RelationKind::HasQuantity: return "HasQuantity";
    case RelationKind::HasProperty: return "HasProperty";
    case RelationKind::Qualifies: return "Qualifies";
  }
  return "?";
}

const DocEntry* Corpus::find(const std::string& doc_id) const {
  for (const auto& d : docs) {
    if (d.doc.doc_id == doc_id) return &d;
  }
  return nullptr;
}

namespace {

bool endpoints_legal(RelationKind kind, AnnotKind src, AnnotKind tgt) {
  switch (kind) {
    case RelationKind::HasQuantity:
      return (src == AnnotKind::MeasuredProperty || src == AnnotKind::MeasuredEntity) &&
             tgt == AnnotKind::Quantity;
    case RelationKind::HasProperty:
      return src == AnnotKind::MeasuredEntity && tgt == AnnotKind::MeasuredProperty;
    case RelationKind::Qualifies:
      return src == AnnotKind::Qualifier &&
             (tgt == AnnotKind::Quantity || tgt == AnnotKind::MeasuredEntity ||
              tgt == AnnotKind::MeasuredProperty);
  }
  return false;
}

}  // namespace

void validate_entry(const DocEntry& entry) {
  const std::string& id = entry.doc.doc_id;
  if (entry.doc.text.empty()) throw ParseError("document '" + id + "' has empty text");

  const Utf8View view(entry.doc.text);
  std::map<std::string, AnnotKind> kinds;
  for (const Annotation& a : entry.annotations) {
    if (a.span.start >= a.span.end || a.span.end > view.size()) {
      throw OffsetOutOfRange("annotation " + a.annot_id + " in '" + id + "': [" +
                             std::to_string(a.span.start) + "," +
                             std::to_string(a.span.end) + ") of " +
                             std::to_string(view.size()));
    }
    const std::string sliced = view.slice(entry.doc.text, a.span.start, a.span.end);
    if (sliced != a.surface) {
      throw SurfaceMismatch("annotation " + a.annot_id + " in '" + id + "': '" +
                            a.surface + "' vs document slice '" + sliced + "'");
    }
    if (a.payload.has_value() && a.kind != AnnotKind::Quantity) {
      throw ParseError("annotation " + a.annot_id + ": unit/mods on non-Quantity row");
    }
    if (!kinds.emplace(a.annot_id, a.kind).second) {
      throw ParseError("duplicate annotId '" + a.annot_id + "' in '" + id + "'");
    }
  }
  for (const Relation& r : entry.relations) {
    if (r.source == r.target) {
      throw ParseError("self relation on '" + r.source + "'");
    }
    const auto src = kinds.find(r.source);
    const auto tgt = kinds.find(r.target);
    if (src == kinds.end()) throw DanglingRelation("missing source '" + r.source + "' in '" + id + "'");
    if (tgt == kinds.end()) throw DanglingRelation("missing target '" + r.target + "' in '" + id + "'");
    if (!endpoints_legal(r.kind, src->second, tgt->second)) {
      throw ParseError(std::string("illegal ") + to_string(r.kind) + " edge " +
                       r.source + " -> " + r.target + " in '" + id + "'");
    }
  }
}

}  // namespace measex
