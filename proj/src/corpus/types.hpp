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

#ifndef MEASEX_CORPUS_TYPES_HPP_
#define MEASEX_CORPUS_TYPES_HPP_

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace measex {

// ---------------------------------------------------------------------------
// Errors

struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& what)
      : std::runtime_error("ParseError: " + what) {}
};

struct OffsetOutOfRange : std::runtime_error {
  explicit OffsetOutOfRange(const std::string& what)
      : std::runtime_error("OffsetOutOfRange: " + what) {}
};

struct DanglingRelation : std::runtime_error {
  explicit DanglingRelation(const std::string& what)
      : std::runtime_error("DanglingRelation: " + what) {}
};

struct SurfaceMismatch : std::runtime_error {
  explicit SurfaceMismatch(const std::string& what)
      : std::runtime_error("SurfaceMismatch: " + what) {}
};

struct OverlappingGold : std::runtime_error {
  explicit OverlappingGold(const std::string& what)
      : std::runtime_error("OverlappingGold: " + what) {}
};

struct InvalidIob : std::runtime_error {
  explicit InvalidIob(const std::string& what)
      : std::runtime_error("InvalidIob: " + what) {}
};

struct DocumentSetMismatch : std::runtime_error {
  explicit DocumentSetMismatch(const std::string& what)
      : std::runtime_error("DocumentSetMismatch: " + what) {}
};

// ---------------------------------------------------------------------------
// Core data model

struct Document {
  std::string doc_id;
  std::string text;  // UTF-8
};

// Half-open [start, end) in Unicode scalar offsets.
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;

  bool operator==(const Span&) const = default;
  std::size_t length() const { return end - start; }
  bool overlaps(const Span& o) const { return start < o.end && o.start < end; }
};

enum class AnnotKind { Quantity, MeasuredEntity, MeasuredProperty, Qualifier };

const char* to_string(AnnotKind k);
AnnotKind annot_kind_from_string(const std::string& s);

struct QuantityDetail {
  std::string unit;               // empty when no unit
  std::vector<std::string> mods;  // modifier labels

  bool operator==(const QuantityDetail&) const = default;
};

struct Annotation {
  std::string annot_id;
  int annot_set = 1;
  AnnotKind kind = AnnotKind::Quantity;
  Span span;
  std::string surface;
  std::optional<QuantityDetail> payload;  // Quantity rows only
  nlohmann::json extra = nlohmann::json::object();  // unknown `other` keys
};

enum class RelationKind { HasQuantity, HasProperty, Qualifies };

const char* to_string(RelationKind k);

struct Relation {
  RelationKind kind = RelationKind::HasQuantity;
  std::string source;  // annot_id
  std::string target;  // annot_id

  bool operator==(const Relation&) const = default;
};

struct Token {
  std::string surface;
  Span span;
};

enum class Tag : int { B = 0, I = 1, O = 2 };
constexpr std::size_t kNumTags = 3;

using TagSequence = std::vector<Tag>;

struct DocEntry {
  Document doc;
  std::vector<Annotation> annotations;
  std::vector<Relation> relations;
};

struct Corpus {
  std::vector<DocEntry> docs;  // sorted by doc_id

  const DocEntry* find(const std::string& doc_id) const;
};

// Validates one document's annotations + relations against the full
// invariant set (offsets, surfaces, payload placement, relation endpoint
// legality, dangling ids). Throws the matching error type.
void validate_entry(const DocEntry& entry);

}  // namespace measex

#endif  // MEASEX_CORPUS_TYPES_HPP_
