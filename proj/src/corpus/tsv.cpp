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

#include "corpus/tsv.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace measex {

namespace fs = std::filesystem;

namespace {

constexpr const char* kHeader =
    "docId\tannotSet\tannotType\tstartOffset\tendOffset\tannotId\ttext\tother";

// The text column cannot carry raw tabs/newlines; escape them so surfaces
// containing either still round-trip.
std::string escape_field(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string unescape_field(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\' || i + 1 == s.size()) {
      out.push_back(s[i]);
      continue;
    }
    switch (s[++i]) {
      case '\\': out.push_back('\\'); break;
      case 't': out.push_back('\t'); break;
      case 'n': out.push_back('\n'); break;
      case 'r': out.push_back('\r'); break;
      default:
        out.push_back('\\');
        out.push_back(s[i]);
    }
  }
  return out;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t pos = 0;
  while (true) {
    const std::size_t tab = line.find('\t', pos);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(pos));
      break;
    }
    fields.push_back(line.substr(pos, tab - pos));
    pos = tab + 1;
  }
  return fields;
}

long parse_int(const std::string& s, const char* what) {
  if (s.empty()) throw ParseError(std::string(what) + " is empty");
  std::size_t consumed = 0;
  long v = 0;
  try {
    v = std::stol(s, &consumed);
  } catch (const std::exception&) {
    throw ParseError(std::string(what) + " is not an integer: '" + s + "'");
  }
  if (consumed != s.size()) {
    throw ParseError(std::string(what) + " is not an integer: '" + s + "'");
  }
  return v;
}

std::optional<RelationKind> relation_key(const std::string& key) {
  if (key == "HasQuantity") return RelationKind::HasQuantity;
  if (key == "HasProperty") return RelationKind::HasProperty;
  if (key == "Qualifies") return RelationKind::Qualifies;
  return std::nullopt;
}

nlohmann::json other_json(const Annotation& a,
                          const std::vector<Relation>& relations) {
  nlohmann::json other = a.extra.is_object() ? a.extra : nlohmann::json::object();
  if (a.payload.has_value()) {
    if (!a.payload->unit.empty()) other["unit"] = a.payload->unit;
    if (!a.payload->mods.empty()) other["mods"] = a.payload->mods;
  }
  std::map<RelationKind, std::vector<std::string>> out_edges;
  for (const Relation& r : relations) {
    if (r.source == a.annot_id) out_edges[r.kind].push_back(r.target);
  }
  for (auto& [kind, targets] : out_edges) {
    std::sort(targets.begin(), targets.end());
    if (targets.size() == 1) {
      other[to_string(kind)] = targets[0];
    } else {
      other[to_string(kind)] = targets;
    }
  }
  return other;
}

}  // namespace

Corpus read_tsv(const std::string& tsv_path,
                const std::map<std::string, std::string>& texts) {
  std::ifstream is(tsv_path);
  if (!is) throw ParseError("cannot open TSV: " + tsv_path);

  std::string line;
  if (!std::getline(is, line)) throw ParseError("empty TSV: " + tsv_path);
  if (line != kHeader) throw ParseError("unexpected TSV header: '" + line + "'");

  std::map<std::string, DocEntry> entries;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_tabs(line);
    if (fields.size() != 8) {
      throw ParseError("line " + std::to_string(line_no) + ": expected 8 columns, got " +
                       std::to_string(fields.size()));
    }
    const std::string& doc_id = fields[0];
    const auto text_it = texts.find(doc_id);
    if (text_it == texts.end()) {
      throw ParseError("line " + std::to_string(line_no) + ": no document text for '" +
                       doc_id + "'");
    }
    auto [it, inserted] = entries.try_emplace(doc_id);
    if (inserted) it->second.doc = Document{doc_id, text_it->second};
    DocEntry& entry = it->second;

    Annotation a;
    a.annot_id = fields[5];
    a.annot_set = static_cast<int>(parse_int(fields[1], "annotSet"));
    a.kind = annot_kind_from_string(fields[2]);
    const long start = parse_int(fields[3], "startOffset");
    const long end = parse_int(fields[4], "endOffset");
    if (start < 0 || end < 0) {
      throw OffsetOutOfRange("line " + std::to_string(line_no) + ": negative offset");
    }
    a.span = {static_cast<std::size_t>(start), static_cast<std::size_t>(end)};
    a.surface = unescape_field(fields[6]);

    nlohmann::json other = nlohmann::json::object();
    if (!fields[7].empty()) {
      try {
        other = nlohmann::json::parse(fields[7]);
      } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("line " + std::to_string(line_no) + ": bad `other` JSON: " +
                         e.what());
      }
      if (!other.is_object()) {
        throw ParseError("line " + std::to_string(line_no) + ": `other` must be an object");
      }
    }

    QuantityDetail detail;
    bool has_detail = false;
    for (auto it2 = other.begin(); it2 != other.end();) {
      const std::string& key = it2.key();
      if (key == "unit") {
        detail.unit = it2.value().get<std::string>();
        has_detail = true;
        it2 = other.erase(it2);
      } else if (key == "mods") {
        detail.mods = it2.value().get<std::vector<std::string>>();
        has_detail = true;
        it2 = other.erase(it2);
      } else if (auto rk = relation_key(key); rk.has_value()) {
        if (it2.value().is_string()) {
          entry.relations.push_back({*rk, a.annot_id, it2.value().get<std::string>()});
        } else if (it2.value().is_array()) {
          for (const auto& t : it2.value()) {
            entry.relations.push_back({*rk, a.annot_id, t.get<std::string>()});
          }
        } else {
          throw ParseError("line " + std::to_string(line_no) + ": " + key +
                           " must be an annotId or list of annotIds");
        }
        it2 = other.erase(it2);
      } else {
        ++it2;  // unknown key, preserved in `extra`
      }
    }
    if (has_detail) {
      if (a.kind != AnnotKind::Quantity) {
        throw ParseError("line " + std::to_string(line_no) + ": unit/mods on non-Quantity row");
      }
      a.payload = std::move(detail);
    } else if (a.kind == AnnotKind::Quantity) {
      a.payload = QuantityDetail{};  // quantity with no unit and no mods
    }
    a.extra = std::move(other);
    entry.annotations.push_back(std::move(a));
  }

  Corpus corpus;
  for (auto& [id, entry] : entries) {
    validate_entry(entry);
    corpus.docs.push_back(std::move(entry));
  }
  return corpus;
}

Corpus load_corpus_dir(const std::string& dir, const std::string& tsv_name) {
  const fs::path base(dir);
  const fs::path tsv = base / tsv_name;
  if (!fs::exists(tsv)) throw ParseError("missing TSV: " + tsv.string());

  std::map<std::string, std::string> texts;
  for (const auto& e : fs::directory_iterator(base)) {
    if (e.path().extension() == ".txt") {
      std::ifstream is(e.path(), std::ios::binary);
      std::ostringstream ss;
      ss << is.rdbuf();
      texts[e.path().stem().string()] = ss.str();
    }
  }
  Corpus corpus = read_tsv(tsv.string(), texts);

  // Documents that carry no annotations still belong to the corpus.
  for (const auto& [id, text] : texts) {
    if (corpus.find(id) == nullptr) {
      DocEntry entry;
      entry.doc = Document{id, text};
      validate_entry(entry);
      corpus.docs.push_back(std::move(entry));
    }
  }
  std::sort(corpus.docs.begin(), corpus.docs.end(),
            [](const DocEntry& a, const DocEntry& b) { return a.doc.doc_id < b.doc.doc_id; });
  return corpus;
}

Corpus read_tsv_with_reference(const std::string& tsv_path,
                               const Corpus& reference) {
  std::map<std::string, std::string> texts;
  for (const auto& d : reference.docs) texts[d.doc.doc_id] = d.doc.text;
  Corpus corpus = read_tsv(tsv_path, texts);
  for (const auto& d : reference.docs) {
    if (corpus.find(d.doc.doc_id) == nullptr) {
      DocEntry entry;
      entry.doc = d.doc;
      corpus.docs.push_back(std::move(entry));
    }
  }
  std::sort(corpus.docs.begin(), corpus.docs.end(),
            [](const DocEntry& a, const DocEntry& b) { return a.doc.doc_id < b.doc.doc_id; });
  return corpus;
}

std::string to_tsv(const Corpus& corpus) {
  std::vector<const DocEntry*> docs;
  for (const auto& d : corpus.docs) docs.push_back(&d);
  std::sort(docs.begin(), docs.end(), [](const DocEntry* a, const DocEntry* b) {
    return a->doc.doc_id < b->doc.doc_id;
  });

  std::ostringstream os;
  os << kHeader << '\n';
  for (const DocEntry* entry : docs) {
    std::vector<const Annotation*> anns;
    for (const auto& a : entry->annotations) anns.push_back(&a);
    std::sort(anns.begin(), anns.end(), [](const Annotation* a, const Annotation* b) {
      if (a->annot_set != b->annot_set) return a->annot_set < b->annot_set;
      if (a->span.start != b->span.start) return a->span.start < b->span.start;
      return a->annot_id < b->annot_id;
    });
    for (const Annotation* a : anns) {
      const nlohmann::json other = other_json(*a, entry->relations);
      os << entry->doc.doc_id << '\t' << a->annot_set << '\t' << to_string(a->kind)
         << '\t' << a->span.start << '\t' << a->span.end << '\t' << a->annot_id
         << '\t' << escape_field(a->surface) << '\t' << other.dump() << '\n';
    }
  }
  return os.str();
}

void write_tsv(const Corpus& corpus, const std::string& tsv_path) {
  std::ofstream os(tsv_path, std::ios::binary | std::ios::trunc);
  if (!os) throw ParseError("cannot open for write: " + tsv_path);
  os << to_tsv(corpus);
}

void save_corpus_dir(const Corpus& corpus, const std::string& dir,
                     const std::string& tsv_name) {
  fs::create_directories(dir);
  for (const auto& d : corpus.docs) {
    std::ofstream os(fs::path(dir) / (d.doc.doc_id + ".txt"),
                     std::ios::binary | std::ios::trunc);
    os << d.doc.text;
  }
  write_tsv(corpus, (fs::path(dir) / tsv_name).string());
}

}  // namespace measex
