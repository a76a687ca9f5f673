#pragma once

// Puzzle files and corpus manifests.
//
// A puzzle file is one JSON document, UTF-8/NFC, with top-level `meta`,
// `preamble`, `extras` and either `pairs` + `questions` (Rosetta Stone) or
// `source_items` + `target_items` + `gold_key` + `shuffle_seed` (Match-Up).
// The canonical byte form has keys sorted, 2-space indentation, LF line
// endings and a trailing newline. See docs/format.md.

#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "matchup/error.hpp"
#include "matchup/model.hpp"
#include "matchup/text.hpp"

namespace matchup {

using json = nlohmann::json;

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& p, std::string_view bytes) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + p.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed for " + p.string());
}

/// Canonical JSON text: sorted keys, 2-space indent, raw UTF-8, trailing LF.
inline std::string canonical_dump(const json& j) { return j.dump(2, ' ', false) + "\n"; }

namespace io_detail {

inline void check_keys(const json& obj, const std::string& where, std::initializer_list<std::string_view> required,
                       std::initializer_list<std::string_view> optional = {}) {
  if (!obj.is_object()) throw SchemaViolation(where.empty() ? "<root>" : where, "must be an object");
  for (auto k : required) {
    if (!obj.contains(std::string(k))) {
      throw SchemaViolation(where.empty() ? std::string(k) : where + "." + std::string(k), "missing required field");
    }
  }
  for (const auto& [key, _] : obj.items()) {
    bool known = std::find(required.begin(), required.end(), key) != required.end() ||
                 std::find(optional.begin(), optional.end(), key) != optional.end();
    if (!known) throw SchemaViolation(where.empty() ? key : where + "." + key, "unknown field");
  }
}

inline std::string get_string(const json& obj, const std::string& key, const std::string& where) {
  const json& v = obj.at(key);
  if (!v.is_string()) throw SchemaViolation(where + key, "must be a string");
  return text::nfc(v.get<std::string>());
}

inline std::vector<std::string> get_strings(const json& obj, const std::string& key, const std::string& where) {
  const json& v = obj.at(key);
  if (!v.is_array()) throw SchemaViolation(where + key, "must be an array of strings");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_string()) throw SchemaViolation(where + key + "[" + std::to_string(i) + "]", "must be a string");
    out.push_back(text::nfc(v[i].get<std::string>()));
  }
  return out;
}

template <class E>
std::set<E> get_enum_set(const json& obj, const std::string& key, const std::string& where,
                         std::optional<E> (*from)(std::string_view)) {
  std::set<E> out;
  for (const auto& s : get_strings(obj, key, where)) {
    auto e = from(s);
    if (!e) throw SchemaViolation(where + key, "unknown value '" + s + "'");
    if (!out.insert(*e).second) throw SchemaViolation(where + key, "duplicate value '" + s + "'");
  }
  return out;
}

inline PuzzleMeta parse_meta(const json& m) {
  check_keys(m, "meta",
             {"id", "year", "competition", "language_name", "language_family", "difficulty_levels", "topics",
              "author", "format"});
  PuzzleMeta meta;
  meta.id = get_string(m, "id", "meta.");
  if (!m.at("year").is_number_integer()) throw SchemaViolation("meta.year", "must be an integer");
  meta.year = m.at("year").get<int>();
  meta.competition = get_string(m, "competition", "meta.");
  meta.language_name = get_string(m, "language_name", "meta.");
  meta.language_family = get_string(m, "language_family", "meta.");
  meta.difficulty_levels = get_enum_set<Difficulty>(m, "difficulty_levels", "meta.", &difficulty_from_string);
  meta.topics = get_enum_set<Topic>(m, "topics", "meta.", &topic_from_string);
  meta.author = get_string(m, "author", "meta.");
  auto f = format_from_string(get_string(m, "format", "meta."));
  if (!f) throw SchemaViolation("meta.format", "must be RosettaStone or MatchUp");
  meta.format = *f;
  return meta;
}

inline json meta_to_json(const PuzzleMeta& m) {
  json levels = json::array(), topics = json::array();
  for (auto d : m.difficulty_levels) levels.push_back(std::string(to_string(d)));
  for (auto t : m.topics) topics.push_back(std::string(to_string(t)));
  return json{{"id", m.id},
              {"year", m.year},
              {"competition", m.competition},
              {"language_name", m.language_name},
              {"language_family", m.language_family},
              {"difficulty_levels", levels},
              {"topics", topics},
              {"author", m.author},
              {"format", std::string(to_string(m.format))}};
}

inline RosettaPuzzle parse_rosetta(const json& root, PuzzleMeta meta) {
  check_keys(root, "", {"meta", "preamble", "pairs", "questions"}, {"extras"});
  RosettaPuzzle p;
  p.meta = std::move(meta);
  p.preamble = get_string(root, "preamble", "");
  const json& pairs = root.at("pairs");
  if (!pairs.is_array()) throw SchemaViolation("pairs", "must be an array");
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const std::string where = "pairs[" + std::to_string(i) + "]";
    check_keys(pairs[i], where, {"source", "target"});
    p.given_pairs.push_back({get_string(pairs[i], "source", where + "."), get_string(pairs[i], "target", where + ".")});
  }
  const json& qs = root.at("questions");
  if (!qs.is_array()) throw SchemaViolation("questions", "must be an array");
  for (std::size_t i = 0; i < qs.size(); ++i) {
    const std::string where = "questions[" + std::to_string(i) + "]";
    check_keys(qs[i], where, {"direction", "prompt", "gold_answers"});
    TranslationQuestion q;
    auto d = direction_from_string(get_string(qs[i], "direction", where + "."));
    if (!d) throw SchemaViolation(where + ".direction", "must be ToSource or ToTarget");
    q.direction = *d;
    q.prompt_text = get_string(qs[i], "prompt", where + ".");
    q.gold_answers = get_strings(qs[i], "gold_answers", where + ".");
    p.questions.push_back(std::move(q));
  }
  if (root.contains("extras")) p.extras = get_strings(root, "extras", "");
  return p;
}

inline MatchUpPuzzle parse_matchup(const json& root, PuzzleMeta meta) {
  check_keys(root, "", {"meta", "preamble", "source_items", "target_items", "gold_key", "shuffle_seed"},
             {"source_puzzle_id", "extras"});
  MatchUpPuzzle p;
  p.meta = std::move(meta);
  p.preamble = get_string(root, "preamble", "");
  p.source_items = get_strings(root, "source_items", "");
  p.target_items = get_strings(root, "target_items", "");
  for (const auto& s : get_strings(root, "gold_key", "")) {
    auto r = parse_label(s);
    if (!r) throw SchemaViolation("gold_key", "'" + s + "' is not a label");
    p.gold_key.labels.push_back(Label{*r});
  }
  const json& seed = root.at("shuffle_seed");
  if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<std::int64_t>() >= 0)) {
    throw SchemaViolation("shuffle_seed", "must be a non-negative integer");
  }
  p.shuffle_seed = seed.get<std::uint64_t>();
  if (root.contains("source_puzzle_id")) p.source_puzzle_id = get_string(root, "source_puzzle_id", "");
  if (root.contains("extras")) p.extras = get_strings(root, "extras", "");
  return p;
}

} // namespace io_detail

inline json puzzle_to_json(const RosettaPuzzle& p) {
  json pairs = json::array(), qs = json::array();
  for (const auto& tp : p.given_pairs) pairs.push_back({{"source", tp.source_text}, {"target", tp.target_text}});
  for (const auto& q : p.questions) {
    qs.push_back({{"direction", std::string(to_string(q.direction))},
                  {"prompt", q.prompt_text},
                  {"gold_answers", q.gold_answers}});
  }
  return json{{"meta", io_detail::meta_to_json(p.meta)},
              {"preamble", p.preamble},
              {"pairs", pairs},
              {"questions", qs},
              {"extras", p.extras}};
}

inline json puzzle_to_json(const MatchUpPuzzle& p) {
  json key = json::array();
  for (const auto& l : p.gold_key.labels) key.push_back(l ? render_label(*l) : std::string());
  json j{{"meta", io_detail::meta_to_json(p.meta)},
         {"preamble", p.preamble},
         {"source_items", p.source_items},
         {"target_items", p.target_items},
         {"gold_key", key},
         {"shuffle_seed", p.shuffle_seed},
         {"extras", p.extras}};
  if (p.source_puzzle_id) j["source_puzzle_id"] = *p.source_puzzle_id;
  return j;
}

inline json puzzle_to_json(const Puzzle& p) {
  return std::visit([](const auto& x) { return puzzle_to_json(x); }, p);
}

/// Canonical bytes for a puzzle. The puzzle is expected to validate.
inline std::string serialize_puzzle(const Puzzle& p) { return canonical_dump(puzzle_to_json(p)); }
inline std::string serialize_puzzle(const RosettaPuzzle& p) { return canonical_dump(puzzle_to_json(p)); }
inline std::string serialize_puzzle(const MatchUpPuzzle& p) { return canonical_dump(puzzle_to_json(p)); }

/// Parses and validates one puzzle document. Strings are NFC-normalized.
inline Puzzle parse_puzzle(std::string_view bytes) {
  if (bytes.empty()) throw MalformedSyntax("empty input", 0);
  if (!text::is_valid_utf8(bytes)) throw EncodingError("puzzle file is not well-formed UTF-8");
  json root;
  try {
    root = json::parse(bytes.begin(), bytes.end());
  } catch (const json::parse_error& e) {
    throw MalformedSyntax(e.what(), e.byte);
  }
  if (!root.is_object()) throw SchemaViolation("<root>", "must be an object");
  if (!root.contains("meta")) throw SchemaViolation("meta", "missing required field");
  PuzzleMeta meta = io_detail::parse_meta(root.at("meta"));
  Puzzle p = meta.format == Format::RosettaStone ? Puzzle(io_detail::parse_rosetta(root, std::move(meta)))
                                                 : Puzzle(io_detail::parse_matchup(root, std::move(meta)));
  Validation v = validate_puzzle(p);
  if (!v.ok()) throw SchemaViolation(v.violations.front().field, v.violations.front().rule);
  return p;
}

// ---------------------------------------------------------------------------
// Manifests

struct ManifestEntry {
  std::string puzzle_id;
  std::string relative_path;
  Format format = Format::RosettaStone;
  json meta_summary = json::object();
  std::string deviation_note;
};

struct CorpusManifest {
  std::string corpus_name;
  std::string version;
  std::vector<ManifestEntry> entries;
};

struct Diagnostic {
  std::string puzzle_id;
  std::string path;
  std::string message;
};

struct LoadedCorpus {
  std::vector<Puzzle> puzzles;
  std::vector<Diagnostic> diagnostics;

  const Puzzle* find(std::string_view id) const {
    for (const auto& p : puzzles) {
      if (meta_of(p).id == id) return &p;
    }
    return nullptr;
  }
};

inline CorpusManifest parse_manifest(std::string_view bytes) {
  json root;
  try {
    root = json::parse(bytes.begin(), bytes.end());
  } catch (const json::parse_error& e) {
    throw ManifestMalformed(std::string("manifest is not valid JSON: ") + e.what());
  }
  auto fail = [](const std::string& m) { throw ManifestMalformed(m); };
  if (!root.is_object()) fail("manifest must be an object");
  for (const char* k : {"corpus_name", "version", "entries"}) {
    if (!root.contains(k)) fail(std::string("manifest lacks '") + k + "'");
  }
  CorpusManifest m;
  if (!root["corpus_name"].is_string() || !root["version"].is_string()) fail("corpus_name and version must be strings");
  m.corpus_name = root["corpus_name"].get<std::string>();
  m.version = root["version"].get<std::string>();
  static const std::regex semver(R"(^(0|[1-9]\d*)\.(0|[1-9]\d*)\.(0|[1-9]\d*)(?:-[0-9A-Za-z.-]+)?(?:\+[0-9A-Za-z.-]+)?$)");
  if (!std::regex_match(m.version, semver)) fail("version '" + m.version + "' is not semver");
  if (!root["entries"].is_array()) fail("entries must be an array");
  std::set<std::string> ids;
  for (const auto& e : root["entries"]) {
    if (!e.is_object() || !e.contains("puzzle_id") || !e.contains("path") || !e.contains("format")) {
      fail("every entry needs puzzle_id, path and format");
    }
    ManifestEntry me;
    me.puzzle_id = e["puzzle_id"].get<std::string>();
    me.relative_path = e["path"].get<std::string>();
    auto f = format_from_string(e["format"].get<std::string>());
    if (!f) fail("entry '" + me.puzzle_id + "' has unknown format");
    me.format = *f;
    if (e.contains("meta")) me.meta_summary = e["meta"];
    if (e.contains("deviation_note")) me.deviation_note = e["deviation_note"].get<std::string>();
    if (!ids.insert(me.puzzle_id).second) fail("duplicate puzzle_id '" + me.puzzle_id + "'");
    m.entries.push_back(std::move(me));
  }
  return m;
}

inline json manifest_to_json(const CorpusManifest& m) {
  json entries = json::array();
  for (const auto& e : m.entries) {
    json j{{"puzzle_id", e.puzzle_id}, {"path", e.relative_path}, {"format", std::string(to_string(e.format))}};
    if (!e.meta_summary.empty()) j["meta"] = e.meta_summary;
    if (!e.deviation_note.empty()) j["deviation_note"] = e.deviation_note;
    entries.push_back(std::move(j));
  }
  return json{{"corpus_name", m.corpus_name}, {"version", m.version}, {"entries", entries}};
}

inline json meta_summary(const PuzzleMeta& m) {
  json j = io_detail::meta_to_json(m);
  j.erase("id");
  j.erase("format");
  return j;
}

/// Loads every puzzle listed in a manifest. A bad file becomes a diagnostic
/// and never aborts the load; diagnostics follow manifest order.
inline LoadedCorpus load_corpus(const std::filesystem::path& manifest_path) {
  if (!std::filesystem::is_regular_file(manifest_path)) {
    throw ManifestNotFound("manifest not found: " + manifest_path.string());
  }
  CorpusManifest m = parse_manifest(read_file(manifest_path));
  const auto base = manifest_path.parent_path();
  LoadedCorpus out;
  for (const auto& e : m.entries) {
    const auto path = base / e.relative_path;
    try {
      if (!std::filesystem::is_regular_file(path)) throw Error("file not found");
      Puzzle p = parse_puzzle(read_file(path));
      const auto& meta = meta_of(p);
      if (meta.id != e.puzzle_id) throw Error("file declares id '" + meta.id + "'");
      if (meta.format != e.format) throw Error("file format differs from manifest");
      out.puzzles.push_back(std::move(p));
    } catch (const std::exception& ex) {
      out.diagnostics.push_back({e.puzzle_id, path.string(), ex.what()});
    }
  }
  return out;
}

} // namespace matchup
