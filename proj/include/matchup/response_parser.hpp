#pragma once

// Extraction of answer keys and translation attempts from free-form model
// output. Parsing is pure and tolerant; anything malformed ends up as a
// partial or irregular key that the scorer grades item by item.

#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "matchup/error.hpp"
#include "matchup/model.hpp"
#include "matchup/scorer.hpp"
#include "matchup/text.hpp"

namespace matchup {

namespace parse_detail {

inline std::vector<std::string> lines(std::string_view raw) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : raw) {
    if (c == '\n') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

inline std::string strip_markup(std::string s) {
  std::string out;
  for (char c : s) {
    if (c != '*' && c != '`' && c != '_') out.push_back(c);
  }
  return out;
}

inline std::optional<int> label_in_range(const std::string& token, std::size_t n) {
  auto r = parse_label(token);
  if (r && *r >= 1 && *r <= static_cast<int>(n)) return r;
  return std::nullopt;
}

inline bool all_digits(const std::string& s) {
  return !s.empty() && s.size() <= 4 && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

/// "| 1 | B |" or "| 1 | text | B |": first numeric cell, then the first
/// later cell that is exactly a label.
inline std::optional<std::pair<int, int>> table_row(const std::string& line, std::size_t n) {
  const std::string t = text::trim(line);
  if (t.empty() || t.front() != '|') return std::nullopt;
  std::vector<std::string> cells;
  std::string cur;
  for (char c : t.substr(1)) {
    if (c == '|') {
      cells.push_back(text::trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!text::trim(cur).empty()) cells.push_back(text::trim(cur));
  for (std::size_t a = 0; a < cells.size(); ++a) {
    if (!all_digits(cells[a])) continue;
    for (std::size_t b = a + 1; b < cells.size(); ++b) {
      if (auto l = label_in_range(cells[b], n)) return std::make_pair(std::stoi(cells[a]), *l);
    }
    return std::nullopt;
  }
  return std::nullopt;
}

/// "1 → B", "1 -> B", "1-B", "1: B", "1. B", "1) B", "- 1 = B".
inline std::optional<std::pair<int, int>> pair_line(const std::string& line, std::size_t n) {
  static const std::regex re(
      R"(^\s*(?:[-+>]\s+)?(\d{1,4})\s*(?:→|⟶|->|=>|-|–|—|:|\.|\)|=)?\s*([A-Z]{1,2})(?:$|[\s.,;:)]))");
  std::smatch m;
  if (!std::regex_search(line, m, re)) return std::nullopt;
  auto l = label_in_range(m[2].str(), n);
  if (!l) return std::nullopt;
  return std::make_pair(std::stoi(m[1].str()), *l);
}

/// Label tokens of a line that contains nothing but labels and separators.
inline std::optional<std::vector<int>> label_only_tokens(const std::string& line, std::size_t n) {
  static const std::regex sep(R"([\s,;|/]+|→|->)");
  std::vector<int> out;
  std::sregex_token_iterator it(line.begin(), line.end(), sep, -1), end;
  for (; it != end; ++it) {
    std::string tok = text::strip_punct(it->str());
    if (tok.empty()) continue;
    auto l = label_in_range(tok, n);
    if (!l) return std::nullopt;
    out.push_back(*l);
  }
  return out;
}

} // namespace parse_detail

/// Throws Unparseable when neither index/label pairs nor a positional
/// sequence of exactly n labels can be found.
inline PredictedKey parse_matchup_response(std::string_view raw, const MatchUpPuzzle& puzzle) {
  using namespace parse_detail;
  const std::size_t n = puzzle.size();
  PredictedKey key;
  key.labels.assign(n, std::nullopt);
  bool any = false;
  const auto ls = lines(raw);
  for (const auto& original : ls) {
    const std::string line = strip_markup(original);
    auto hit = table_row(line, n);
    if (!hit) hit = pair_line(line, n);
    if (!hit || hit->first < 1 || hit->first > static_cast<int>(n)) continue;
    key.labels[static_cast<std::size_t>(hit->first - 1)] = Label{hit->second};
    any = true;
  }
  if (any) return key;

  // Positional fallback: the whole response, or a single line, consisting
  // only of exactly n labels.
  std::vector<int> all;
  bool all_labels = true;
  for (const auto& line : ls) {
    auto toks = label_only_tokens(strip_markup(line), n);
    if (!toks) {
      all_labels = false;
      break;
    }
    all.insert(all.end(), toks->begin(), toks->end());
  }
  std::optional<std::vector<int>> seq;
  if (all_labels && all.size() == n) seq = all;
  for (auto it = ls.rbegin(); !seq && it != ls.rend(); ++it) {
    auto toks = label_only_tokens(strip_markup(*it), n);
    if (toks && toks->size() == n) seq = toks;
  }
  if (!seq) throw Unparseable("no index/label pairs and no sequence of exactly " + std::to_string(n) + " labels");
  for (std::size_t i = 0; i < n; ++i) key.labels[i] = Label{(*seq)[i]};
  return key;
}

namespace parse_detail {

inline std::string strip_quotes(std::string s) {
  s = text::trim(s);
  static const std::vector<std::pair<std::string, std::string>> quotes = {
      {"\"", "\""}, {"'", "'"}, {"“", "”"}, {"‘", "’"}, {"«", "»"}, {"„", "“"}};
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& [open, close] : quotes) {
      if (s.size() >= open.size() + close.size() && s.starts_with(open) && s.ends_with(close)) {
        s = text::trim(s.substr(open.size(), s.size() - open.size() - close.size()));
        changed = true;
      }
    }
  }
  return s;
}

} // namespace parse_detail

/// One answer per question from "Qk: answer" lines. Missing lines are blank;
/// the last line for a question wins.
inline RosettaAttempt parse_rosetta_response(std::string_view raw, const RosettaPuzzle& puzzle) {
  static const std::regex re(R"(^\s*(?:[-*]\s+)?\**\s*[Qq]\s*(\d{1,4})\s*\**\s*[:.)\-–]\s*\**(.*?)\**\s*$)");
  RosettaAttempt a;
  a.puzzle_id = puzzle.meta.id;
  a.answers.assign(puzzle.questions.size(), "");
  for (const auto& line : parse_detail::lines(raw)) {
    std::smatch m;
    if (!std::regex_match(line, m, re)) continue;
    const int k = std::stoi(m[1].str());
    if (k < 1 || k > static_cast<int>(puzzle.questions.size())) continue;
    a.answers[static_cast<std::size_t>(k - 1)] = parse_detail::strip_quotes(m[2].str());
  }
  return a;
}

} // namespace matchup
