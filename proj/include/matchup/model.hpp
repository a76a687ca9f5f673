#pragma once

// Domain types shared by the converter, scorer, solver, harness and runner.

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "matchup/label.hpp"
#include "matchup/text.hpp"

namespace matchup {

enum class Difficulty { Breakthrough, Foundation, Intermediate, Advanced, Round2 };
enum class Topic { Morphology, Syntax, Semantics, Phonology, WritingSystems, NumberSystems, Computational };
enum class Format { RosettaStone, MatchUp };
enum class Direction { ToSource, ToTarget };

inline constexpr std::array<std::string_view, 5> kDifficultyNames = {
    "Breakthrough", "Foundation", "Intermediate", "Advanced", "Round2"};
inline constexpr std::array<std::string_view, 7> kTopicNames = {
    "Morphology", "Syntax", "Semantics", "Phonology", "WritingSystems", "NumberSystems", "Computational"};
inline constexpr std::array<std::string_view, 2> kFormatNames = {"RosettaStone", "MatchUp"};
inline constexpr std::array<std::string_view, 2> kDirectionNames = {"ToSource", "ToTarget"};

template <class E, std::size_t N>
std::optional<E> enum_from_name(const std::array<std::string_view, N>& names, std::string_view s) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == s) return static_cast<E>(i);
  }
  return std::nullopt;
}

inline std::string_view to_string(Difficulty d) { return kDifficultyNames[static_cast<std::size_t>(d)]; }
inline std::string_view to_string(Topic t) { return kTopicNames[static_cast<std::size_t>(t)]; }
inline std::string_view to_string(Format f) { return kFormatNames[static_cast<std::size_t>(f)]; }
inline std::string_view to_string(Direction d) { return kDirectionNames[static_cast<std::size_t>(d)]; }

inline std::optional<Difficulty> difficulty_from_string(std::string_view s) {
  return enum_from_name<Difficulty>(kDifficultyNames, s);
}
inline std::optional<Topic> topic_from_string(std::string_view s) { return enum_from_name<Topic>(kTopicNames, s); }
inline std::optional<Format> format_from_string(std::string_view s) { return enum_from_name<Format>(kFormatNames, s); }
inline std::optional<Direction> direction_from_string(std::string_view s) {
  return enum_from_name<Direction>(kDirectionNames, s);
}

struct PuzzleMeta {
  std::string id;
  int year = 0;
  std::string competition;
  std::string language_name;
  std::string language_family;
  std::set<Difficulty> difficulty_levels;
  std::set<Topic> topics;
  std::string author;
  Format format = Format::RosettaStone;

  bool operator==(const PuzzleMeta&) const = default;
};

struct TextPair {
  std::string source_text;
  std::string target_text;

  bool operator==(const TextPair&) const = default;
};

struct TranslationQuestion {
  Direction direction = Direction::ToSource;
  std::string prompt_text;
  std::vector<std::string> gold_answers;

  bool operator==(const TranslationQuestion&) const = default;
};

struct RosettaPuzzle {
  PuzzleMeta meta;
  std::string preamble;
  std::vector<TextPair> given_pairs;
  std::vector<TranslationQuestion> questions;
  /// Unscored auxiliary questions, kept verbatim.
  std::vector<std::string> extras;

  bool operator==(const RosettaPuzzle&) const = default;
};

/// Source index -> label. Entry i holds the label predicted for source item
/// i + 1; a missing entry means no prediction. Gold keys are always complete
/// bijections; keys parsed from model output may be partial or non-injective.
struct AnswerKey {
  std::vector<std::optional<Label>> labels;

  std::size_t size() const { return labels.size(); }

  bool complete() const {
    return std::all_of(labels.begin(), labels.end(), [](const auto& l) { return l.has_value(); });
  }

  bool injective() const {
    std::set<int> seen;
    for (const auto& l : labels) {
      if (l && !seen.insert(l->rank).second) return false;
    }
    return true;
  }

  /// Partial or non-injective.
  bool irregular() const { return !complete() || !injective(); }

  bool is_identity() const {
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (!labels[i] || labels[i]->rank != static_cast<int>(i + 1)) return false;
    }
    return true;
  }

  static AnswerKey from_ranks(const std::vector<int>& ranks) {
    AnswerKey k;
    for (int r : ranks) k.labels.push_back(Label{r});
    return k;
  }

  bool operator==(const AnswerKey&) const = default;
};

using PredictedKey = AnswerKey;

struct MatchUpPuzzle {
  PuzzleMeta meta;
  std::string preamble;
  std::vector<std::string> source_items;
  /// In label order: target_items[k] carries label rank k + 1.
  std::vector<std::string> target_items;
  AnswerKey gold_key;
  std::uint64_t shuffle_seed = 0;
  std::optional<std::string> source_puzzle_id;
  std::vector<std::string> extras;

  std::size_t size() const { return source_items.size(); }

  bool operator==(const MatchUpPuzzle&) const = default;
};

using Puzzle = std::variant<RosettaPuzzle, MatchUpPuzzle>;

inline const PuzzleMeta& meta_of(const Puzzle& p) {
  return std::visit([](const auto& x) -> const PuzzleMeta& { return x.meta; }, p);
}

struct ItemResult {
  int index = 0;
  std::string expected;
  std::string got;
  bool correct = false;

  bool operator==(const ItemResult&) const = default;
};

struct ScoreReport {
  std::string puzzle_id;
  std::string solver_id;
  Format format = Format::RosettaStone;
  int n_items = 0;
  int n_correct = 0;
  double percent = 0.0;
  bool zeroed_for_alphabetical = false;
  bool irregular = false;
  std::vector<ItemResult> per_item;

  bool operator==(const ScoreReport&) const = default;
};

// ---------------------------------------------------------------------------
// Validation

struct Violation {
  std::string field;
  std::string rule;

  bool operator==(const Violation&) const = default;
};

struct Validation {
  std::vector<Violation> violations;
  std::vector<Violation> warnings;

  bool ok() const { return violations.empty(); }
};

namespace detail {

inline bool blank(std::string_view s) { return text::trim(s).empty(); }

inline bool is_nfc(std::string_view s) {
  try {
    return text::nfc(s) == s;
  } catch (const EncodingError&) {
    return false;
  }
}

inline void check_text(Validation& v, const std::string& field, std::string_view s) {
  if (blank(s)) v.violations.push_back({field, "must be non-empty after trimming"});
  if (text::contains_newline(s)) v.violations.push_back({field, "must not contain newlines"});
  if (!is_nfc(s)) v.violations.push_back({field, "must be NFC-normalized UTF-8"});
}

inline void check_meta(Validation& v, const PuzzleMeta& m, Format expected) {
  if (m.id.empty()) v.violations.push_back({"meta.id", "must be non-empty"});
  if (m.format != expected) v.violations.push_back({"meta.format", "does not match puzzle structure"});
  if (m.difficulty_levels.empty()) {
    v.violations.push_back({"meta.difficulty_levels", "must be non-empty"});
  } else if (m.difficulty_levels.size() > 2) {
    v.violations.push_back({"meta.difficulty_levels", "at most 2 levels"});
  } else if (m.difficulty_levels.size() == 2) {
    int lo = static_cast<int>(*m.difficulty_levels.begin());
    int hi = static_cast<int>(*m.difficulty_levels.rbegin());
    if (hi - lo != 1) v.violations.push_back({"meta.difficulty_levels", "two levels must be adjacent"});
  }
  if (m.topics.empty()) v.violations.push_back({"meta.topics", "must be non-empty"});
}

} // namespace detail

inline Validation validate_puzzle(const RosettaPuzzle& p) {
  Validation v;
  detail::check_meta(v, p.meta, Format::RosettaStone);
  if (detail::blank(p.preamble)) v.warnings.push_back({"preamble", "empty preamble"});
  if (p.given_pairs.empty()) v.violations.push_back({"given_pairs", "at least one pair required"});
  std::set<std::pair<std::string, std::string>> seen;
  for (std::size_t i = 0; i < p.given_pairs.size(); ++i) {
    const auto& pair = p.given_pairs[i];
    const std::string f = "given_pairs[" + std::to_string(i) + "]";
    detail::check_text(v, f + ".source_text", pair.source_text);
    detail::check_text(v, f + ".target_text", pair.target_text);
    if (!seen.emplace(pair.source_text, pair.target_text).second) {
      v.violations.push_back({f, "duplicate pair"});
    }
  }
  for (std::size_t i = 0; i < p.questions.size(); ++i) {
    const auto& q = p.questions[i];
    const std::string f = "questions[" + std::to_string(i) + "]";
    detail::check_text(v, f + ".prompt_text", q.prompt_text);
    if (q.gold_answers.empty()) v.violations.push_back({f + ".gold_answers", "must be non-empty"});
    for (std::size_t k = 0; k < q.gold_answers.size(); ++k) {
      detail::check_text(v, f + ".gold_answers[" + std::to_string(k) + "]", q.gold_answers[k]);
    }
  }
  return v;
}

inline Validation validate_puzzle(const MatchUpPuzzle& p) {
  Validation v;
  detail::check_meta(v, p.meta, Format::MatchUp);
  if (detail::blank(p.preamble)) v.warnings.push_back({"preamble", "empty preamble"});
  const std::size_t n = p.source_items.size();
  if (n < 2) v.violations.push_back({"source_items", "at least 2 items required"});
  if (p.target_items.size() != n) v.violations.push_back({"target_items", "must have as many items as source_items"});
  for (std::size_t i = 0; i < p.source_items.size(); ++i) {
    detail::check_text(v, "source_items[" + std::to_string(i) + "]", p.source_items[i]);
  }
  for (std::size_t i = 0; i < p.target_items.size(); ++i) {
    detail::check_text(v, "target_items[" + std::to_string(i) + "]", p.target_items[i]);
  }
  if (p.gold_key.size() != n) {
    v.violations.push_back({"gold_key", "must assign a label to every source item"});
  } else {
    bool in_range = true;
    for (const auto& l : p.gold_key.labels) {
      if (!l || l->rank < 1 || l->rank > static_cast<int>(p.target_items.size())) in_range = false;
    }
    if (!in_range) v.violations.push_back({"gold_key", "every entry must be a label of a target item"});
    if (!p.gold_key.injective()) v.violations.push_back({"gold_key", "must be injective (a bijection)"});
    if (n >= 2 && p.gold_key.is_identity()) v.violations.push_back({"gold_key", "must not be the identity mapping"});
  }
  return v;
}

inline Validation validate_puzzle(const Puzzle& p) {
  return std::visit([](const auto& x) { return validate_puzzle(x); }, p);
}

} // namespace matchup
