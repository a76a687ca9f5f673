#pragma once

// Strict scoring for both puzzle formats and aggregation of per-puzzle
// percentages by topic set, stage, format and solver.

#include <map>
#include <set>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "matchup/error.hpp"
#include "matchup/model.hpp"
#include "matchup/text.hpp"

namespace matchup {

struct RosettaAttempt {
  std::string puzzle_id;
  std::vector<std::string> answers;

  bool operator==(const RosettaAttempt&) const = default;
};

enum class Stage { Stage1, Stage2, Unstaged };

inline std::string_view to_string(Stage s) {
  switch (s) {
  case Stage::Stage1: return "s1";
  case Stage::Stage2: return "s2";
  case Stage::Unstaged: return "unstaged";
  }
  return "unstaged";
}

inline std::optional<Stage> stage_from_string(std::string_view s) {
  if (s == "s1" || s == "Stage1") return Stage::Stage1;
  if (s == "s2" || s == "Stage2") return Stage::Stage2;
  if (s == "unstaged" || s == "Unstaged") return Stage::Unstaged;
  return std::nullopt;
}

/// Stage 1 holds puzzles whose levels all lie in Breakthrough..Intermediate,
/// Stage 2 those whose levels all lie in Advanced..Round 2. Puzzles that
/// straddle the boundary are unstaged.
inline Stage classify_stage(const std::set<Difficulty>& levels) {
  if (levels.empty()) return Stage::Unstaged;
  bool easy = true, hard = true;
  for (auto d : levels) {
    if (d == Difficulty::Advanced || d == Difficulty::Round2) {
      easy = false;
    } else {
      hard = false;
    }
  }
  if (easy) return Stage::Stage1;
  if (hard) return Stage::Stage2;
  return Stage::Unstaged;
}

/// NFC, trim, collapse whitespace runs. Case, punctuation and diacritics
/// are significant.
inline std::string normalize_answer(std::string_view s) { return text::squeeze_whitespace(text::nfc(s)); }

inline ScoreReport score_rosetta(const RosettaAttempt& attempt, const RosettaPuzzle& puzzle) {
  if (attempt.answers.size() != puzzle.questions.size()) {
    throw LengthMismatch("attempt has " + std::to_string(attempt.answers.size()) + " answers, puzzle has " +
                         std::to_string(puzzle.questions.size()) + " questions");
  }
  ScoreReport r;
  r.puzzle_id = puzzle.meta.id;
  r.format = Format::RosettaStone;
  r.n_items = static_cast<int>(puzzle.questions.size());
  for (std::size_t i = 0; i < puzzle.questions.size(); ++i) {
    const auto& q = puzzle.questions[i];
    const std::string got = normalize_answer(attempt.answers[i]);
    bool ok = false;
    for (const auto& g : q.gold_answers) ok = ok || (!got.empty() && got == normalize_answer(g));
    r.per_item.push_back({static_cast<int>(i + 1), q.gold_answers.empty() ? "" : q.gold_answers.front(),
                          attempt.answers[i], ok});
    r.n_correct += ok ? 1 : 0;
  }
  r.percent = r.n_items == 0 ? 0.0 : 100.0 * r.n_correct / r.n_items;
  return r;
}

/// True iff the key is complete and reads A, B, C, ... in source order.
inline bool is_alphabetical(const PredictedKey& key, std::size_t n) {
  return n > 0 && key.size() == n && key.is_identity();
}

inline ScoreReport score_matchup(const PredictedKey& predicted, const MatchUpPuzzle& puzzle) {
  const std::size_t n = puzzle.size();
  for (const auto& l : predicted.labels) {
    if (l && (l->rank < 1 || l->rank > static_cast<int>(n))) {
      throw UnknownLabel("label '" + render_label(*l) + "' is not one of the puzzle's " + std::to_string(n) +
                         " labels");
    }
  }
  ScoreReport r;
  r.puzzle_id = puzzle.meta.id;
  r.format = Format::MatchUp;
  r.n_items = static_cast<int>(n);
  r.irregular = predicted.size() != n || predicted.irregular();

  std::map<int, int> uses;
  for (std::size_t i = 0; i < std::min(n, predicted.size()); ++i) {
    if (predicted.labels[i]) ++uses[predicted.labels[i]->rank];
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::optional<Label> got = i < predicted.size() ? predicted.labels[i] : std::nullopt;
    const Label expected = *puzzle.gold_key.labels[i];
    bool ok = got && *got == expected && uses[got->rank] == 1;
    r.per_item.push_back({static_cast<int>(i + 1), render_label(expected), got ? render_label(*got) : "", ok});
    r.n_correct += ok ? 1 : 0;
  }
  if (is_alphabetical(predicted, n)) {
    r.zeroed_for_alphabetical = true;
    r.n_correct = 0;
    for (auto& item : r.per_item) item.correct = false;
  }
  r.percent = n == 0 ? 0.0 : 100.0 * r.n_correct / static_cast<double>(n);
  return r;
}

// ---------------------------------------------------------------------------
// Aggregation

inline std::string topic_set_label(const std::set<Topic>& topics) {
  std::string out;
  for (auto t : topics) {
    if (!out.empty()) out += ", ";
    out += to_string(t);
  }
  return out;
}

struct AggregateRow {
  std::string topic_set;
  Stage stage = Stage::Unstaged;
  Format format = Format::RosettaStone;
  std::string solver_id;
  double mean_percent = 0.0;
  int n_reports = 0;
  int n_zeroed = 0;
};

using MetaIndex = std::unordered_map<std::string, PuzzleMeta>;

/// Unweighted mean percent per (topic set, stage, format, solver). Rows are
/// ordered by topic-set label, then stage, format and solver id.
inline std::vector<AggregateRow> aggregate(const std::vector<ScoreReport>& reports, const MetaIndex& metadata) {
  using Key = std::tuple<std::string, Stage, Format, std::string>;
  struct Acc {
    double sum = 0.0;
    int count = 0;
    int zeroed = 0;
  };
  std::map<Key, Acc> groups;
  for (const auto& r : reports) {
    auto it = metadata.find(r.puzzle_id);
    if (it == metadata.end()) throw UnknownPuzzleId(r.puzzle_id);
    Key k{topic_set_label(it->second.topics), classify_stage(it->second.difficulty_levels), r.format, r.solver_id};
    auto& acc = groups[k];
    acc.sum += r.percent;
    acc.count += 1;
    acc.zeroed += r.zeroed_for_alphabetical ? 1 : 0;
  }
  std::vector<AggregateRow> rows;
  for (const auto& [k, acc] : groups) {
    rows.push_back({std::get<0>(k), std::get<1>(k), std::get<2>(k), std::get<3>(k), acc.sum / acc.count, acc.count,
                    acc.zeroed});
  }
  return rows;
}

} // namespace matchup
