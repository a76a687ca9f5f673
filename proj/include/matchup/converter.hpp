#pragma once

// Rosetta Stone -> Match-Up conversion: merge the answered translation
// questions into the pair list, keep the source side in order, shuffle the
// English side with a seeded Fisher-Yates pass and label it A, B, C, ...

#include <cstdint>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "matchup/error.hpp"
#include "matchup/model.hpp"
#include "matchup/random.hpp"

namespace matchup {

struct ConversionConfig {
  std::uint64_t shuffle_seed = 0;
  int max_reshuffles = 16;
};

struct Convertibility {
  bool convertible = true;
  std::string reason;

  explicit operator bool() const { return convertible; }
};

namespace convert_detail {

inline std::optional<std::string> merge_problem(const RosettaPuzzle& puzzle) {
  for (const auto& q : puzzle.questions) {
    if (q.gold_answers.empty() || text::trim(q.gold_answers.front()).empty()) return "missing gold answer";
    if (q.gold_answers.size() > 1) return "multi-template answer";
    if (text::trim(q.prompt_text).empty()) return "empty question prompt";
  }
  return std::nullopt;
}

} // namespace convert_detail

/// Given pairs followed by one pair per answered question. Throws
/// NotConvertible when a question cannot be reduced to a single string pair.
inline std::vector<TextPair> merge_pairs(const RosettaPuzzle& puzzle) {
  if (auto problem = convert_detail::merge_problem(puzzle)) throw NotConvertible(*problem);
  std::vector<TextPair> merged = puzzle.given_pairs;
  for (const auto& q : puzzle.questions) {
    if (q.direction == Direction::ToSource) {
      merged.push_back({q.gold_answers.front(), q.prompt_text});
    } else {
      merged.push_back({q.prompt_text, q.gold_answers.front()});
    }
  }
  return merged;
}

inline Convertibility check_convertible(const RosettaPuzzle& puzzle) {
  if (auto problem = convert_detail::merge_problem(puzzle)) return {false, *problem};
  const auto merged = merge_pairs(puzzle);
  if (merged.size() < 2) return {false, "fewer than 2 pairs"};
  std::set<std::string> sources, targets;
  for (const auto& p : merged) {
    if (!targets.insert(text::squeeze_whitespace(p.target_text)).second) return {false, "ambiguous targets"};
  }
  for (const auto& p : merged) {
    if (!sources.insert(text::squeeze_whitespace(p.source_text)).second) return {false, "ambiguous sources"};
  }
  return {};
}

/// Fisher-Yates permutation of 0..n-1 driven by SplitMix64(seed).
/// Element k of the result is the merged-pair index shown at label k + 1.
inline std::vector<std::size_t> shuffle_order(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  SplitMix64 rng(seed);
  for (std::size_t i = n; i-- > 1;) {
    std::size_t j = static_cast<std::size_t>(rng.below(i + 1));
    std::swap(order[i], order[j]);
  }
  return order;
}

inline bool is_identity_order(const std::vector<std::size_t>& order) {
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (order[k] != k) return false;
  }
  return true;
}

/// Presentation order used by convert(): the first non-identity shuffle in
/// the reseed chain seed, splitmix64(seed), splitmix64(splitmix64(seed)), ...
inline std::vector<std::size_t> presented_order(std::size_t n, const ConversionConfig& config) {
  if (config.max_reshuffles < 1) throw Error("max_reshuffles must be at least 1");
  std::uint64_t seed = config.shuffle_seed;
  for (int attempt = 0; attempt < config.max_reshuffles; ++attempt) {
    auto order = shuffle_order(n, seed);
    if (!is_identity_order(order)) return order;
    seed = splitmix64(seed);
  }
  throw DegenerateShuffle("every one of " + std::to_string(config.max_reshuffles) +
                          " shuffles produced the identity permutation");
}

/// Builds the Match-Up puzzle for merged pairs shown in `order`.
inline MatchUpPuzzle assemble_matchup(const RosettaPuzzle& puzzle, const std::vector<TextPair>& merged,
                                      const std::vector<std::size_t>& order, std::uint64_t seed) {
  MatchUpPuzzle out;
  out.meta = puzzle.meta;
  out.meta.id = puzzle.meta.id + "-mu";
  out.meta.format = Format::MatchUp;
  out.preamble = puzzle.preamble;
  out.source_puzzle_id = puzzle.meta.id;
  out.shuffle_seed = seed;
  out.extras = puzzle.extras;
  for (const auto& p : merged) out.source_items.push_back(p.source_text);
  out.gold_key.labels.assign(merged.size(), std::nullopt);
  for (std::size_t k = 0; k < order.size(); ++k) {
    out.target_items.push_back(merged.at(order[k]).target_text);
    out.gold_key.labels[order[k]] = Label{static_cast<int>(k + 1)};
  }
  return out;
}

inline MatchUpPuzzle convert(const RosettaPuzzle& puzzle, const ConversionConfig& config) {
  if (auto c = check_convertible(puzzle); !c) throw NotConvertible(c.reason);
  const auto merged = merge_pairs(puzzle);
  return assemble_matchup(puzzle, merged, presented_order(merged.size(), config), config.shuffle_seed);
}

} // namespace matchup
