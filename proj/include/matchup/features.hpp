#pragma once

// Similarity features for Match-Up solving. Each feature turns one solving
// heuristic into an n x n affinity matrix between source items (rows) and
// target items (columns):
//   length_affinity       - longer strings tend to translate longer strings
//   name_anchor_affinity  - proper names survive translation nearly intact
//   cooccurrence_affinity - a word repeated f times on one side tends to
//                           match a word repeated f times on the other

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "matchup/edit_distance.hpp"
#include "matchup/error.hpp"
#include "matchup/model.hpp"
#include "matchup/text.hpp"

namespace matchup {

class SimilarityMatrix {
public:
  SimilarityMatrix() = default;
  explicit SimilarityMatrix(std::size_t n, double fill = 0.0) : n_(n), values_(n * n, fill) {}
  SimilarityMatrix(std::size_t n, std::vector<double> row_major) : n_(n), values_(std::move(row_major)) {
    if (values_.size() != n_ * n_) throw Error("similarity matrix must be square");
  }

  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * n_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return values_[i * n_ + j]; }
  const std::vector<double>& values() const { return values_; }

  bool all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
  }

  double max() const { return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end()); }
  double min() const { return values_.empty() ? 0.0 : *std::min_element(values_.begin(), values_.end()); }

  SimilarityMatrix& operator+=(const SimilarityMatrix& o) {
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += o.values_[k];
    return *this;
  }
  SimilarityMatrix operator*(double w) const {
    SimilarityMatrix out = *this;
    for (auto& v : out.values_) v *= w;
    return out;
  }

  /// Row-major CSV with a header of column labels and a leading index column.
  std::string to_csv() const {
    std::ostringstream os;
    os.precision(17);
    os << "source";
    for (std::size_t j = 0; j < n_; ++j) os << ',' << render_label(static_cast<int>(j + 1));
    os << '\n';
    for (std::size_t i = 0; i < n_; ++i) {
      os << (i + 1);
      for (std::size_t j = 0; j < n_; ++j) os << ',' << (*this)(i, j);
      os << '\n';
    }
    return os.str();
  }

  bool operator==(const SimilarityMatrix&) const = default;

private:
  std::size_t n_ = 0;
  std::vector<double> values_;
};

struct FeatureWeights {
  double w_length = 1.0;
  double w_names = 3.0;
  double w_cooccur = 2.0;

  void validate() const {
    if (w_length < 0 || w_names < 0 || w_cooccur < 0) throw Error("feature weights must be non-negative");
    if (w_length == 0 && w_names == 0 && w_cooccur == 0) throw Error("at least one feature weight must be positive");
  }
};

namespace feature_detail {

inline void require_square(const std::vector<std::string>& s, const std::vector<std::string>& t) {
  if (s.size() != t.size() || s.size() < 2) throw Error("feature matrices need n >= 2 items on both sides");
}

/// Whitespace tokens with edge punctuation removed; empty tokens dropped.
inline std::vector<std::string> words(std::string_view item) {
  std::vector<std::string> out;
  for (auto& w : text::split_whitespace(item)) {
    auto s = text::strip_punct(w);
    if (!s.empty()) out.push_back(std::move(s));
  }
  return out;
}

/// 0-based rank of each item by code-point length; ties keep input order.
inline std::vector<std::size_t> length_ranks(const std::vector<std::string>& items) {
  std::vector<std::size_t> idx(items.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::vector<std::size_t> len(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) len[i] = text::length(items[i]);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return len[a] < len[b]; });
  std::vector<std::size_t> rank(items.size());
  for (std::size_t r = 0; r < idx.size(); ++r) rank[idx[r]] = r;
  return rank;
}

} // namespace feature_detail

inline SimilarityMatrix length_affinity(const std::vector<std::string>& source_items,
                                        const std::vector<std::string>& target_items) {
  feature_detail::require_square(source_items, target_items);
  const std::size_t n = source_items.size();
  const auto rs = feature_detail::length_ranks(source_items);
  const auto rt = feature_detail::length_ranks(target_items);
  SimilarityMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double gap = rs[i] > rt[j] ? static_cast<double>(rs[i] - rt[j]) : static_cast<double>(rt[j] - rs[i]);
      m(i, j) = 1.0 - gap / static_cast<double>(n - 1);
    }
  }
  return m;
}

/// Candidate proper names per item: capitalized tokens after the first
/// position, plus a capitalized first token whose lower-case form never
/// appears as an ordinary (lower-case) word anywhere in the item set.
/// Single-letter tokens ("A", "I") are never names.
inline std::vector<std::vector<std::string>> name_candidates(const std::vector<std::string>& items) {
  std::vector<std::vector<std::string>> tokens;
  std::set<std::string> lowercase_vocab;
  for (const auto& item : items) {
    tokens.push_back(feature_detail::words(item));
    for (const auto& w : tokens.back()) {
      if (!text::is_upper(text::code_points(w).front())) lowercase_vocab.insert(text::fold_case(w));
    }
  }
  std::vector<std::vector<std::string>> names(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    for (std::size_t p = 0; p < tokens[i].size(); ++p) {
      const auto& w = tokens[i][p];
      if (text::length(w) < 2 || !text::is_upper(text::code_points(w).front())) continue;
      if (p > 0 || !lowercase_vocab.contains(text::fold_case(w))) names[i].push_back(w);
    }
  }
  return names;
}

inline SimilarityMatrix name_anchor_affinity(const std::vector<std::string>& source_items,
                                             const std::vector<std::string>& target_items) {
  feature_detail::require_square(source_items, target_items);
  const std::size_t n = source_items.size();
  const auto ns = name_candidates(source_items);
  const auto nt = name_candidates(target_items);
  SimilarityMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double best = 0.0;
      for (const auto& a : ns[i]) {
        for (const auto& b : nt[j]) best = std::max(best, name_similarity(a, b));
      }
      m(i, j) = best;
    }
  }
  return m;
}

/// Case-folded word sets per item, for repeat counting.
inline std::vector<std::set<std::string>> folded_word_sets(const std::vector<std::string>& items) {
  std::vector<std::set<std::string>> out;
  for (const auto& item : items) {
    std::set<std::string> ws;
    for (const auto& w : feature_detail::words(item)) ws.insert(text::fold_case(w));
    out.push_back(std::move(ws));
  }
  return out;
}

/// Words occurring in the same number f >= 2 of items on both sides link
/// every item holding the source word to every item holding the target
/// word with weight 1/f. The sum is rescaled so the largest entry is 1.
inline SimilarityMatrix cooccurrence_affinity(const std::vector<std::string>& source_items,
                                              const std::vector<std::string>& target_items) {
  feature_detail::require_square(source_items, target_items);
  const std::size_t n = source_items.size();
  const auto ws = folded_word_sets(source_items);
  const auto wt = folded_word_sets(target_items);

  // frequency -> word -> items containing it
  auto index = [](const std::vector<std::set<std::string>>& sets) {
    std::map<std::string, std::vector<std::size_t>> where;
    for (std::size_t i = 0; i < sets.size(); ++i) {
      for (const auto& w : sets[i]) where[w].push_back(i);
    }
    std::map<std::size_t, std::vector<std::vector<std::size_t>>> by_freq;
    for (auto& [w, items] : where) {
      if (items.size() >= 2) by_freq[items.size()].push_back(items);
    }
    return by_freq;
  };
  const auto fs = index(ws);
  const auto ft = index(wt);

  SimilarityMatrix m(n);
  for (const auto& [f, source_groups] : fs) {
    auto it = ft.find(f);
    if (it == ft.end()) continue;
    const double inc = 1.0 / static_cast<double>(f);
    for (const auto& rows : source_groups) {
      for (const auto& cols : it->second) {
        for (auto i : rows) {
          for (auto j : cols) m(i, j) += inc;
        }
      }
    }
  }
  const double top = m.max();
  if (top > 0) m = m * (1.0 / top);
  return m;
}

struct FeatureMatrices {
  SimilarityMatrix length;
  SimilarityMatrix names;
  SimilarityMatrix cooccur;
};

inline FeatureMatrices compute_features(const MatchUpPuzzle& puzzle) {
  return {length_affinity(puzzle.source_items, puzzle.target_items),
          name_anchor_affinity(puzzle.source_items, puzzle.target_items),
          cooccurrence_affinity(puzzle.source_items, puzzle.target_items)};
}

inline SimilarityMatrix combine(const FeatureMatrices& f, const FeatureWeights& w) {
  SimilarityMatrix out = f.length * w.w_length;
  out += f.names * w.w_names;
  out += f.cooccur * w.w_cooccur;
  return out;
}

inline SimilarityMatrix build_similarity(const MatchUpPuzzle& puzzle, const FeatureWeights& weights) {
  weights.validate();
  return combine(compute_features(puzzle), weights);
}

} // namespace matchup
