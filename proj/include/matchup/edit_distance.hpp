#pragma once

#include <algorithm>
#include <numeric>
#include <string_view>
#include <vector>

#include "matchup/text.hpp"

namespace matchup {

/// Levenshtein distance over code points (unit insert/delete/substitute).
inline std::size_t levenshtein(const std::vector<char32_t>& a, const std::vector<char32_t>& b) {
  std::vector<std::size_t> row(b.size() + 1);
  std::iota(row.begin(), row.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

inline std::size_t levenshtein(std::string_view a, std::string_view b) {
  return levenshtein(text::code_points(a), text::code_points(b));
}

/// 1 - distance / max length, compared case-folded. Two empty strings are
/// identical (1.0).
inline double name_similarity(std::string_view a, std::string_view b) {
  auto fa = text::code_points(text::fold_case(a));
  auto fb = text::code_points(text::fold_case(b));
  const std::size_t longest = std::max(fa.size(), fb.size());
  if (longest == 0) return 1.0;
  return 1.0 - static_cast<double>(levenshtein(fa, fb)) / static_cast<double>(longest);
}

} // namespace matchup
