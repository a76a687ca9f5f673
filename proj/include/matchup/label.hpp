#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace matchup {

/// Target-item label. Rank 1 is "A"; ranks past 26 continue spreadsheet
/// style ("AA", "AB", ...).
struct Label {
  int rank = 0;

  auto operator<=>(const Label&) const = default;
};

inline std::string render_label(int rank) {
  std::string out;
  while (rank > 0) {
    --rank;
    out.insert(out.begin(), static_cast<char>('A' + rank % 26));
    rank /= 26;
  }
  return out;
}

inline std::string render_label(Label l) { return render_label(l.rank); }

/// Parses an upper-case spreadsheet label; nullopt for anything else.
inline std::optional<int> parse_label(std::string_view s) {
  if (s.empty() || s.size() > 6) return std::nullopt;
  int rank = 0;
  for (char c : s) {
    if (c < 'A' || c > 'Z') return std::nullopt;
    rank = rank * 26 + (c - 'A' + 1);
  }
  return rank;
}

} // namespace matchup
