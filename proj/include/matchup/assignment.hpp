#pragma once

// Maximum-weight perfect assignment on a square similarity matrix. Among
// optimal assignments the lexicographically smallest column sequence wins.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "matchup/error.hpp"
#include "matchup/features.hpp"
#include "matchup/model.hpp"

namespace matchup {

struct Assignment {
  /// columns[i] is the 0-based target column assigned to source row i.
  std::vector<std::size_t> columns;
  double total = 0.0;

  AnswerKey to_key() const {
    AnswerKey k;
    for (auto c : columns) k.labels.push_back(Label{static_cast<int>(c + 1)});
    return k;
  }
};

inline constexpr std::size_t kExhaustiveLimit = 8;

/// Sum of the chosen entries, accumulated in row order.
inline double assignment_total(const SimilarityMatrix& m, const std::vector<std::size_t>& columns) {
  double t = 0.0;
  for (std::size_t i = 0; i < columns.size(); ++i) t += m(i, columns[i]);
  return t;
}

namespace assign_detail {

inline double tie_tolerance(const SimilarityMatrix& m) {
  double scale = 1.0;
  for (double v : m.values()) scale = std::max(scale, std::abs(v));
  return 1e-9 * scale * static_cast<double>(std::max<std::size_t>(m.size(), 1));
}

inline void require_valid(const SimilarityMatrix& m) {
  if (!m.all_finite()) throw Error("similarity matrix has non-finite entries");
}

/// Hungarian algorithm with potentials (O(n^3)), maximizing total weight on
/// a dense row-major n x n matrix. Returns the optimal column per row.
inline std::vector<std::size_t> hungarian_max(const std::vector<double>& w, std::size_t n) {
  if (n == 0) return {};
  const double inf = std::numeric_limits<double>::infinity();
  const double top = *std::max_element(w.begin(), w.end());
  // 1-based rows/columns; column 0 is the virtual start.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  auto cost = [&](std::size_t i, std::size_t j) { return top - w[(i - 1) * n + (j - 1)]; };
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0, j) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> columns(n);
  for (std::size_t j = 1; j <= n; ++j) columns[p[j] - 1] = j - 1;
  return columns;
}

inline double optimum_value(const SimilarityMatrix& m, const std::vector<std::size_t>& rows,
                            const std::vector<std::size_t>& cols) {
  const std::size_t k = rows.size();
  if (k == 0) return 0.0;
  std::vector<double> sub(k * k);
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = 0; b < k; ++b) sub[a * k + b] = m(rows[a], cols[b]);
  }
  const auto best = hungarian_max(sub, k);
  double t = 0.0;
  for (std::size_t a = 0; a < k; ++a) t += sub[a * k + best[a]];
  return t;
}

} // namespace assign_detail

/// Exhaustive search over all n! permutations in lexicographic order.
inline Assignment exhaustive_assignment(const SimilarityMatrix& m) {
  assign_detail::require_valid(m);
  const std::size_t n = m.size();
  const double eps = assign_detail::tie_tolerance(m);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Assignment best{perm, assignment_total(m, perm)};
  while (std::next_permutation(perm.begin(), perm.end())) {
    const double t = assignment_total(m, perm);
    if (t > best.total + eps) best = {perm, t};
  }
  return best;
}

/// Hungarian optimum followed by a row-by-row pass that fixes each row to
/// the smallest column still compatible with the optimal total.
inline Assignment hungarian_assignment(const SimilarityMatrix& m) {
  assign_detail::require_valid(m);
  const std::size_t n = m.size();
  const auto first = assign_detail::hungarian_max(m.values(), n);
  const double optimum = assignment_total(m, first);
  const double eps = assign_detail::tie_tolerance(m);

  std::vector<std::size_t> columns(n);
  std::vector<char> taken(n, false);
  double fixed = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::size_t> rest_rows;
    for (std::size_t r = i + 1; r < n; ++r) rest_rows.push_back(r);
    bool placed = false;
    for (std::size_t j = 0; j < n && !placed; ++j) {
      if (taken[j]) continue;
      std::vector<std::size_t> rest_cols;
      for (std::size_t c = 0; c < n; ++c) {
        if (!taken[c] && c != j) rest_cols.push_back(c);
      }
      const double reachable = fixed + m(i, j) + assign_detail::optimum_value(m, rest_rows, rest_cols);
      if (reachable >= optimum - eps) {
        columns[i] = j;
        taken[j] = true;
        fixed += m(i, j);
        placed = true;
      }
    }
    if (!placed) {
      // Unreachable for finite input; fall back to the plain optimum.
      return {first, optimum};
    }
  }
  return {columns, assignment_total(m, columns)};
}

/// Exhaustive search up to kExhaustiveLimit items, Hungarian beyond.
inline Assignment solve_assignment(const SimilarityMatrix& m) {
  if (m.size() == 0) return {};
  return m.size() <= kExhaustiveLimit ? exhaustive_assignment(m) : hungarian_assignment(m);
}

} // namespace matchup
