#pragma once

#include <string>

#include "matchup/assignment.hpp"
#include "matchup/features.hpp"
#include "matchup/model.hpp"

namespace matchup {

struct SolveResult {
  PredictedKey key;
  FeatureMatrices features;
  SimilarityMatrix combined;
  double total = 0.0;
  /// Every combined entry is equal, so the key is just the tie-break order.
  bool uninformative = false;
};

/// Baseline Match-Up solver: weighted feature matrices, then the optimal
/// assignment over their sum.
inline SolveResult solve(const MatchUpPuzzle& puzzle, const FeatureWeights& weights = {}) {
  weights.validate();
  SolveResult r;
  r.features = compute_features(puzzle);
  r.combined = combine(r.features, weights);
  const Assignment a = solve_assignment(r.combined);
  r.key = a.to_key();
  r.total = a.total;
  r.uninformative = r.combined.max() == r.combined.min();
  return r;
}

} // namespace matchup
