#include <gtest/gtest.h>

#include <random>

#include "matchup/features.hpp"
#include "matchup/solver.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace matchup;
using namespace testing_support;

namespace {

void expect_matches(const SimilarityMatrix& got, const oracle::Matrix& want, double tol = 1e-12) {
  ASSERT_EQ(got.size(), want.size());
  for (std::size_t i = 0; i < want.size(); ++i) {
    for (std::size_t j = 0; j < want.size(); ++j) {
      EXPECT_NEAR(got(i, j), want[i][j], tol) << "entry (" << i + 1 << ", " << render_label(static_cast<int>(j + 1)) << ")";
    }
  }
}

std::size_t row_argmax(const SimilarityMatrix& m, std::size_t i) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < m.size(); ++j) {
    if (m(i, j) > m(i, best)) best = j;
  }
  return best;
}

} // namespace

TEST(EditDistance, Basics) {
  EXPECT_EQ(levenshtein("kitten", "sitting"), 3u);
  EXPECT_EQ(levenshtein("", "abc"), 3u);
  EXPECT_EQ(levenshtein("ŋai", "ŋoi"), 1u);
  EXPECT_DOUBLE_EQ(name_similarity("Meeri", "Mary"), 0.4);
  EXPECT_DOUBLE_EQ(name_similarity("MARY", "mary"), 1.0);
  EXPECT_DOUBLE_EQ(name_similarity("", ""), 1.0);
  EXPECT_NEAR(name_similarity("Alicja", "Alice"), 1.0 - 2.0 / 6.0, 1e-15);
  EXPECT_NEAR(name_similarity("Piotr", "Peter"), 0.4, 1e-15);
}

TEST(EditDistance, AgreesWithOracleOnRandomStrings) {
  std::mt19937 rng(3);
  const std::vector<std::string> alphabet{"a", "b", "ŋ", "ł", "e"};
  for (int trial = 0; trial < 300; ++trial) {
    std::string a, b;
    for (int k = static_cast<int>(rng() % 7); k > 0; --k) a += alphabet[rng() % alphabet.size()];
    for (int k = static_cast<int>(rng() % 7); k > 0; --k) b += alphabet[rng() % alphabet.size()];
    EXPECT_EQ(levenshtein(a, b), oracle::levenshtein(oracle::decode(a), oracle::decode(b))) << a << " / " << b;
  }
}

TEST(LengthAffinity, MatchesOracle) {
  const auto g = gilbertese_table3();
  expect_matches(length_affinity(g.source_items, g.target_items), oracle::length(g.source_items, g.target_items));
  const auto p = polish();
  expect_matches(length_affinity(p.source_items, p.target_items), oracle::length(p.source_items, p.target_items));
}

TEST(LengthAffinity, LongestItemsAgree) {
  const auto g = gilbertese_table3();
  const auto m = length_affinity(g.source_items, g.target_items);
  EXPECT_DOUBLE_EQ(m(9, 10), 1.0);  // item 10 vs K
  // item 10 and K are strictly the longest on their sides
  for (std::size_t k = 0; k < 12; ++k) {
    if (k != 9) EXPECT_LT(text::length(g.source_items[k]), text::length(g.source_items[9]));
    if (k != 10) EXPECT_LT(text::length(g.target_items[k]), text::length(g.target_items[10]));
  }
  const std::vector<std::string> s{"a", "bb", "ccc"}, t{"xxx", "y", "zz"};
  const auto small = length_affinity(s, t);
  EXPECT_DOUBLE_EQ(small(2, 0), 1.0);
  EXPECT_DOUBLE_EQ(small(2, 1), 0.0);
}

TEST(NameAnchor, MatchesOracle) {
  const auto g = gilbertese_table3();
  expect_matches(name_anchor_affinity(g.source_items, g.target_items), oracle::name_anchor(g.source_items, g.target_items));
  const auto p = polish();
  expect_matches(name_anchor_affinity(p.source_items, p.target_items), oracle::name_anchor(p.source_items, p.target_items));
}

TEST(NameAnchor, MeeriMaryIsRowMaximal) {
  const auto g = gilbertese_table3();
  ASSERT_EQ(g.source_items[3], "E nakonako nakon te titooa Meeri");
  ASSERT_EQ(g.target_items[6], "Mary is walking to the store");
  const auto m = name_anchor_affinity(g.source_items, g.target_items);
  EXPECT_NEAR(m(3, 6), oracle::similarity("Meeri", "Mary"), 1e-15);
  EXPECT_NEAR(m(3, 6), 0.4, 1e-15);
  for (std::size_t j = 0; j < 12; ++j) {
    if (j != 6) EXPECT_LT(m(3, j), m(3, 6));
  }
}

TEST(NameAnchor, PolishNamesPointOnlyAtTheirTargets) {
  const auto p = polish();
  const auto m = name_anchor_affinity(p.source_items, p.target_items);
  const std::set<std::size_t> alice{2, 3}, peter{1};
  for (std::size_t i : {0u, 5u}) {  // Alicja sentences
    for (std::size_t j = 0; j < 6; ++j) EXPECT_EQ(m(i, j) > 0, alice.contains(j)) << i << "," << j;
  }
  for (std::size_t j = 0; j < 6; ++j) EXPECT_EQ(m(2, j) > 0, peter.contains(j)) << "Piotr," << j;
}

TEST(NameAnchor, CandidateRules) {
  const auto names = name_candidates({"The cat saw Alice.", "Alice saw the cat.", "I saw A cat"});
  EXPECT_EQ(names[0], std::vector<std::string>{"Alice"});
  EXPECT_EQ(names[1], std::vector<std::string>{"Alice"});
  EXPECT_TRUE(names[2].empty());
  const auto none = name_anchor_affinity({"a b", "c d"}, {"e f", "g h"});
  EXPECT_DOUBLE_EQ(none.max(), 0.0);
}

TEST(Cooccurrence, MatchesOracle) {
  const auto g = gilbertese_table3();
  expect_matches(cooccurrence_affinity(g.source_items, g.target_items), oracle::cooccurrence(g.source_items, g.target_items));
  const auto p = polish();
  expect_matches(cooccurrence_affinity(p.source_items, p.target_items), oracle::cooccurrence(p.source_items, p.target_items));
}

TEST(Cooccurrence, TomorrowBoostsExactlyItsItems) {
  const auto g = gilbertese_table3();
  const auto dfs = oracle::document_frequency(g.source_items);
  const auto dft = oracle::document_frequency(g.target_items);
  ASSERT_EQ(dfs.at("ningaabong"), 2);
  ASSERT_EQ(dft.at("tomorrow"), 2);
  std::set<std::pair<std::size_t, std::size_t>> boosted;
  for (std::size_t i = 0; i < 12; ++i) {
    for (std::size_t j = 0; j < 12; ++j) {
      if (oracle::contains(g.source_items[i], "ningaabong") && oracle::contains(g.target_items[j], "tomorrow")) {
        boosted.insert({i + 1, j + 1});
      }
    }
  }
  EXPECT_EQ(boosted, (std::set<std::pair<std::size_t, std::size_t>>{{9, 6}, {9, 1}, {11, 6}, {11, 1}}));  // F, A
}

TEST(Cooccurrence, UniqueTokensContributeNothing) {
  const auto m = cooccurrence_affinity({"a b", "c d", "e f"}, {"u v", "w x", "y z"});
  EXPECT_DOUBLE_EQ(m.max(), 0.0);
  const auto k = cooccurrence_affinity({"a b", "a c", "d"}, {"x y", "z", "x w"});
  EXPECT_DOUBLE_EQ(k(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(k(1, 2), 1.0);
  EXPECT_DOUBLE_EQ(k(2, 0), 0.0);
  EXPECT_DOUBLE_EQ(k(0, 1), 0.0);
}

TEST(Features, ColumnPermutationEquivariance) {
  const auto g = gilbertese_table3();
  std::mt19937_64 rng(5);
  // Target lengths in this puzzle are distinct, so the length feature is
  // equivariant too; with ties the earlier item gets the lower rank.
  std::set<std::size_t> lengths;
  for (const auto& t : g.target_items) lengths.insert(text::length(t));
  const bool distinct_lengths = lengths.size() == g.size();
  const auto base = compute_features(g);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::size_t> perm(g.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::string> targets(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) targets[j] = g.target_items[perm[j]];
    const auto names = name_anchor_affinity(g.source_items, targets);
    const auto co = cooccurrence_affinity(g.source_items, targets);
    const auto len = length_affinity(g.source_items, targets);
    for (std::size_t i = 0; i < g.size(); ++i) {
      for (std::size_t j = 0; j < g.size(); ++j) {
        EXPECT_EQ(names(i, j), base.names(i, perm[j]));
        EXPECT_EQ(co(i, j), base.cooccur(i, perm[j]));
        if (distinct_lengths) EXPECT_EQ(len(i, j), base.length(i, perm[j]));
      }
    }
  }
}

TEST(Features, BuildSimilarityIsWeightedSum) {
  const auto g = gilbertese_table3();
  const auto f = compute_features(g);
  const auto names_only = build_similarity(g, {0, 1, 0});
  EXPECT_EQ(names_only, f.names);
  const auto m = build_similarity(g, {});
  for (std::size_t i = 0; i < 12; ++i) {
    for (std::size_t j = 0; j < 12; ++j) {
      EXPECT_NEAR(m(i, j), f.length(i, j) + 3 * f.names(i, j) + 2 * f.cooccur(i, j), 1e-12);
    }
  }
  EXPECT_EQ(row_argmax(m, 3), 6u);  // 4 -> G
  EXPECT_THROW(build_similarity(g, {0, 0, 0}), Error);
  EXPECT_THROW(build_similarity(g, {-1, 1, 1}), Error);
}

TEST(Features, TwoItemPuzzleIsFinite) {
  MatchUpPuzzle p;
  p.source_items = {"x", "y"};
  p.target_items = {"b", "a"};
  p.gold_key = AnswerKey::from_ranks({2, 1});
  const auto m = build_similarity(p, {});
  EXPECT_EQ(m.size(), 2u);
  EXPECT_TRUE(m.all_finite());
}

TEST(Features, CsvDump) {
  SimilarityMatrix m(2, {0.5, 1.0, 0.0, 0.25});
  EXPECT_EQ(m.to_csv(), "source,A,B\n1,0.5,1\n2,0,0.25\n");
}
