#pragma once

// Brute-force reference computations used to check the library. They are
// written from the feature definitions, share no code with the library and
// favour obviousness over speed. Case handling is ASCII-only, which covers
// every capital letter in the fixtures.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

namespace oracle {

inline std::u32string decode(const std::string& s) {
  std::u32string out;
  for (std::size_t i = 0; i < s.size();) {
    const auto c = static_cast<unsigned char>(s[i]);
    int extra = c < 0x80 ? 0 : c < 0xE0 ? 1 : c < 0xF0 ? 2 : 3;
    char32_t cp = extra == 0 ? c : extra == 1 ? (c & 0x1F) : extra == 2 ? (c & 0x0F) : (c & 0x07);
    for (int k = 1; k <= extra; ++k) cp = (cp << 6) | (static_cast<unsigned char>(s[i + static_cast<std::size_t>(k)]) & 0x3F);
    out.push_back(cp);
    i += static_cast<std::size_t>(extra) + 1;
  }
  return out;
}

inline std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

inline std::vector<std::string> tokens(const std::string& item) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    std::size_t b = 0, e = cur.size();
    while (b < e && std::ispunct(static_cast<unsigned char>(cur[b]))) ++b;
    while (e > b && std::ispunct(static_cast<unsigned char>(cur[e - 1]))) --e;
    if (e > b) out.push_back(cur.substr(b, e - b));
    cur.clear();
  };
  for (char c : item) {
    if (c == ' ') flush();
    else cur.push_back(c);
  }
  flush();
  return out;
}

/// Full-table edit distance.
inline std::size_t levenshtein(const std::u32string& a, const std::u32string& b) {
  std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    }
  }
  return d[a.size()][b.size()];
}

inline double similarity(const std::string& a, const std::string& b) {
  const auto x = decode(lower(a)), y = decode(lower(b));
  return 1.0 - static_cast<double>(levenshtein(x, y)) / static_cast<double>(std::max(x.size(), y.size()));
}

using Matrix = std::vector<std::vector<double>>;

inline Matrix length(const std::vector<std::string>& s, const std::vector<std::string>& t) {
  auto ranks = [](const std::vector<std::string>& items) {
    std::vector<std::size_t> r(items.size());
    for (std::size_t i = 0; i < items.size(); ++i) {
      // rank = number of items strictly shorter, plus equal-length items earlier
      for (std::size_t k = 0; k < items.size(); ++k) {
        const auto li = decode(items[i]).size(), lk = decode(items[k]).size();
        if (lk < li || (lk == li && k < i)) ++r[i];
      }
    }
    return r;
  };
  const auto rs = ranks(s), rt = ranks(t);
  const double n1 = static_cast<double>(s.size() - 1);
  Matrix m(s.size(), std::vector<double>(t.size()));
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = 0; j < t.size(); ++j) {
      m[i][j] = 1.0 - std::abs(static_cast<double>(rs[i]) - static_cast<double>(rt[j])) / n1;
    }
  }
  return m;
}

inline std::vector<std::vector<std::string>> names(const std::vector<std::string>& items) {
  std::set<std::string> vocab;
  for (const auto& it : items) {
    for (const auto& w : tokens(it)) {
      if (!std::isupper(static_cast<unsigned char>(w[0]))) vocab.insert(lower(w));
    }
  }
  std::vector<std::vector<std::string>> out;
  for (const auto& it : items) {
    const auto ws = tokens(it);
    std::vector<std::string> ns;
    for (std::size_t p = 0; p < ws.size(); ++p) {
      if (decode(ws[p]).size() < 2 || !std::isupper(static_cast<unsigned char>(ws[p][0]))) continue;
      if (p > 0 || !vocab.count(lower(ws[p]))) ns.push_back(ws[p]);
    }
    out.push_back(ns);
  }
  return out;
}

inline Matrix name_anchor(const std::vector<std::string>& s, const std::vector<std::string>& t) {
  const auto ns = names(s), nt = names(t);
  Matrix m(s.size(), std::vector<double>(t.size(), 0.0));
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = 0; j < t.size(); ++j) {
      for (const auto& a : ns[i]) {
        for (const auto& b : nt[j]) m[i][j] = std::max(m[i][j], similarity(a, b));
      }
    }
  }
  return m;
}

/// Number of items containing each lower-cased token.
inline std::map<std::string, int> document_frequency(const std::vector<std::string>& items) {
  std::map<std::string, int> df;
  for (const auto& it : items) {
    std::set<std::string> seen;
    for (const auto& w : tokens(it)) seen.insert(lower(w));
    for (const auto& w : seen) df[w]++;
  }
  return df;
}

inline bool contains(const std::string& item, const std::string& token) {
  for (const auto& w : tokens(item)) {
    if (lower(w) == token) return true;
  }
  return false;
}

/// Entry (i, j): sum of 1/f over token pairs (s in item i, t in item j)
/// sharing frequency f >= 2; then divided by the largest entry.
inline Matrix cooccurrence(const std::vector<std::string>& s, const std::vector<std::string>& t) {
  const auto dfs = document_frequency(s), dft = document_frequency(t);
  Matrix m(s.size(), std::vector<double>(t.size(), 0.0));
  double top = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = 0; j < t.size(); ++j) {
      for (const auto& [a, fa] : dfs) {
        if (fa < 2 || !contains(s[i], a)) continue;
        for (const auto& [b, fb] : dft) {
          if (fb == fa && contains(t[j], b)) m[i][j] += 1.0 / fa;
        }
      }
      top = std::max(top, m[i][j]);
    }
  }
  if (top > 0) {
    for (auto& row : m) {
      for (auto& v : row) v /= top;
    }
  }
  return m;
}

/// Best total and lexicographically smallest optimal permutation by
/// enumerating all n! permutations.
struct Best {
  double total = 0.0;
  std::vector<std::size_t> columns;
};

inline Best exhaustive(const Matrix& m) {
  const std::size_t n = m.size();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Best best;
  bool first = true;
  do {
    double t = 0.0;
    for (std::size_t i = 0; i < n; ++i) t += m[i][perm[i]];
    if (first || t > best.total) {
      best = {t, perm};
      first = false;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

} // namespace oracle
