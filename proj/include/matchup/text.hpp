#pragma once

// UTF-8 text utilities backed by ICU: validation, NFC normalization,
// whitespace folding, case folding and code-point level access.

#include <string>
#include <string_view>
#include <vector>

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/ustring.h>

#include "matchup/error.hpp"

namespace matchup::text {

inline bool is_valid_utf8(std::string_view s) {
  UErrorCode status = U_ZERO_ERROR;
  int32_t needed = 0;
  u_strFromUTF8(nullptr, 0, &needed, s.data(), static_cast<int32_t>(s.size()), &status);
  return status == U_BUFFER_OVERFLOW_ERROR || status == U_STRING_NOT_TERMINATED_WARNING ||
         U_SUCCESS(status);
}

/// Returns the NFC form of `s`. Throws EncodingError on ill-formed UTF-8.
inline std::string nfc(std::string_view s) {
  if (!is_valid_utf8(s)) {
    throw EncodingError("input is not well-formed UTF-8");
  }
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* norm = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) {
    throw EncodingError(std::string("ICU NFC unavailable: ") + u_errorName(status));
  }
  icu::UnicodeString u = icu::UnicodeString::fromUTF8(icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
  if (norm->isNormalized(u, status) && U_SUCCESS(status)) {
    return std::string(s);
  }
  status = U_ZERO_ERROR;
  icu::UnicodeString out = norm->normalize(u, status);
  if (U_FAILURE(status)) {
    throw EncodingError(std::string("NFC normalization failed: ") + u_errorName(status));
  }
  std::string result;
  out.toUTF8String(result);
  return result;
}

/// Decodes well-formed UTF-8 into code points.
inline std::vector<char32_t> code_points(std::string_view s) {
  icu::UnicodeString u = icu::UnicodeString::fromUTF8(icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
  std::vector<char32_t> cps;
  cps.reserve(static_cast<std::size_t>(u.length()));
  for (int32_t i = 0; i < u.length();) {
    UChar32 c = u.char32At(i);
    cps.push_back(static_cast<char32_t>(c));
    i += U16_LENGTH(c);
  }
  return cps;
}

inline std::size_t length(std::string_view s) { return code_points(s).size(); }

inline std::string encode(const std::vector<char32_t>& cps) {
  icu::UnicodeString u;
  for (char32_t c : cps) u.append(static_cast<UChar32>(c));
  std::string out;
  u.toUTF8String(out);
  return out;
}

inline bool is_space(char32_t c) { return u_isUWhiteSpace(static_cast<UChar32>(c)); }

inline bool is_punct(char32_t c) { return u_ispunct(static_cast<UChar32>(c)); }

inline bool is_upper(char32_t c) {
  return u_isupper(static_cast<UChar32>(c)) || u_istitle(static_cast<UChar32>(c));
}

/// Full Unicode case folding.
inline std::string fold_case(std::string_view s) {
  icu::UnicodeString u = icu::UnicodeString::fromUTF8(icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
  u.foldCase();
  std::string out;
  u.toUTF8String(out);
  return out;
}

/// Trims Unicode whitespace at both ends and collapses interior runs to a
/// single ASCII space.
inline std::string squeeze_whitespace(std::string_view s) {
  std::vector<char32_t> out;
  bool pending_space = false;
  for (char32_t c : code_points(s)) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(U' ');
    pending_space = false;
    out.push_back(c);
  }
  return encode(out);
}

inline std::string trim(std::string_view s) {
  auto cps = code_points(s);
  std::size_t b = 0, e = cps.size();
  while (b < e && is_space(cps[b])) ++b;
  while (e > b && is_space(cps[e - 1])) --e;
  return encode({cps.begin() + static_cast<std::ptrdiff_t>(b), cps.begin() + static_cast<std::ptrdiff_t>(e)});
}

/// Splits on Unicode whitespace; empty pieces are dropped.
inline std::vector<std::string> split_whitespace(std::string_view s) {
  std::vector<std::string> words;
  std::vector<char32_t> cur;
  for (char32_t c : code_points(s)) {
    if (is_space(c)) {
      if (!cur.empty()) words.push_back(encode(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) words.push_back(encode(cur));
  return words;
}

/// Removes leading and trailing punctuation code points.
inline std::string strip_punct(std::string_view s) {
  auto cps = code_points(s);
  std::size_t b = 0, e = cps.size();
  while (b < e && is_punct(cps[b])) ++b;
  while (e > b && is_punct(cps[e - 1])) --e;
  return encode({cps.begin() + static_cast<std::ptrdiff_t>(b), cps.begin() + static_cast<std::ptrdiff_t>(e)});
}

/// Removes every punctuation code point.
inline std::string remove_punct(std::string_view s) {
  std::vector<char32_t> out;
  for (char32_t c : code_points(s)) {
    if (!is_punct(c)) out.push_back(c);
  }
  return encode(out);
}

inline bool contains_newline(std::string_view s) {
  for (char32_t c : code_points(s)) {
    if (c == U'\n' || c == U'\r' || c == 0x2028 || c == 0x2029 || c == 0x0085) return true;
  }
  return false;
}

} // namespace matchup::text
