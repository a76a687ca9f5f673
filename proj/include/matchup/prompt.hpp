#pragma once

// Zero-shot prompts. Rosetta Stone prompts carry the preamble, the given
// pairs and the translation questions; Match-Up prompts carry the preamble
// and the two lists to match. Neither contains examples or solution hints.

#include <sstream>
#include <string>

#include "matchup/model.hpp"

namespace matchup {

namespace prompt_detail {

inline void preamble(std::ostringstream& os, const std::string& text) {
  os << "Here is a linguistics olympiad puzzle. Solve it using only the information given.\n\n";
  if (!text::trim(text).empty()) os << text << "\n\n";
}

} // namespace prompt_detail

inline std::string build_prompt(const RosettaPuzzle& p) {
  const std::string& lang = p.meta.language_name;
  std::ostringstream os;
  prompt_detail::preamble(os, p.preamble);
  os << "Below are some expressions in " << lang << " with their English translations.\n\n";
  for (std::size_t i = 0; i < p.given_pairs.size(); ++i) {
    os << (i + 1) << ". " << lang << ": " << p.given_pairs[i].source_text << "\n";
    os << "   English: " << p.given_pairs[i].target_text << "\n";
  }
  os << "\nTranslate the following.\n\n";
  for (std::size_t k = 0; k < p.questions.size(); ++k) {
    const auto& q = p.questions[k];
    os << "Q" << (k + 1) << ". Translate into " << (q.direction == Direction::ToSource ? lang : "English") << ": "
       << q.prompt_text << "\n";
  }
  os << "\nAnswer with exactly one line per question in the form \"Qk: <answer>\" (for example \"Q1: ...\"), "
        "in order from Q1 to Q"
     << p.questions.size() << ", and nothing else.\n";
  return os.str();
}

inline std::string build_prompt(const MatchUpPuzzle& p) {
  const std::string& lang = p.meta.language_name;
  const std::size_t n = p.size();
  std::ostringstream os;
  prompt_detail::preamble(os, p.preamble);
  os << "Below are some expressions in " << lang << ", followed by their English translations in a random order.\n\n";
  os << lang << ":\n";
  for (std::size_t i = 0; i < n; ++i) os << (i + 1) << ". " << p.source_items[i] << "\n";
  os << "\nEnglish:\n";
  for (std::size_t j = 0; j < n; ++j) os << render_label(static_cast<int>(j + 1)) << ". " << p.target_items[j] << "\n";
  os << "\nDetermine the correct correspondence (" << render_label(1) << " to " << render_label(static_cast<int>(n))
     << "). Each English translation matches exactly one " << lang << " expression.\n"
     << "Answer with exactly one line per " << lang << " expression in the form \"i → L\" (for example \"1 → "
     << render_label(1) << "\"), covering 1 to " << n << ", and nothing else.\n";
  return os.str();
}

inline std::string build_prompt(const Puzzle& p) {
  return std::visit([](const auto& x) { return build_prompt(x); }, p);
}

} // namespace matchup
