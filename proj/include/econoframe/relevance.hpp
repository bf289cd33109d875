#pragma once

#include <string>
#include <vector>

#include "econoframe/types.hpp"

namespace econoframe {

// One lexicon pattern: either a literal token sequence or a single token
// with a trailing wildcard (prefix match).
struct LexiconPattern {
  std::vector<std::string> tokens;  // lowercase
  bool prefix_wildcard = false;     // only valid for single-token patterns
};

struct Lexicon {
  std::vector<LexiconPattern> patterns;
  bool empty() const { return patterns.empty(); }
};

// Lowercases and splits on non-alphanumeric characters, keeping '&' and '.'
// when they sit between alphanumerics ("s&p 500" -> "s&p", "500").
std::vector<std::string> tokenize(const std::string& text);

// One pattern per line; '#' comment lines and blanks ignored; duplicates
// dropped. A file with no patterns is an error, as is a wildcard anywhere
// but the end of a single-token pattern.
Lexicon load_lexicon(const std::string& path);
Lexicon parse_lexicon(const std::string& content);

// True iff any pattern matches: a wildcard pattern matches a token with the
// pattern as prefix; a phrase pattern matches a contiguous token run exactly.
bool sentence_matches(const std::vector<std::string>& tokens,
                      const Lexicon& lexicon);

// Counts sentences containing at least one lexicon term (a sentence with two
// terms still counts once); the article is economic at three or more.
int matching_sentence_count(const Article& article, const Lexicon& lexicon);
bool is_economic(const Article& article, const Lexicon& lexicon);

inline constexpr int kEconomicSentenceThreshold = 3;

}  // namespace econoframe
