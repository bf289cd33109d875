#include "econoframe/relevance.hpp"

#include <cctype>
#include <set>

#include "econoframe/util.hpp"

namespace econoframe {

namespace {

bool is_alnum(unsigned char c) { return std::isalnum(c) != 0; }

}  // namespace

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  const std::size_t n = text.size();
  std::string cur;
  for (std::size_t i = 0; i < n; ++i) {
    const unsigned char c = static_cast<unsigned char>(text[i]);
    bool keep = is_alnum(c);
    if (!keep && (c == '&' || c == '.')) {
      // Internal only: both neighbors must be alphanumeric.
      keep = i > 0 && i + 1 < n &&
             is_alnum(static_cast<unsigned char>(text[i - 1])) &&
             is_alnum(static_cast<unsigned char>(text[i + 1]));
    }
    if (keep) {
      cur += static_cast<char>(std::tolower(c));
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

Lexicon parse_lexicon(const std::string& content) {
  Lexicon lex;
  std::set<std::string> seen;
  for (const std::string& raw : split(content, '\n')) {
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    line = to_lower(line);
    if (!seen.insert(line).second) continue;

    LexiconPattern p;
    const bool wildcard = line.back() == '*';
    std::string base = wildcard ? line.substr(0, line.size() - 1) : line;
    if (line.find('*') != (wildcard ? line.size() - 1 : std::string::npos))
      throw Error("wildcard only allowed at end of pattern: " + line);
    p.tokens = tokenize(base);
    if (p.tokens.empty()) throw Error("empty lexicon pattern: " + line);
    if (wildcard && p.tokens.size() != 1)
      throw Error("wildcard only allowed on single-token patterns: " + line);
    p.prefix_wildcard = wildcard;
    lex.patterns.push_back(std::move(p));
  }
  if (lex.patterns.empty()) throw Error("lexicon has no patterns");
  return lex;
}

Lexicon load_lexicon(const std::string& path) {
  return parse_lexicon(read_file(path));
}

bool sentence_matches(const std::vector<std::string>& tokens,
                      const Lexicon& lexicon) {
  for (const auto& p : lexicon.patterns) {
    if (p.prefix_wildcard) {
      const std::string& prefix = p.tokens[0];
      for (const auto& t : tokens) {
        if (t.size() >= prefix.size() &&
            t.compare(0, prefix.size(), prefix) == 0)
          return true;
      }
    } else {
      if (p.tokens.size() > tokens.size()) continue;
      const std::size_t last = tokens.size() - p.tokens.size();
      for (std::size_t i = 0; i <= last; ++i) {
        bool all = true;
        for (std::size_t j = 0; j < p.tokens.size(); ++j) {
          if (tokens[i + j] != p.tokens[j]) {
            all = false;
            break;
          }
        }
        if (all) return true;
      }
    }
  }
  return false;
}

int matching_sentence_count(const Article& article, const Lexicon& lexicon) {
  int count = 0;
  for (std::size_t i = 0; i < article.sentences.size(); ++i) {
    if (sentence_matches(tokenize(article.sentence_text(i)), lexicon)) ++count;
  }
  return count;
}

bool is_economic(const Article& article, const Lexicon& lexicon) {
  return matching_sentence_count(article, lexicon) >= kEconomicSentenceThreshold;
}

}  // namespace econoframe
