#include "econoframe/quantities.hpp"

#include <cctype>
#include <sstream>

#include <json.hpp>

#include "econoframe/util.hpp"

namespace econoframe {

namespace {

const std::string kKindNames[] = {"percentage", "currency", "scaled_number",
                                  "plain_number"};

const char* kMonths[] = {
    "january", "february", "march",    "april",   "may",      "june",
    "july",    "august",   "september", "october", "november", "december",
    "jan",     "feb",      "mar",      "apr",     "jun",      "jul",
    "aug",     "sep",      "sept",     "oct",     "nov",      "dec"};

const char* kWeekdays[] = {"monday", "tuesday",  "wednesday", "thursday",
                           "friday", "saturday", "sunday",    "mon",
                           "tue",    "tues",     "wed",       "thu",
                           "thur",   "thurs",    "fri",       "sat",
                           "sun"};

const char* kScaleWords[] = {"thousand", "million", "billion", "trillion"};

bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

bool is_month_or_weekday(std::string word) {
  while (!word.empty() && (word.back() == '.' || word.back() == ','))
    word.pop_back();
  word = to_lower(word);
  for (const char* m : kMonths)
    if (word == m) return true;
  for (const char* w : kWeekdays)
    if (word == w) return true;
  return false;
}

// Word of letters ending just before `pos`, skipping whitespace.
std::string letters_before(const std::string& s, std::size_t pos) {
  std::size_t e = pos;
  while (e > 0 && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  std::size_t b = e;
  while (b > 0) {
    const unsigned char c = static_cast<unsigned char>(s[b - 1]);
    if (std::isalpha(c) || c == '.' || c == ',' || c == '&') {
      --b;
    } else {
      break;
    }
  }
  return s.substr(b, e - b);
}

// "S&P 500", "NASDAQ 100": a bare number after an ampersand token or an
// all-caps acronym names an index, it does not report a value.
bool is_index_name(std::string word) {
  while (!word.empty() && (word.back() == '.' || word.back() == ','))
    word.pop_back();
  if (word.size() < 2) return false;
  bool has_amp = false, all_upper = true;
  for (unsigned char c : word) {
    if (c == '&') {
      has_amp = true;
    } else if (!std::isupper(c)) {
      all_upper = false;
    }
  }
  return has_amp || all_upper;
}

std::string letters_after(const std::string& s, std::size_t pos) {
  std::size_t b = pos;
  while (b < s.size() && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  std::size_t e = b;
  while (e < s.size()) {
    const unsigned char c = static_cast<unsigned char>(s[e]);
    if (std::isalpha(c)) {
      ++e;
    } else {
      break;
    }
  }
  return s.substr(b, e - b);
}

// Matches `word` at s[pos...] case-insensitively with a word boundary after.
bool word_at(const std::string& s, std::size_t pos, const std::string& word) {
  if (pos + word.size() > s.size()) return false;
  for (std::size_t i = 0; i < word.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(s[pos + i])) != word[i])
      return false;
  }
  const std::size_t after = pos + word.size();
  return after >= s.size() ||
         !std::isalnum(static_cast<unsigned char>(s[after]));
}

// Currency symbol ending at `pos` (exclusive); returns its byte length or 0.
std::size_t currency_symbol_before(const std::string& s, std::size_t pos) {
  if (pos >= 1 && s[pos - 1] == '$') return 1;
  if (pos >= 2) {
    const unsigned char a = static_cast<unsigned char>(s[pos - 2]);
    const unsigned char b = static_cast<unsigned char>(s[pos - 1]);
    if (a == 0xC2 && (b == 0xA3 || b == 0xA5)) return 2;  // pound, yen
  }
  if (pos >= 3) {
    const unsigned char a = static_cast<unsigned char>(s[pos - 3]);
    const unsigned char b = static_cast<unsigned char>(s[pos - 2]);
    const unsigned char c = static_cast<unsigned char>(s[pos - 1]);
    if (a == 0xE2 && b == 0x82 && c == 0xAC) return 3;  // euro
  }
  return 0;
}

struct NumericCore {
  std::size_t end = 0;  // one past the last core character
  bool has_comma = false;
  bool has_decimal = false;
  int digit_count = 0;
};

// digits[,ddd]*[.digits]? starting at `begin` (which must be a digit).
NumericCore scan_core(const std::string& s, std::size_t begin) {
  NumericCore core;
  std::size_t i = begin;
  while (i < s.size() && is_digit(s[i])) {
    ++i;
    ++core.digit_count;
  }
  // Comma groups: ",ddd" where the group is not followed by a 4th digit
  // (so "March 5, 2019" does not merge into one number).
  while (i + 3 < s.size() && s[i] == ',' && is_digit(s[i + 1]) &&
         is_digit(s[i + 2]) && is_digit(s[i + 3]) &&
         (i + 4 >= s.size() || !is_digit(s[i + 4]))) {
    i += 4;
    core.digit_count += 3;
    core.has_comma = true;
  }
  if (i + 1 < s.size() && s[i] == '.' && is_digit(s[i + 1])) {
    ++i;
    while (i < s.size() && is_digit(s[i])) ++i;
    core.has_decimal = true;
  }
  core.end = i;
  return core;
}

}  // namespace

const std::string& quantity_kind_name(QuantityKind k) {
  return kKindNames[static_cast<int>(k)];
}

std::string context_window(const Article& article, std::size_t sentence_index) {
  if (article.sentences.empty() || sentence_index >= article.sentences.size())
    throw Error("context_window: sentence index out of range");
  const std::size_t first = sentence_index >= 2 ? sentence_index - 2 : 0;
  const std::size_t last =
      std::min(sentence_index + 2, article.sentences.size() - 1);
  const std::size_t b = article.sentences[first].begin;
  const std::size_t e = article.sentences[last].end;
  return article.body.substr(b, e - b);
}

std::vector<QuantityMention> extract_quantities(const Article& article) {
  const std::string& body = article.body;
  std::vector<QuantityMention> out;
  std::size_t i = 0;
  while (i < body.size()) {
    if (!is_digit(body[i])) {
      ++i;
      continue;
    }
    const std::size_t num_begin = i;
    const NumericCore core = scan_core(body, num_begin);
    i = core.end;  // resume after the core no matter what

    // Ordinal day forms ("5th", "3rd") are date-like.
    if (core.end + 2 <= body.size()) {
      const std::string suffix = to_lower(body.substr(core.end, 2));
      if (!core.has_decimal &&
          (suffix == "st" || suffix == "nd" || suffix == "rd" ||
           suffix == "th") &&
          (core.end + 2 >= body.size() ||
           !std::isalnum(static_cast<unsigned char>(body[core.end + 2])))) {
        continue;
      }
    }
    // Slash dates: 3/5/2019, 03/05.
    const bool slash_before = num_begin >= 2 && body[num_begin - 1] == '/' &&
                              is_digit(body[num_begin - 2]);
    const bool slash_after = core.end + 1 < body.size() &&
                             body[core.end] == '/' && is_digit(body[core.end + 1]);
    if (slash_before || slash_after) continue;

    std::size_t span_begin = num_begin;
    std::size_t span_end = core.end;
    const std::size_t cur_len = currency_symbol_before(body, num_begin);
    const bool has_currency = cur_len > 0;
    if (has_currency) span_begin -= cur_len;

    // Optional scale word after whitespace.
    bool has_scale = false;
    {
      std::size_t j = span_end;
      std::size_t ws = j;
      while (ws < body.size() &&
             (body[ws] == ' ' || body[ws] == '\t'))
        ++ws;
      if (ws > j) {
        for (const char* w : kScaleWords) {
          if (word_at(body, ws, w)) {
            has_scale = true;
            span_end = ws + std::string(w).size();
            break;
          }
        }
      }
    }
    // Optional percent part.
    bool has_percent = false;
    if (span_end < body.size() && body[span_end] == '%') {
      has_percent = true;
      ++span_end;
    } else {
      std::size_t ws = span_end;
      while (ws < body.size() && (body[ws] == ' ' || body[ws] == '\t')) ++ws;
      if (ws > span_end) {
        if (word_at(body, ws, "percentage")) {
          std::size_t k = ws + 10;
          while (k < body.size() && body[k] == ' ') ++k;
          if (word_at(body, k, "points")) {
            has_percent = true;
            span_end = k + 6;
          } else if (word_at(body, k, "point")) {
            has_percent = true;
            span_end = k + 5;
          }
        } else if (word_at(body, ws, "percent")) {
          has_percent = true;
          span_end = ws + 7;
        }
      }
    }

    const bool plain = !has_currency && !has_scale && !has_percent &&
                       !core.has_comma && !core.has_decimal;
    // Standalone 4-digit years.
    if (plain && core.digit_count == 4) {
      const int v = std::stoi(body.substr(num_begin, 4));
      if (v >= 1900 && v <= 2099) continue;
    }
    // Plain numbers next to month or weekday names are dates; bare numbers
    // after an index name are part of the name.
    if (!has_currency && !has_scale && !has_percent) {
      const std::string before = letters_before(body, span_begin);
      if (is_month_or_weekday(before)) continue;
      if (is_index_name(before)) continue;
      if (is_month_or_weekday(letters_after(body, span_end))) continue;
    }

    // Locate the containing sentence; spans outside any sentence (stray
    // text between spans) are dropped.
    std::size_t sent = article.sentences.size();
    for (std::size_t s = 0; s < article.sentences.size(); ++s) {
      if (span_begin >= article.sentences[s].begin &&
          span_end <= article.sentences[s].end) {
        sent = s;
        break;
      }
    }
    if (sent == article.sentences.size()) {
      i = span_end;
      continue;
    }

    QuantityMention m;
    m.article_id = article.id;
    m.begin = span_begin;
    m.end = span_end;
    m.surface = body.substr(span_begin, span_end - span_begin);
    m.sentence_index = sent;
    m.kind_hint = has_percent   ? QuantityKind::percentage
                  : has_currency ? QuantityKind::currency
                  : has_scale    ? QuantityKind::scaled_number
                                 : QuantityKind::plain_number;
    out.push_back(std::move(m));
    i = span_end;
  }

  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k].position_index = static_cast<int>(k);
    out[k].quantity_id = article.id + "#q" + std::to_string(k);
    out[k].context = context_window(article, out[k].sentence_index);
  }
  return out;
}

std::string quantity_to_json(const QuantityMention& q) {
  nlohmann::ordered_json obj;
  obj["quantity_id"] = q.quantity_id;
  obj["article_id"] = q.article_id;
  obj["span_begin"] = q.begin;
  obj["span_end"] = q.end;
  obj["surface"] = q.surface;
  obj["position_index"] = q.position_index;
  obj["kind"] = quantity_kind_name(q.kind_hint);
  obj["context"] = q.context;
  return obj.dump();
}

void save_quantities(const std::string& path,
                     const std::vector<QuantityMention>& mentions) {
  std::ostringstream ss;
  for (const auto& m : mentions) ss << quantity_to_json(m) << "\n";
  write_file(path, ss.str());
}

}  // namespace econoframe
