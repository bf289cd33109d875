#include "econoframe/corpus.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "econoframe/util.hpp"

namespace econoframe {

namespace {

using json = nlohmann::json;

// Tokens that end with '.' but do not end a sentence. Compared
// case-insensitively against the word preceding the split candidate,
// including any internal periods ("U.S.").
const char* kAbbreviations[] = {
    "u.s.", "u.k.", "mr.",  "mrs.", "ms.",  "dr.",   "inc.", "corp.",
    "co.",  "vs.",  "jan.", "feb.", "mar.", "apr.",  "jun.", "jul.",
    "aug.", "sep.", "sept.", "oct.", "nov.", "dec.", "no.",  "st.",
};

bool is_abbreviation(const std::string& word) {
  const std::string w = to_lower(word);
  for (const char* a : kAbbreviations)
    if (w == a) return true;
  // Single capital initials like "J." also never end a sentence here.
  if (w.size() == 2 && std::isalpha(static_cast<unsigned char>(w[0]))) return true;
  return false;
}

// The word (maximal run of non-space characters) ending at position `end`
// inclusive.
std::string word_ending_at(const std::string& body, std::size_t end) {
  std::size_t begin = end;
  while (begin > 0 && !std::isspace(static_cast<unsigned char>(body[begin - 1])))
    --begin;
  return body.substr(begin, end - begin + 1);
}

}  // namespace

std::vector<SentenceSpan> segment_sentences(const std::string& body) {
  std::vector<SentenceSpan> spans;
  const std::size_t n = body.size();
  std::size_t start = 0;

  // Skip leading whitespace.
  while (start < n && std::isspace(static_cast<unsigned char>(body[start])))
    ++start;

  for (std::size_t i = start; i < n; ++i) {
    const char c = body[i];
    if (c != '.' && c != '?' && c != '!') continue;

    // Allow closing quotes/brackets between the punctuation and the space.
    std::size_t j = i + 1;
    while (j < n && (body[j] == '"' || body[j] == '\'' || body[j] == ')'))
      ++j;
    if (j >= n) continue;  // trailing sentence handled after the loop
    if (!std::isspace(static_cast<unsigned char>(body[j]))) continue;

    std::size_t k = j;
    while (k < n && std::isspace(static_cast<unsigned char>(body[k]))) ++k;
    if (k >= n) {
      // Punctuation at end of text; close the sentence here.
      spans.push_back({start, j});
      start = n;
      break;
    }
    const unsigned char next = static_cast<unsigned char>(body[k]);
    if (!std::isupper(next) && !std::isdigit(next)) continue;

    if (c == '.' && is_abbreviation(word_ending_at(body, i))) continue;

    spans.push_back({start, j});
    start = k;
  }

  if (start < n) {
    std::size_t end = n;
    while (end > start && std::isspace(static_cast<unsigned char>(body[end - 1])))
      --end;
    if (end > start) spans.push_back({start, end});
  }
  return spans;
}

namespace {

std::string require_string(const json& obj, const char* field,
                           std::size_t line_no) {
  if (!obj.contains(field))
    throw Error("missing field: " + std::string(field) + " (line " +
                std::to_string(line_no) + ")");
  if (!obj[field].is_string())
    throw Error("field " + std::string(field) + " must be a string (line " +
                std::to_string(line_no) + ")");
  return obj[field].get<std::string>();
}

}  // namespace

Article parse_article_json(const std::string& line, std::size_t line_no) {
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::exception& e) {
    throw Error("malformed JSON at line " + std::to_string(line_no) + ": " +
                e.what());
  }
  if (!obj.is_object())
    throw Error("line " + std::to_string(line_no) + " is not a JSON object");

  Article a;
  a.id = require_string(obj, "id", line_no);
  a.publisher = require_string(obj, "publisher", line_no);
  a.url = require_string(obj, "url", line_no);
  a.first_seen = parse_iso8601(require_string(obj, "first_seen", line_no));
  a.headline = require_string(obj, "headline", line_no);
  a.body = require_string(obj, "body", line_no);
  if (obj.contains("rank") && !obj["rank"].is_null()) {
    if (!obj["rank"].is_number_integer())
      throw Error("field rank must be an integer (line " +
                  std::to_string(line_no) + ")");
    const int r = obj["rank"].get<int>();
    if (r < 1 || r > 10)
      throw Error("rank out of range [1,10]: " + std::to_string(r) +
                  " (line " + std::to_string(line_no) + ")");
    a.rank = r;
  }
  a.sentences = segment_sentences(a.body);
  return a;
}

std::vector<Article> load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open corpus file: " + path);
  std::vector<Article> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    out.push_back(parse_article_json(line, line_no));
  }
  return out;
}

std::vector<Article> dedupe(const std::vector<Article>& articles) {
  // Pick, per url, the index of the earliest first_seen (first occurrence
  // wins ties), then keep survivors in input order.
  std::unordered_map<std::string, std::size_t> best;
  for (std::size_t i = 0; i < articles.size(); ++i) {
    auto it = best.find(articles[i].url);
    if (it == best.end()) {
      best.emplace(articles[i].url, i);
    } else if (articles[i].first_seen < articles[it->second].first_seen) {
      it->second = i;
    }
  }
  std::vector<Article> out;
  out.reserve(best.size());
  for (std::size_t i = 0; i < articles.size(); ++i) {
    if (best.at(articles[i].url) == i) out.push_back(articles[i]);
  }
  return out;
}

std::vector<AnnotationSet> load_annotations(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open annotation file: " + path);
  std::vector<AnnotationSet> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::exception& e) {
      throw Error("malformed JSON at line " + std::to_string(line_no) + ": " +
                  e.what());
    }
    AnnotationSet ann;
    ann.article_id = require_string(obj, "article_id", line_no);
    ann.annotator_id = require_string(obj, "annotator_id", line_no);
    ann.article_type = require_string(obj, "article_type", line_no);
    ann.econ_conditions = require_string(obj, "econ_conditions", line_no);
    ann.econ_direction = require_string(obj, "econ_direction", line_no);
    label_index(Task::article_type, ann.article_type);
    label_index(Task::econ_conditions, ann.econ_conditions);
    label_index(Task::econ_direction, ann.econ_direction);
    if (obj.contains("quantities")) {
      if (!obj["quantities"].is_array())
        throw Error("field quantities must be an array (line " +
                    std::to_string(line_no) + ")");
      for (const auto& q : obj["quantities"]) {
        QuantityAnnotation qa;
        qa.quantity_id = require_string(q, "quantity_id", line_no);
        qa.qtype = require_string(q, "qtype", line_no);
        qa.indicator = require_string(q, "indicator", line_no);
        qa.polarity = require_string(q, "polarity", line_no);
        label_index(Task::quantity_type, qa.qtype);
        label_index(Task::indicator, qa.indicator);
        label_index(Task::polarity, qa.polarity);
        ann.quantities.push_back(std::move(qa));
      }
    }
    out.push_back(std::move(ann));
  }
  return out;
}

std::string article_to_json(const Article& a) {
  nlohmann::ordered_json obj;
  obj["id"] = a.id;
  obj["publisher"] = a.publisher;
  obj["url"] = a.url;
  obj["first_seen"] = format_iso8601(a.first_seen);
  if (a.rank) obj["rank"] = *a.rank;
  obj["headline"] = a.headline;
  obj["body"] = a.body;
  return obj.dump();
}

void save_corpus(const std::string& path, const std::vector<Article>& articles) {
  std::ostringstream ss;
  for (const auto& a : articles) ss << article_to_json(a) << "\n";
  write_file(path, ss.str());
}

}  // namespace econoframe
