#pragma once

#include <string>
#include <vector>

#include "econoframe/types.hpp"

namespace econoframe {

// Rule-based sentence segmentation: split after sentence-final punctuation
// followed by whitespace and an uppercase/digit start, with a fixed
// abbreviation list ("U.S.", "Mr.", month abbreviations, ...). Spans cover
// sentence text including the final punctuation; inter-sentence whitespace
// is not covered.
std::vector<SentenceSpan> segment_sentences(const std::string& body);

// Loads a JSONL corpus. Required fields: id, publisher, url, first_seen,
// headline, body; rank is optional. Articles come back in file order,
// sentence-segmented. Malformed lines and missing fields produce an Error
// carrying the 1-based line number.
std::vector<Article> load_corpus(const std::string& path);

// Parses one corpus JSON object (one JSONL line).
Article parse_article_json(const std::string& line, std::size_t line_no);

// Keeps, per url, only the article with the earliest first_seen (first in
// file order on ties); relative order of survivors is preserved.
std::vector<Article> dedupe(const std::vector<Article>& articles);

// Loads annotation JSONL: article_id, annotator_id, article_type,
// econ_conditions, econ_direction, quantities:[{quantity_id, qtype,
// indicator, polarity}]. Labels are validated against their sets.
std::vector<AnnotationSet> load_annotations(const std::string& path);

std::string article_to_json(const Article& a);
void save_corpus(const std::string& path, const std::vector<Article>& articles);

}  // namespace econoframe
