#pragma once

#include <string>
#include <vector>

#include "econoframe/types.hpp"

namespace econoframe {

enum class QuantityKind { percentage, currency, scaled_number, plain_number };

const std::string& quantity_kind_name(QuantityKind k);

struct QuantityMention {
  std::string quantity_id;  // "<article_id>#q<position_index>"
  std::string article_id;
  std::size_t begin = 0;  // character span into body, [begin, end)
  std::size_t end = 0;
  std::string surface;
  int position_index = 0;  // 0-based document order
  std::size_t sentence_index = 0;
  std::string context;  // containing sentence plus two on each side
  QuantityKind kind_hint = QuantityKind::plain_number;
};

// Scans the body for numeric quantity mentions:
//   [currency symbol]? digits[,ddd]*[.digits]? [scale word]? [percent part]?
// with scale word in {thousand, million, billion, trillion}. Date-like spans
// are excluded: standalone 4-digit integers in [1900,2099], numbers adjacent
// to month/weekday names, D/M/Y slash patterns, and ordinal day forms.
std::vector<QuantityMention> extract_quantities(const Article& article);

// Contiguous body slice spanning the containing sentence and up to two
// sentences on each side, clipped at document boundaries.
std::string context_window(const Article& article, std::size_t sentence_index);

std::string quantity_to_json(const QuantityMention& q);
void save_quantities(const std::string& path,
                     const std::vector<QuantityMention>& mentions);

}  // namespace econoframe
