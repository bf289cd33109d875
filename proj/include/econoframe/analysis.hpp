#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "econoframe/types.hpp"

namespace econoframe {

// One tracked indicator, possibly a composite like "prices+energy_prices".
struct IndicatorSelector {
  std::string name;
  std::set<int> members;  // indices into the indicator label set

  static IndicatorSelector parse(const std::string& selector_text);
};

enum class FramePolarity { positive, negative, neutral };

const std::string& frame_polarity_name(FramePolarity f);

struct IndicatorFrame {
  std::string article_id;
  std::string indicator;  // selector name
  FramePolarity frame = FramePolarity::neutral;
  int n_pos = 0, n_neg = 0, n_neutral = 0;
};

// Twice-as-many rule over the quantities whose predicted indicator falls in
// the selector: fewer than two such quantities is ineligible; positive when
// n_pos >= 2*n_neg, negative when n_neg >= 2*n_pos, neutral otherwise (and
// when both thresholds hold, which requires n_pos == n_neg == 0).
std::optional<IndicatorFrame> assign_indicator_frame(
    const FrameRecord& record, const IndicatorSelector& selector);

struct Quarter {
  int year = 0;
  int q = 0;  // 1-4

  static Quarter from_epoch(std::int64_t epoch_seconds);
  std::string label() const;  // "2020-Q2"
  std::array<int, 3> months() const;

  auto operator<=>(const Quarter&) const = default;
};

struct QuarterAggregate {
  std::string publisher;
  Quarter quarter;
  std::string indicator;
  int n_pos = 0, n_neg = 0, n_neutral = 0;
  double share_pos = 0.0, share_neg = 0.0, share_neutral = 0.0;
  double coverage_share = 0.0;  // eligible / economic articles this quarter
};

struct SeriesPoint {
  std::string period;  // "2020-Q2" or "2020-04"
  std::string publisher;
  std::string measure;
  double value = 0.0;
};

// Per (publisher, quarter): frame counts and proportions. Quarters with no
// eligible article produce no row. `articles` supplies publisher and
// first_seen for each frame's article.
std::vector<QuarterAggregate> aggregate_quarterly(
    const std::vector<IndicatorFrame>& frames,
    const std::vector<Article>& articles);

// Fills coverage_share on rows: eligible articles / economic articles for
// that publisher-quarter. Quarters with zero economic articles keep no row;
// the share is deliberately not clamped so the sum across several tracked
// indicators can exceed 1.
void fill_coverage_share(std::vector<QuarterAggregate>& rows,
                         const std::vector<Article>& economic_articles);

std::vector<SeriesPoint> to_series(const std::vector<QuarterAggregate>& rows);

struct TruthPoint {
  int year = 0;
  int month = 0;  // 1-12
  std::string measure;
  double value = 0.0;
};

// Ground-truth CSV: date (YYYY-MM), measure, value; a header row is
// accepted. Unparseable rows raise an Error with the row number.
std::vector<TruthPoint> load_truth_csv(const std::string& path);

// Tidy CSV: one row per (publisher, quarter, indicator[, truth measure])
// with the quarter's three monthly truth values; missing months are empty.
std::string analysis_to_csv(const std::vector<QuarterAggregate>& rows,
                            const std::vector<TruthPoint>& truth);

}  // namespace econoframe
