#include "econoframe/analysis.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <tuple>

#include "econoframe/util.hpp"

namespace econoframe {

IndicatorSelector IndicatorSelector::parse(const std::string& selector_text) {
  IndicatorSelector sel;
  sel.name = trim(selector_text);
  if (sel.name.empty()) throw Error("empty indicator selector");
  for (const std::string& part : split(sel.name, '+'))
    sel.members.insert(label_index(Task::indicator, trim(part)));
  return sel;
}

namespace {
const std::string kFrameNames[] = {"positive", "negative", "neutral"};
}

const std::string& frame_polarity_name(FramePolarity f) {
  return kFrameNames[static_cast<int>(f)];
}

std::optional<IndicatorFrame> assign_indicator_frame(
    const FrameRecord& record, const IndicatorSelector& selector) {
  IndicatorFrame frame;
  frame.article_id = record.article_id;
  frame.indicator = selector.name;
  for (const auto& q : record.quantities) {
    if (!selector.members.count(label_index(Task::indicator, q.indicator)))
      continue;
    if (q.polarity == "positive")
      ++frame.n_pos;
    else if (q.polarity == "negative")
      ++frame.n_neg;
    else
      ++frame.n_neutral;
  }
  if (frame.n_pos + frame.n_neg + frame.n_neutral < 2) return std::nullopt;

  const bool pos = frame.n_pos >= 2 * frame.n_neg;
  const bool neg = frame.n_neg >= 2 * frame.n_pos;
  if (pos && neg) {
    frame.frame = FramePolarity::neutral;  // only when n_pos == n_neg == 0
  } else if (pos) {
    frame.frame = FramePolarity::positive;
  } else if (neg) {
    frame.frame = FramePolarity::negative;
  } else {
    frame.frame = FramePolarity::neutral;
  }
  return frame;
}

Quarter Quarter::from_epoch(std::int64_t epoch_seconds) {
  std::int64_t days = epoch_seconds / 86400;
  if (epoch_seconds % 86400 < 0) days -= 1;
  const CivilDate cd = civil_from_days(days);
  return Quarter{cd.year, (cd.month - 1) / 3 + 1};
}

std::string Quarter::label() const {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-Q%d", year, q);
  return buf;
}

std::array<int, 3> Quarter::months() const {
  const int first = (q - 1) * 3 + 1;
  return {first, first + 1, first + 2};
}

std::vector<QuarterAggregate> aggregate_quarterly(
    const std::vector<IndicatorFrame>& frames,
    const std::vector<Article>& articles) {
  std::map<std::string, const Article*> by_id;
  for (const auto& a : articles) by_id[a.id] = &a;

  std::map<std::tuple<std::string, Quarter, std::string>, QuarterAggregate>
      cells;
  for (const auto& f : frames) {
    auto it = by_id.find(f.article_id);
    if (it == by_id.end())
      throw Error("aggregate_quarterly: unknown article " + f.article_id);
    const Article& a = *it->second;
    const Quarter quarter = Quarter::from_epoch(a.first_seen);
    auto [cell, inserted] =
        cells.try_emplace({a.publisher, quarter, f.indicator});
    if (inserted) {
      cell->second.publisher = a.publisher;
      cell->second.quarter = quarter;
      cell->second.indicator = f.indicator;
    }
    switch (f.frame) {
      case FramePolarity::positive: ++cell->second.n_pos; break;
      case FramePolarity::negative: ++cell->second.n_neg; break;
      case FramePolarity::neutral: ++cell->second.n_neutral; break;
    }
  }

  std::vector<QuarterAggregate> rows;
  rows.reserve(cells.size());
  for (auto& [key, agg] : cells) {
    const double total = agg.n_pos + agg.n_neg + agg.n_neutral;
    agg.share_pos = agg.n_pos / total;
    agg.share_neg = agg.n_neg / total;
    agg.share_neutral = agg.n_neutral / total;
    rows.push_back(agg);
  }
  return rows;
}

void fill_coverage_share(std::vector<QuarterAggregate>& rows,
                         const std::vector<Article>& economic_articles) {
  std::map<std::pair<std::string, Quarter>, int> totals;
  for (const auto& a : economic_articles)
    ++totals[{a.publisher, Quarter::from_epoch(a.first_seen)}];
  for (auto& row : rows) {
    auto it = totals.find({row.publisher, row.quarter});
    const int total = it == totals.end() ? 0 : it->second;
    const int eligible = row.n_pos + row.n_neg + row.n_neutral;
    row.coverage_share = total > 0 ? static_cast<double>(eligible) / total : 0.0;
  }
}

std::vector<SeriesPoint> to_series(const std::vector<QuarterAggregate>& rows) {
  std::vector<SeriesPoint> out;
  for (const auto& r : rows) {
    const std::string period = r.quarter.label();
    out.push_back({period, r.publisher, r.indicator + "/share_pos", r.share_pos});
    out.push_back({period, r.publisher, r.indicator + "/share_neg", r.share_neg});
    out.push_back(
        {period, r.publisher, r.indicator + "/share_neutral", r.share_neutral});
    out.push_back({period, r.publisher, r.indicator + "/coverage_share",
                   r.coverage_share});
  }
  return out;
}

std::vector<TruthPoint> load_truth_csv(const std::string& path) {
  const std::string content = read_file(path);
  std::vector<TruthPoint> out;
  std::size_t row_no = 0;
  for (const std::string& raw : split(content, '\n')) {
    ++row_no;
    const std::string line = trim(raw);
    if (line.empty()) continue;
    const std::vector<std::string> cols = split(line, ',');
    if (row_no == 1 && !cols.empty() && to_lower(trim(cols[0])) == "date")
      continue;  // header
    if (cols.size() != 3)
      throw Error("truth CSV row " + std::to_string(row_no) +
                  ": expected 3 columns, got " + std::to_string(cols.size()));
    const std::string date = trim(cols[0]);
    if (date.size() != 7 || date[4] != '-' ||
        !std::isdigit(static_cast<unsigned char>(date[0])) ||
        !std::isdigit(static_cast<unsigned char>(date[5])))
      throw Error("truth CSV row " + std::to_string(row_no) +
                  ": bad date \"" + date + "\" (want YYYY-MM)");
    TruthPoint tp;
    tp.year = std::stoi(date.substr(0, 4));
    tp.month = std::stoi(date.substr(5, 2));
    if (tp.month < 1 || tp.month > 12)
      throw Error("truth CSV row " + std::to_string(row_no) +
                  ": bad month in \"" + date + "\"");
    tp.measure = trim(cols[1]);
    try {
      tp.value = std::stod(trim(cols[2]));
    } catch (const std::exception&) {
      throw Error("truth CSV row " + std::to_string(row_no) +
                  ": bad value \"" + cols[2] + "\"");
    }
    out.push_back(std::move(tp));
  }
  return out;
}

std::string analysis_to_csv(const std::vector<QuarterAggregate>& rows,
                            const std::vector<TruthPoint>& truth) {
  std::map<std::pair<int, int>, std::map<std::string, double>> truth_by_month;
  std::set<std::string> measures;
  for (const auto& tp : truth) {
    truth_by_month[{tp.year, tp.month}][tp.measure] = tp.value;
    measures.insert(tp.measure);
  }

  std::ostringstream ss;
  ss << "publisher,quarter,indicator,n_pos,n_neg,n_neutral,share_pos,"
        "share_neg,share_neutral,coverage_share";
  if (!measures.empty()) ss << ",truth_measure,truth_m1,truth_m2,truth_m3";
  ss << "\n";

  for (const auto& r : rows) {
    std::ostringstream base;
    base << r.publisher << "," << r.quarter.label() << "," << r.indicator
         << "," << r.n_pos << "," << r.n_neg << "," << r.n_neutral << ","
         << fmt_double(r.share_pos) << "," << fmt_double(r.share_neg) << ","
         << fmt_double(r.share_neutral) << "," << fmt_double(r.coverage_share);
    if (measures.empty()) {
      ss << base.str() << "\n";
      continue;
    }
    for (const auto& measure : measures) {
      ss << base.str() << "," << measure;
      for (int month : r.quarter.months()) {
        ss << ",";
        auto mit = truth_by_month.find({r.quarter.year, month});
        if (mit != truth_by_month.end()) {
          auto vit = mit->second.find(measure);
          if (vit != mit->second.end()) ss << fmt_double(vit->second);
        }
      }
      ss << "\n";
    }
  }
  return ss.str();
}

}  // namespace econoframe
