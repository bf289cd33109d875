#include "econoframe/types.hpp"

#include "econoframe/util.hpp"

namespace econoframe {

namespace {

const std::vector<std::string> kArticleType = {"macro",      "firm",
                                               "industry",   "government",
                                               "personal",   "other"};
const std::vector<std::string> kCond = {"good", "fair", "poor", "irrelevant"};
const std::vector<std::string> kDir = {"better", "same", "worse", "irrelevant"};
const std::vector<std::string> kQType = {"macro",      "firm",     "industry",
                                         "government", "personal", "none"};
const std::vector<std::string> kIndicator = {
    "jobs",          "retail_sales", "interest_rates", "prices",
    "energy_prices", "wages",        "macro_economy",  "market_numbers",
    "currency",      "housing",      "other",          "none"};
const std::vector<std::string> kPolarity = {"positive", "negative", "neutral"};

const std::string kTaskNames[kNumTasks] = {
    "article_type", "econ_conditions", "econ_direction",
    "quantity_type", "indicator",      "polarity"};

std::string joined(const std::vector<std::string>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ", ";
    out += xs[i];
  }
  return out;
}

}  // namespace

const std::string& task_name(Task t) { return kTaskNames[static_cast<int>(t)]; }

Task task_from_name(const std::string& name) {
  for (int i = 0; i < kNumTasks; ++i)
    if (kTaskNames[i] == name) return static_cast<Task>(i);
  throw Error("unknown task: " + name);
}

const std::vector<std::string>& label_set(Task t) {
  switch (t) {
    case Task::article_type: return kArticleType;
    case Task::econ_conditions: return kCond;
    case Task::econ_direction: return kDir;
    case Task::quantity_type: return kQType;
    case Task::indicator: return kIndicator;
    case Task::polarity: return kPolarity;
  }
  throw Error("bad task");
}

int label_count(Task t) { return static_cast<int>(label_set(t).size()); }

int label_index(Task t, const std::string& label) {
  const auto& set = label_set(t);
  for (std::size_t i = 0; i < set.size(); ++i)
    if (set[i] == label) return static_cast<int>(i);
  throw Error("unknown label \"" + label + "\" for " + task_name(t) +
              " (allowed: " + joined(set) + ")");
}

int macro_index(Task t) {
  if (t != Task::article_type && t != Task::quantity_type)
    throw Error("macro_index: not a type task");
  return 0;  // "macro" is first in both sets
}

int none_indicator_index() {
  return static_cast<int>(kIndicator.size()) - 1;  // "none" is last
}

int irrelevant_index(Task t) {
  if (t != Task::econ_conditions && t != Task::econ_direction)
    throw Error("irrelevant_index: not a conditions/direction task");
  return 3;  // "irrelevant" is last in both four-label sets
}

}  // namespace econoframe
