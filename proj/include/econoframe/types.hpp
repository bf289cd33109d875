#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace econoframe {

// The six categorical decisions made per article / per quantity.
enum class Task {
  article_type,
  econ_conditions,
  econ_direction,
  quantity_type,
  indicator,
  polarity,
};

inline constexpr int kNumTasks = 6;
inline constexpr Task kAllTasks[kNumTasks] = {
    Task::article_type, Task::econ_conditions, Task::econ_direction,
    Task::quantity_type, Task::indicator,      Task::polarity,
};

inline constexpr bool is_article_task(Task t) {
  return t == Task::article_type || t == Task::econ_conditions ||
         t == Task::econ_direction;
}

const std::string& task_name(Task t);
Task task_from_name(const std::string& name);

// Fixed label sets. Order matters: argmax ties resolve to the first label,
// and confusion matrices / weight tables index by position.
const std::vector<std::string>& label_set(Task t);
int label_count(Task t);

// Index of `label` in the task's set; throws Error naming the label and the
// allowed set when unknown.
int label_index(Task t, const std::string& label);

// Well-known label positions used by the engine's rules.
int macro_index(Task t);        // "macro" in article_type / quantity_type
int none_indicator_index();     // "none" in the indicator set
int irrelevant_index(Task t);   // "irrelevant" in econ_conditions / econ_direction

struct SentenceSpan {
  std::size_t begin = 0;  // byte offsets into body, [begin, end)
  std::size_t end = 0;
};

struct Article {
  std::string id;
  std::string publisher;
  std::string url;
  std::int64_t first_seen = 0;  // UTC epoch seconds
  std::optional<int> rank;      // 1-10 when present
  std::string headline;
  std::string body;
  std::vector<SentenceSpan> sentences;

  std::string sentence_text(std::size_t i) const {
    return body.substr(sentences[i].begin, sentences[i].end - sentences[i].begin);
  }
};

struct QuantityAnnotation {
  std::string quantity_id;
  std::string qtype;      // QTypeSet label
  std::string indicator;  // IndicatorSet label
  std::string polarity;   // PolaritySet label
};

struct AnnotationSet {
  std::string article_id;
  std::string annotator_id;
  std::string article_type;
  std::string econ_conditions;
  std::string econ_direction;
  std::vector<QuantityAnnotation> quantities;
};

struct QuantityLabels {
  std::string quantity_id;
  std::string qtype;
  std::string indicator;
  std::string polarity;
};

// Per-article label assignment: gold when built from annotations, predicted
// when built by the engine.
struct FrameRecord {
  std::string article_id;
  std::string article_type;
  std::string econ_conditions;
  std::string econ_direction;
  std::vector<QuantityLabels> quantities;

  const QuantityLabels* find_quantity(const std::string& qid) const {
    for (const auto& q : quantities)
      if (q.quantity_id == qid) return &q;
    return nullptr;
  }
};

}  // namespace econoframe
