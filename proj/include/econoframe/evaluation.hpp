#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "econoframe/engine.hpp"
#include "econoframe/priors.hpp"
#include "econoframe/types.hpp"

namespace econoframe {

// ---------------------------------------------------------------------------
// Cross-validation folds

struct Fold {
  std::vector<std::string> test;   // agreed article ids held out
  std::vector<std::string> train;  // agreed article ids trained on
  std::vector<std::string> noisy;  // noisy article ids allowed as augmentation
};

struct FoldPlan {
  int k = 5;
  std::uint64_t seed = 0;
  std::vector<Fold> folds;
};

// Deterministic shuffle + chunking of the agreed set; noisy articles that
// land in a fold's test split are dropped from that fold's augmentation.
FoldPlan make_folds(const std::vector<std::string>& agreed,
                    const std::vector<std::string>& noisy, int k,
                    std::uint64_t seed);

// ---------------------------------------------------------------------------
// Metrics

struct LabelMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  int support = 0;  // gold count
};

struct TaskMetrics {
  Task task = Task::article_type;
  std::vector<LabelMetrics> per_label;
  std::vector<std::vector<int>> confusion;  // gold rows x pred columns
  double macro_f1 = 0.0;
  double weighted_f1 = 0.0;
  double accuracy = 0.0;
  int total = 0;
};

// Per-label precision/recall/F1 with the 0-when-undefined convention;
// macro F1 averages over the whole label set, weighted F1 weights by
// gold support.
TaskMetrics f1_scores(const std::vector<int>& gold, const std::vector<int>& pred,
                      Task task);
TaskMetrics f1_scores_labels(const std::vector<std::string>& gold,
                             const std::vector<std::string>& pred, Task task);

// Krippendorff's alpha for nominal data from per-item label lists (items
// with fewer than two annotations are ignored; fewer than two usable items,
// or no label variation, is an error).
double krippendorff_alpha(const std::vector<std::vector<int>>& items);
double krippendorff_alpha_labels(
    const std::vector<std::vector<std::string>>& items, Task task);

// ---------------------------------------------------------------------------
// Evaluation harness

struct EvalArticle {
  std::string article_id;
  std::string publisher;
  std::vector<std::string> quantity_ids;  // document order
  FrameRecord gold;
};

enum class NoisyMode { all_annotations, first_annotation };

struct GoldAssembly {
  std::vector<EvalArticle> agreed;  // cross-annotated, unanimous
  std::vector<EvalArticle> noisy;  // everything else, per NoisyMode
};

// Splits annotations into the agreed set (two or more annotators, identical
// labels) and the noisy remainder.
GoldAssembly assemble_gold(
    const std::vector<AnnotationSet>& annotations,
    const std::map<std::string, std::string>& publisher_by_article,
    NoisyMode mode);

struct PredictionOutcome {
  EvalArticle article;
  FrameRecord pred;
};

struct HarnessConfig {
  GroundingConfig grounding;
  WeightSharing sharing = WeightSharing::per_label;
  double init_weight = 1.0;
  LearnHyperparams learn;
  SolveOptions solve;
  int workers = 1;
};

// Trains rule weights on the given training articles (no-op for masks with
// no soft rules) and returns predictions for the test articles.
struct FoldRun {
  RuleWeights weights;
  std::vector<PredictionOutcome> outcomes;
};
FoldRun run_fold(const std::vector<EvalArticle>& train,
                 const std::vector<EvalArticle>& test, const PriorSet& priors,
                 const RuleMask& mask, const HarnessConfig& config);

struct AblationRow {
  std::string mask_label;
  std::array<double, kNumTasks> avg_macro_f1{};
  std::array<double, kNumTasks> avg_weighted_f1{};
};

// One row per mask: per-task macro/weighted F1 averaged over folds.
std::vector<AblationRow> run_ablation(const std::vector<EvalArticle>& agreed,
                                      const std::vector<EvalArticle>& noisy,
                                      const PriorSet& priors,
                                      const FoldPlan& plan,
                                      const std::vector<RuleMask>& masks,
                                      const HarnessConfig& config);

// (gold, pred) label-index pairs pooled from outcomes, optionally filtered
// by publisher.
void collect_pairs(const std::vector<PredictionOutcome>& outcomes, Task task,
                   const std::string* publisher, std::vector<int>& gold,
                   std::vector<int>& pred);

std::map<std::string, std::array<double, kNumTasks>> per_publisher_macro_f1(
    const std::vector<PredictionOutcome>& outcomes);

// ---------------------------------------------------------------------------
// Report formatting

std::string metrics_to_csv(const TaskMetrics& m);
std::string confusion_to_csv(const TaskMetrics& m);
std::string ablation_to_csv(const std::vector<AblationRow>& rows);
std::string metrics_to_json(const std::vector<TaskMetrics>& all);

}  // namespace econoframe
