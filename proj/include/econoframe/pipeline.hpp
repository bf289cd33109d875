#pragma once

#include <functional>
#include <string>
#include <vector>

#include "econoframe/engine.hpp"
#include "econoframe/priors.hpp"
#include "econoframe/quantities.hpp"
#include "econoframe/relevance.hpp"
#include "econoframe/types.hpp"

namespace econoframe {

// Per-article stages are pure, so batches parallelize by index: each worker
// writes only its own output slot and results are identical to the serial
// reference for any worker count. workers <= 1 runs the serial loop.

int default_workers();

void run_indexed_serial(std::size_t n, const std::function<void(std::size_t)>& fn);
void run_indexed_parallel(std::size_t n, int workers,
                          const std::function<void(std::size_t)>& fn);
void run_indexed(std::size_t n, int workers,
                 const std::function<void(std::size_t)>& fn);

// Relevance decisions for each article, in order.
std::vector<char> filter_flags(const std::vector<Article>& articles,
                               const Lexicon& lexicon, int workers);
std::vector<Article> filter_economic(const std::vector<Article>& articles,
                                     const Lexicon& lexicon, int workers);

// Quantity mentions per article, in article order.
std::vector<std::vector<QuantityMention>> extract_batch(
    const std::vector<Article>& articles, int workers);

struct InferOptions {
  RuleMask mask;
  GroundingConfig grounding;
  SolveOptions solve;
  int workers = 1;
};

struct GroupAssignment {
  std::string entity_id;
  Task task = Task::article_type;
  std::vector<double> values;  // soft truth values, label-set order
  std::string argmax;
};

struct ArticleInference {
  FrameRecord record;
  std::vector<GroupAssignment> assignments;
  double objective = 0.0;
  double residual = 0.0;
  int iterations = 0;
};

// Ground + MAP + discretize per article. Quantity ids come from the mention
// lists; errors carry the article id.
std::vector<ArticleInference> infer_batch(
    const std::vector<Article>& articles,
    const std::vector<std::vector<QuantityMention>>& mentions,
    const PriorSet& priors, const RuleWeights& weights,
    const InferOptions& options);

// Prior distributions from bag-of-words models for every article and
// mention, batched over articles.
PriorSet model_priors(const std::vector<Article>& articles,
                      const std::vector<std::vector<QuantityMention>>& mentions,
                      const std::vector<BowModel>& models,
                      const BowConfig& config, int workers);

std::string frame_record_to_json(const ArticleInference& inf);

// One line per atom group: entity, task, soft values, argmax label.
std::string assignments_to_jsonl(const ArticleInference& inf);

}  // namespace econoframe
