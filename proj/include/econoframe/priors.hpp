#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "econoframe/types.hpp"

namespace econoframe {

// Probability vector over one task's label set for one article or quantity.
struct LabelDistribution {
  std::string atom_group_id;  // article_id or quantity_id
  Task task = Task::article_type;
  std::vector<double> probs;
};

// Throws unless probs are nonnegative, sum to 1 within 1e-9, and match the
// task's label-set size.
void validate_distribution(const LabelDistribution& d);

// Sorted sparse feature vector (bucket -> value).
using SparseVec = std::vector<std::pair<std::uint32_t, double>>;

struct BowConfig {
  std::uint32_t dim = 1u << 18;  // power of two
};

// Lowercased token uni+bigrams hashed into `dim` buckets, L2-normalized.
SparseVec featurize(const std::string& text, const BowConfig& config);

struct BowExample {
  SparseVec features;
  int label = 0;
};

struct BowHyperparams {
  double learning_rate = 0.1;
  int epochs = 50;
  double l2 = 1e-4;
  std::uint64_t seed = 0;
  double dev_fraction = 0.0;  // > 0 enables dev-set model selection
};

struct BowModel {
  Task task = Task::article_type;
  std::uint32_t dim = 0;
  int n_labels = 0;
  std::vector<double> weights;  // n_labels x dim, row-major
  std::vector<double> bias;     // n_labels

  double& w(int label, std::uint32_t bucket) {
    return weights[static_cast<std::size_t>(label) * dim + bucket];
  }
  double w(int label, std::uint32_t bucket) const {
    return weights[static_cast<std::size_t>(label) * dim + bucket];
  }
};

struct BowGradient {
  double loss = 0.0;  // mean cross-entropy + (l2/2)*||W||^2
  std::vector<double> weight_grad;
  std::vector<double> bias_grad;
};

// Full objective gradient as used by the trainer; exposed so tests can check
// it against finite differences.
BowGradient bow_loss_gradient(const BowModel& model,
                              const std::vector<BowExample>& examples,
                              double l2);

struct BowTrainResult {
  BowModel model;
  std::vector<double> loss_trace;  // objective after each epoch
};

// Multinomial logistic regression fit by full-batch gradient descent on
// cross-entropy. Deterministic given the seed (the seed only matters when
// dev_fraction > 0, where it picks the dev split).
BowTrainResult train_bow(const std::vector<std::pair<std::string, std::string>>&
                             text_label_examples,
                         Task task, const BowConfig& config,
                         const BowHyperparams& hyper);

std::vector<double> predict_probs(const BowModel& model, const SparseVec& x);
LabelDistribution predict_prior(const BowModel& model, const std::string& text,
                                const BowConfig& config,
                                const std::string& atom_group_id = "");

// Versioned binary model format, little-endian 64-bit floats.
void save_bow_model(const std::string& path, const BowModel& model);
BowModel load_bow_model(const std::string& path);

// Text fed to the classifiers: whole article for article-level tasks,
// context window plus marked surface string for quantity-level tasks.
std::string article_prior_text(const Article& a);
std::string quantity_prior_text(const std::string& context,
                                const std::string& surface);

// Priors for every (entity, task) pair an article's grounding needs.
class PriorSet {
 public:
  void add(LabelDistribution d);
  const std::vector<double>* find(const std::string& entity_id, Task task) const;
  const std::vector<double>& require(const std::string& entity_id,
                                     Task task) const;
  std::size_t size() const { return probs_.size(); }

  std::vector<LabelDistribution> all() const;

 private:
  std::map<std::pair<std::string, int>, std::vector<double>> probs_;
};

// Prior JSONL: {atom_group_id, task, probs:[...]}. Rejects vectors whose sum
// is off by more than 1e-6 or whose length mismatches the task, then
// renormalizes exactly.
std::vector<LabelDistribution> load_prior_file(const std::string& path);
void save_prior_file(const std::string& path,
                     const std::vector<LabelDistribution>& dists);

// Probability 1-eps on the gold label, eps spread uniformly over the rest.
std::vector<double> gold_prior_probs(Task task, const std::string& gold_label,
                                     double eps);

// Gold-injection priors for a whole record set; isolates the relational
// layer from classifier quality in tests.
PriorSet gold_priors(const std::vector<FrameRecord>& gold, double eps);

}  // namespace econoframe
