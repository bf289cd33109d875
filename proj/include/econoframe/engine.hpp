#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "econoframe/priors.hpp"
#include "econoframe/types.hpp"

namespace econoframe {

// ---------------------------------------------------------------------------
// Lukasiewicz relaxation of the logical connectives over soft truth values.

enum class LukOp { logic_and, logic_or, logic_not, impl_distance };

double luk_and(std::span<const double> args);
double luk_or(std::span<const double> args);
double luk_not(double a);
// Distance to satisfaction of body -> head.
double impl_distance(double body, double head);
// Dispatch form; validates every argument is in [0,1].
double lukasiewicz(LukOp op, std::span<const double> args);

// ---------------------------------------------------------------------------
// Rules and weights.

enum class RuleId { r1, r2, r3, r4, r5, prior };

const std::string& rule_name(RuleId r);

struct RuleMask {
  bool r1 = false, r2 = false, r3 = false, r4 = false, r5 = false;

  bool any_soft() const { return r3 || r4 || r5; }
  bool empty() const { return !(r1 || r2 || r3 || r4 || r5); }
  // Parses a comma list like "r1,r2,r5"; "" and "none" mean no rules.
  static RuleMask parse(const std::string& csv);
  // Ablation row label: "r1+r2+r5", or "priors_only" for the empty mask.
  std::string label() const;
};

enum class WeightSharing { per_label, shared };

// Learnable soft-rule weights. per_label keeps one weight per label
// instantiation (3 for r3, 3 for r4, 36 for r5); shared keeps one per rule.
struct RuleWeights {
  WeightSharing sharing = WeightSharing::per_label;
  std::vector<double> values;
  double prior_weight = 1.0;

  static RuleWeights init(double value, WeightSharing sharing);

  int num_keys() const { return static_cast<int>(values.size()); }
  int key_r3(int polarity) const;
  int key_r4(int polarity) const;
  int key_r5(int t1, int t2) const;
  std::string key_name(int key) const;

  std::string to_json() const;
  static RuleWeights from_json(const std::string& text);
};

void save_rule_weights(const std::string& path, const RuleWeights& w);
RuleWeights load_rule_weights(const std::string& path);

// ---------------------------------------------------------------------------
// Grounded model. All soft rule groundings reduce to two-atom hinges
// max(0, x[pos] - x[neg])^p; hard rules reduce to x[a] + x[b] = rhs; priors
// are squared distances, so the no-rule MAP solution is exactly the prior.

struct AtomGroup {
  std::string entity_id;  // article_id or quantity_id
  Task task = Task::article_type;
  int offset = 0;
  int size = 0;
};

struct EqualityConstraint {
  int a = 0, b = 0;
  double rhs = 1.0;
  RuleId rule = RuleId::r1;
};

struct HingePotential {
  int pos = 0, neg = 0;
  double weight = 1.0;
  int exponent = 1;  // 1 or 2
  RuleId rule = RuleId::r3;
  int weight_key = -1;  // -1: fixed weight, not learnable
};

struct PriorPotential {
  int atom = 0;
  double target = 0.0;
};

struct GroundedMRF {
  std::string article_id;
  std::vector<std::string> quantity_ids;  // document order
  std::vector<AtomGroup> groups;
  std::vector<EqualityConstraint> equalities;
  std::vector<HingePotential> hinges;
  std::vector<PriorPotential> priors;
  double prior_weight = 1.0;
  int num_atoms = 0;

  // Returns the new group's index; atoms get consecutive ids.
  int add_group(const std::string& entity_id, Task task, int size);
  const AtomGroup* find_group(const std::string& entity_id, Task task) const;

  double objective(std::span<const double> x) const;
  // Max violation over equalities, group sums, and the [0,1] box.
  double constraint_residual(std::span<const double> x) const;
  // Refreshes learnable hinge weights and the prior weight.
  void apply_weights(const RuleWeights& w);
  // Per weight-key sums of hinge distances^p at x.
  std::vector<double> rule_feature_totals(std::span<const double> x,
                                          int num_keys) const;
};

struct GroundingConfig {
  int hinge_exponent = 1;
  // Polarity label -> condition / direction label the article should carry.
  std::array<int, 3> polarity_to_condition = {0, 2, 1};  // good, poor, fair
  std::array<int, 3> polarity_to_direction = {0, 2, 1};  // better, worse, same
};

// Instantiates the rule templates for one article and its quantity mentions.
// Priors must cover all six tasks for the article and every quantity.
GroundedMRF ground(const std::string& article_id,
                   const std::vector<std::string>& quantity_ids,
                   const PriorSet& priors, const RuleWeights& weights,
                   const RuleMask& mask, const GroundingConfig& config = {});

// ---------------------------------------------------------------------------
// MAP inference: consensus ADMM with closed-form agent updates (hinge prox,
// hyperplane projection, simplex projection), the squared priors folded into
// the consensus step, and a final Dykstra pass that restores feasibility to
// ~1e-9 before the objective is scored. The returned values are the best
// feasible candidate seen; the trace is its objective at each check, which
// is non-increasing by construction.

struct MapResult {
  std::vector<double> values;
  double objective = 0.0;
  double residual = 0.0;
  int iterations = 0;
  std::vector<double> trace;
};

struct SolveOptions {
  double tol = 1e-6;
  int max_iter = 20000;
};

MapResult map_infer(const GroundedMRF& mrf, const SolveOptions& opts = {});

// Projects x onto the intersection of the group simplexes and the hard
// equalities (Dykstra). Exposed for tests.
void project_feasible(const GroundedMRF& mrf, std::vector<double>& x,
                      double tol = 1e-10, int max_sweeps = 2000);

// Euclidean projection onto the probability simplex.
void project_simplex(std::span<double> v);

// ---------------------------------------------------------------------------
// Discretization. With r1/r2 active the type decision is made first and the
// dependent group's argmax is restricted to the coherent labels, so label-
// level coherence always holds; ties resolve to the first label in set order.

FrameRecord discretize(const GroundedMRF& mrf, std::span<const double> values,
                       const RuleMask& mask);

// ---------------------------------------------------------------------------
// Weight learning: MAP-approximated maximum likelihood in structured
// perceptron form. Each epoch solves MAP for every example with the weights
// fixed at their epoch-start values (safe to parallelize), then applies
//   w_k <- max(0, w_k + step * (Phi_k(y_map) - Phi_k(y_gold)))
// example by example in deterministic order.

struct LearnExample {
  GroundedMRF mrf;
  FrameRecord gold;
};

struct LearnHyperparams {
  double step = 0.05;
  double step_decay = 0.0;  // epoch e uses step / (1 + step_decay * e)
  int epochs = 25;
  std::uint64_t seed = 0;
  int workers = 1;
  SolveOptions solve;
};

struct LearnResult {
  RuleWeights weights;
  std::vector<double> epoch_map_distance;  // total MAP rule distance per epoch
};

// Builds the one-hot assignment for a gold record over the MRF's groups.
std::vector<double> gold_assignment(const GroundedMRF& mrf,
                                    const FrameRecord& gold);

LearnResult learn_weights(std::vector<LearnExample>& train,
                          const RuleWeights& init,
                          const LearnHyperparams& hyper);

}  // namespace econoframe
