#include "econoframe/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "econoframe/util.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace econoframe {

// ---------------------------------------------------------------------------
// Lukasiewicz ops

namespace {

void check_truth(double a) {
  if (!(a >= 0.0 && a <= 1.0))
    throw Error("truth value outside [0,1]: " + std::to_string(a));
}

}  // namespace

double luk_and(std::span<const double> args) {
  double sum = 0.0;
  for (double a : args) {
    check_truth(a);
    sum += a;
  }
  return std::max(0.0, sum - (static_cast<double>(args.size()) - 1.0));
}

double luk_or(std::span<const double> args) {
  double sum = 0.0;
  for (double a : args) {
    check_truth(a);
    sum += a;
  }
  return std::min(1.0, sum);
}

double luk_not(double a) {
  check_truth(a);
  return 1.0 - a;
}

double impl_distance(double body, double head) {
  check_truth(body);
  check_truth(head);
  return std::max(0.0, body - head);
}

double lukasiewicz(LukOp op, std::span<const double> args) {
  switch (op) {
    case LukOp::logic_and:
      return luk_and(args);
    case LukOp::logic_or:
      return luk_or(args);
    case LukOp::logic_not:
      if (args.size() != 1) throw Error("not takes one argument");
      return luk_not(args[0]);
    case LukOp::impl_distance:
      if (args.size() != 2) throw Error("impl_distance takes two arguments");
      return impl_distance(args[0], args[1]);
  }
  throw Error("bad LukOp");
}

// ---------------------------------------------------------------------------
// Rules and weights

namespace {
const std::string kRuleNames[] = {"r1", "r2", "r3", "r4", "r5", "prior"};
}

const std::string& rule_name(RuleId r) {
  return kRuleNames[static_cast<int>(r)];
}

RuleMask RuleMask::parse(const std::string& csv) {
  RuleMask m;
  const std::string t = trim(to_lower(csv));
  if (t.empty() || t == "none" || t == "priors_only") return m;
  for (const std::string& part : split(t, ',')) {
    const std::string p = trim(part);
    if (p == "r1")
      m.r1 = true;
    else if (p == "r2")
      m.r2 = true;
    else if (p == "r3")
      m.r3 = true;
    else if (p == "r4")
      m.r4 = true;
    else if (p == "r5")
      m.r5 = true;
    else if (!p.empty())
      throw Error("unknown rule in mask: " + p);
  }
  return m;
}

std::string RuleMask::label() const {
  std::string out;
  const bool flags[5] = {r1, r2, r3, r4, r5};
  for (int i = 0; i < 5; ++i) {
    if (!flags[i]) continue;
    if (!out.empty()) out += "+";
    out += kRuleNames[i];
  }
  return out.empty() ? "priors_only" : out;
}

namespace {
constexpr int kNumPolarity = 3;
constexpr int kNumQType = 6;
}  // namespace

RuleWeights RuleWeights::init(double value, WeightSharing sharing) {
  RuleWeights w;
  w.sharing = sharing;
  const int n = sharing == WeightSharing::per_label
                    ? kNumPolarity + kNumPolarity + kNumQType * kNumQType
                    : 3;
  w.values.assign(n, value);
  return w;
}

int RuleWeights::key_r3(int polarity) const {
  return sharing == WeightSharing::per_label ? polarity : 0;
}

int RuleWeights::key_r4(int polarity) const {
  return sharing == WeightSharing::per_label ? kNumPolarity + polarity : 1;
}

int RuleWeights::key_r5(int t1, int t2) const {
  return sharing == WeightSharing::per_label
             ? 2 * kNumPolarity + t1 * kNumQType + t2
             : 2;
}

std::string RuleWeights::key_name(int key) const {
  if (sharing == WeightSharing::shared) {
    static const char* names[] = {"r3", "r4", "r5"};
    return names[key];
  }
  const auto& pol = label_set(Task::polarity);
  const auto& qt = label_set(Task::quantity_type);
  if (key < kNumPolarity) return "r3[" + pol[key] + "]";
  if (key < 2 * kNumPolarity) return "r4[" + pol[key - kNumPolarity] + "]";
  const int r5 = key - 2 * kNumPolarity;
  return "r5[" + qt[r5 / kNumQType] + "," + qt[r5 % kNumQType] + "]";
}

std::string RuleWeights::to_json() const {
  nlohmann::ordered_json obj;
  obj["sharing"] =
      sharing == WeightSharing::per_label ? "per_label" : "shared";
  obj["prior"] = prior_weight;
  nlohmann::ordered_json rules;
  for (int k = 0; k < num_keys(); ++k) rules[key_name(k)] = values[k];
  obj["rules"] = rules;
  return obj.dump(2) + "\n";
}

RuleWeights RuleWeights::from_json(const std::string& text) {
  nlohmann::json obj;
  try {
    obj = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed weights JSON: ") + e.what());
  }
  const std::string sharing = obj.value("sharing", "per_label");
  RuleWeights w = RuleWeights::init(
      0.0, sharing == "shared" ? WeightSharing::shared
                               : WeightSharing::per_label);
  w.prior_weight = obj.value("prior", 1.0);
  if (!obj.contains("rules")) throw Error("weights JSON missing \"rules\"");
  for (int k = 0; k < w.num_keys(); ++k) {
    const std::string name = w.key_name(k);
    if (obj["rules"].contains(name)) {
      w.values[k] = obj["rules"][name].get<double>();
      if (w.values[k] < 0.0) throw Error("negative weight for " + name);
    }
  }
  return w;
}

void save_rule_weights(const std::string& path, const RuleWeights& w) {
  write_file(path, w.to_json());
}

RuleWeights load_rule_weights(const std::string& path) {
  return RuleWeights::from_json(read_file(path));
}

// ---------------------------------------------------------------------------
// GroundedMRF

int GroundedMRF::add_group(const std::string& entity_id, Task task, int size) {
  AtomGroup g;
  g.entity_id = entity_id;
  g.task = task;
  g.offset = num_atoms;
  g.size = size;
  num_atoms += size;
  groups.push_back(std::move(g));
  return static_cast<int>(groups.size()) - 1;
}

const AtomGroup* GroundedMRF::find_group(const std::string& entity_id,
                                         Task task) const {
  for (const auto& g : groups)
    if (g.task == task && g.entity_id == entity_id) return &g;
  return nullptr;
}

double GroundedMRF::objective(std::span<const double> x) const {
  double obj = 0.0;
  for (const auto& h : hinges) {
    const double d = std::max(0.0, x[h.pos] - x[h.neg]);
    obj += h.weight * (h.exponent == 2 ? d * d : d);
  }
  for (const auto& p : priors) {
    const double d = x[p.atom] - p.target;
    obj += prior_weight * d * d;
  }
  return obj;
}

double GroundedMRF::constraint_residual(std::span<const double> x) const {
  double r = 0.0;
  for (const auto& e : equalities)
    r = std::max(r, std::abs(x[e.a] + x[e.b] - e.rhs));
  for (const auto& g : groups) {
    double sum = 0.0;
    for (int i = 0; i < g.size; ++i) {
      const double v = x[g.offset + i];
      sum += v;
      r = std::max(r, std::max(0.0 - v, v - 1.0));
    }
    r = std::max(r, std::abs(sum - 1.0));
  }
  return r;
}

void GroundedMRF::apply_weights(const RuleWeights& w) {
  prior_weight = w.prior_weight;
  for (auto& h : hinges) {
    if (h.weight_key >= 0) {
      if (h.weight_key >= w.num_keys())
        throw Error("weight key out of range (sharing mode mismatch?)");
      h.weight = w.values[h.weight_key];
    }
  }
}

std::vector<double> GroundedMRF::rule_feature_totals(std::span<const double> x,
                                                     int num_keys) const {
  std::vector<double> phi(num_keys, 0.0);
  for (const auto& h : hinges) {
    if (h.weight_key < 0) continue;
    if (h.weight_key >= num_keys)
      throw Error("weight key out of range in rule_feature_totals");
    const double d = std::max(0.0, x[h.pos] - x[h.neg]);
    phi[h.weight_key] += h.exponent == 2 ? d * d : d;
  }
  return phi;
}

// ---------------------------------------------------------------------------
// Grounding

GroundedMRF ground(const std::string& article_id,
                   const std::vector<std::string>& quantity_ids,
                   const PriorSet& priors, const RuleWeights& weights,
                   const RuleMask& mask, const GroundingConfig& config) {
  GroundedMRF mrf;
  mrf.article_id = article_id;
  mrf.quantity_ids = quantity_ids;
  mrf.prior_weight = weights.prior_weight;

  auto add_with_prior = [&](const std::string& ent, Task t) {
    const int gi = mrf.add_group(ent, t, label_count(t));
    const std::vector<double>& p = priors.require(ent, t);
    if (static_cast<int>(p.size()) != mrf.groups[gi].size)
      throw Error("prior size mismatch for " + ent + "/" + task_name(t));
    for (int l = 0; l < mrf.groups[gi].size; ++l)
      mrf.priors.push_back({mrf.groups[gi].offset + l, p[l]});
    return gi;
  };

  const int g_art = add_with_prior(article_id, Task::article_type);
  const int g_cond = add_with_prior(article_id, Task::econ_conditions);
  const int g_dir = add_with_prior(article_id, Task::econ_direction);
  std::vector<int> g_qt, g_ind, g_pol;
  for (const auto& qid : quantity_ids) {
    g_qt.push_back(add_with_prior(qid, Task::quantity_type));
    g_ind.push_back(add_with_prior(qid, Task::indicator));
    g_pol.push_back(add_with_prior(qid, Task::polarity));
  }

  const int art_macro = mrf.groups[g_art].offset + macro_index(Task::article_type);
  if (mask.r2) {
    mrf.equalities.push_back({mrf.groups[g_cond].offset +
                                  irrelevant_index(Task::econ_conditions),
                              art_macro, 1.0, RuleId::r2});
    mrf.equalities.push_back({mrf.groups[g_dir].offset +
                                  irrelevant_index(Task::econ_direction),
                              art_macro, 1.0, RuleId::r2});
  }
  for (std::size_t q = 0; q < quantity_ids.size(); ++q) {
    if (mask.r1) {
      mrf.equalities.push_back(
          {mrf.groups[g_qt[q]].offset + macro_index(Task::quantity_type),
           mrf.groups[g_ind[q]].offset + none_indicator_index(), 1.0,
           RuleId::r1});
    }
    if (mask.r3) {
      for (int p = 0; p < kNumPolarity; ++p) {
        const int key = weights.key_r3(p);
        mrf.hinges.push_back({mrf.groups[g_pol[q]].offset + p,
                              mrf.groups[g_cond].offset +
                                  config.polarity_to_condition[p],
                              weights.values[key], config.hinge_exponent,
                              RuleId::r3, key});
      }
    }
    if (mask.r4) {
      for (int p = 0; p < kNumPolarity; ++p) {
        const int key = weights.key_r4(p);
        mrf.hinges.push_back({mrf.groups[g_pol[q]].offset + p,
                              mrf.groups[g_dir].offset +
                                  config.polarity_to_direction[p],
                              weights.values[key], config.hinge_exponent,
                              RuleId::r4, key});
      }
    }
    if (mask.r5 && q + 1 < quantity_ids.size()) {
      for (int t1 = 0; t1 < kNumQType; ++t1) {
        for (int t2 = 0; t2 < kNumQType; ++t2) {
          const int key = weights.key_r5(t1, t2);
          mrf.hinges.push_back({mrf.groups[g_qt[q]].offset + t1,
                                mrf.groups[g_qt[q + 1]].offset + t2,
                                weights.values[key], config.hinge_exponent,
                                RuleId::r5, key});
        }
      }
    }
  }

  // Hard rules must be mutually consistent: a feasibility projection from
  // the prior point has to succeed.
  if (!mrf.equalities.empty()) {
    std::vector<double> probe(mrf.num_atoms, 0.0);
    for (const auto& p : mrf.priors) probe[p.atom] = p.target;
    project_feasible(mrf, probe);
    if (mrf.constraint_residual(probe) > 1e-7)
      throw Error("inconsistent hard constraints for article " + article_id);
  }
  return mrf;
}

// ---------------------------------------------------------------------------
// Projections

void project_simplex(std::span<double> v) {
  const std::size_t n = v.size();
  if (n == 0) return;
  std::vector<double> sorted(v.begin(), v.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  double running = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    running += sorted[j];
    const double candidate = (running - 1.0) / static_cast<double>(j + 1);
    if (sorted[j] - candidate > 0.0) theta = candidate;
  }
  for (double& x : v) x = std::max(0.0, x - theta);
}

void project_feasible(const GroundedMRF& mrf, std::vector<double>& x,
                      double tol, int max_sweeps) {
  if (mrf.num_atoms == 0) return;
  const std::size_t n_groups = mrf.groups.size();
  // Dykstra correction buffers, one per simplex set.
  std::vector<std::vector<double>> corr(n_groups);
  for (std::size_t g = 0; g < n_groups; ++g)
    corr[g].assign(mrf.groups[g].size, 0.0);

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    for (std::size_t g = 0; g < n_groups; ++g) {
      const auto& grp = mrf.groups[g];
      std::span<double> slice(x.data() + grp.offset, grp.size);
      std::vector<double> w(grp.size);
      for (int i = 0; i < grp.size; ++i) w[i] = slice[i] + corr[g][i];
      std::vector<double> y = w;
      project_simplex(y);
      for (int i = 0; i < grp.size; ++i) {
        corr[g][i] = w[i] - y[i];
        slice[i] = y[i];
      }
    }
    for (const auto& e : mrf.equalities) {
      const double t = (e.rhs - x[e.a] - x[e.b]) / 2.0;
      x[e.a] += t;
      x[e.b] += t;
    }
    if (mrf.constraint_residual(x) <= tol) return;
  }
}

// ---------------------------------------------------------------------------
// Consensus ADMM

namespace {

enum class AgentKind { hinge, equality, simplex };

struct Agent {
  AgentKind kind;
  int idx;  // into mrf.hinges / mrf.equalities / mrf.groups
  int offset;  // first coordinate (simplex) — unused otherwise
  int size;
  std::vector<double> z, u;
};

}  // namespace

MapResult map_infer(const GroundedMRF& mrf, const SolveOptions& opts) {
  MapResult result;
  if (mrf.num_atoms == 0) return result;
  if (!(opts.tol > 0.0)) throw Error("map_infer: tol must be positive");

  const int n = mrf.num_atoms;

  // Per-coordinate prior pull folded into the consensus update.
  std::vector<double> prior_coeff(n, 0.0), prior_mass(n, 0.0);
  for (const auto& p : mrf.priors) {
    prior_coeff[p.atom] += 2.0 * mrf.prior_weight;
    prior_mass[p.atom] += 2.0 * mrf.prior_weight * p.target;
  }

  std::vector<double> x(n, 0.0);
  for (const auto& p : mrf.priors) x[p.atom] = p.target;

  std::vector<Agent> agents;
  std::vector<int> fanin(n, 0);
  for (std::size_t i = 0; i < mrf.hinges.size(); ++i) {
    Agent a{AgentKind::hinge, static_cast<int>(i), 0, 2, {}, {}};
    a.z = {x[mrf.hinges[i].pos], x[mrf.hinges[i].neg]};
    a.u = {0.0, 0.0};
    ++fanin[mrf.hinges[i].pos];
    ++fanin[mrf.hinges[i].neg];
    agents.push_back(std::move(a));
  }
  for (std::size_t i = 0; i < mrf.equalities.size(); ++i) {
    Agent a{AgentKind::equality, static_cast<int>(i), 0, 2, {}, {}};
    a.z = {x[mrf.equalities[i].a], x[mrf.equalities[i].b]};
    a.u = {0.0, 0.0};
    ++fanin[mrf.equalities[i].a];
    ++fanin[mrf.equalities[i].b];
    agents.push_back(std::move(a));
  }
  for (std::size_t g = 0; g < mrf.groups.size(); ++g) {
    const auto& grp = mrf.groups[g];
    Agent a{AgentKind::simplex, static_cast<int>(g), grp.offset, grp.size, {}, {}};
    a.z.assign(x.begin() + grp.offset, x.begin() + grp.offset + grp.size);
    a.u.assign(grp.size, 0.0);
    for (int i = 0; i < grp.size; ++i) ++fanin[grp.offset + i];
    agents.push_back(std::move(a));
  }

  double rho = 2.0;
  std::vector<double> accum(n, 0.0);
  std::vector<double> x_prev(n, 0.0);
  std::vector<double> candidate;
  double best_obj = std::numeric_limits<double>::infinity();
  std::vector<double> best_x;
  double last_residual = 0.0;

  const int check_every = 25;
  int stable_checks = 0;
  bool converged = false;

  auto coords_of = [&](const Agent& a, int j) -> int {
    switch (a.kind) {
      case AgentKind::hinge:
        return j == 0 ? mrf.hinges[a.idx].pos : mrf.hinges[a.idx].neg;
      case AgentKind::equality:
        return j == 0 ? mrf.equalities[a.idx].a : mrf.equalities[a.idx].b;
      case AgentKind::simplex:
        return a.offset + j;
    }
    return 0;
  };

  int iter = 0;
  for (; iter < opts.max_iter; ++iter) {
    // Agent proximal steps.
    for (auto& a : agents) {
      switch (a.kind) {
        case AgentKind::hinge: {
          const auto& h = mrf.hinges[a.idx];
          const double v1 = x[h.pos] - a.u[0];
          const double v2 = x[h.neg] - a.u[1];
          const double d = v1 - v2;
          double t = 0.0;
          if (d > 0.0) {
            if (h.exponent == 1) {
              t = std::min(d / 2.0, h.weight / rho);
            } else {
              t = 2.0 * h.weight * d / (rho + 4.0 * h.weight);
            }
          }
          a.z[0] = v1 - t;
          a.z[1] = v2 + t;
          break;
        }
        case AgentKind::equality: {
          const auto& e = mrf.equalities[a.idx];
          const double v1 = x[e.a] - a.u[0];
          const double v2 = x[e.b] - a.u[1];
          const double t = (e.rhs - v1 - v2) / 2.0;
          a.z[0] = v1 + t;
          a.z[1] = v2 + t;
          break;
        }
        case AgentKind::simplex: {
          for (int j = 0; j < a.size; ++j)
            a.z[j] = x[a.offset + j] - a.u[j];
          project_simplex(a.z);
          break;
        }
      }
    }

    // Consensus update with the squared priors and the [0,1] box.
    std::fill(accum.begin(), accum.end(), 0.0);
    for (const auto& a : agents)
      for (int j = 0; j < a.size; ++j)
        accum[coords_of(a, j)] += a.z[j] + a.u[j];
    std::swap(x_prev, x);
    for (int i = 0; i < n; ++i) {
      const double denom = prior_coeff[i] + rho * fanin[i];
      const double val = denom > 0.0
                             ? (prior_mass[i] + rho * accum[i]) / denom
                             : x_prev[i];
      x[i] = std::clamp(val, 0.0, 1.0);
    }

    // Dual update and residuals.
    double primal_res = 0.0;
    for (auto& a : agents) {
      for (int j = 0; j < a.size; ++j) {
        const double diff = a.z[j] - x[coords_of(a, j)];
        a.u[j] += diff;
        primal_res = std::max(primal_res, std::abs(diff));
      }
    }
    double dual_res = 0.0;
    for (int i = 0; i < n; ++i)
      dual_res = std::max(dual_res, rho * std::abs(x[i] - x_prev[i]));

    const bool tight = primal_res <= 1e-9 && dual_res <= 1e-9;
    if (tight || (iter + 1) % check_every == 0 || iter + 1 == opts.max_iter) {
      candidate = x;
      project_feasible(mrf, candidate);
      last_residual = mrf.constraint_residual(candidate);
      const double obj = mrf.objective(candidate);
      const double gain = best_obj - obj;
      if (obj < best_obj) {
        best_obj = obj;
        best_x = candidate;
      }
      result.trace.push_back(best_obj);
      // The squared priors make the objective strongly convex, so a
      // plateau of the feasible candidates means convergence.
      if (last_residual <= 1e-8 &&
          gain <= opts.tol * 0.05 * std::max(1.0, std::abs(best_obj))) {
        ++stable_checks;
      } else {
        stable_checks = 0;
      }
      if (tight || stable_checks >= 6) {
        converged = true;
        ++iter;
        break;
      }
    }

    // Residual balancing keeps primal and dual progress comparable.
    if ((iter + 1) % 64 == 0 && !tight) {
      if (primal_res > 10.0 * dual_res && rho < 64.0) {
        rho *= 2.0;
        for (auto& a : agents)
          for (double& uj : a.u) uj /= 2.0;
      } else if (dual_res > 10.0 * primal_res && rho > 1.0 / 64.0) {
        rho /= 2.0;
        for (auto& a : agents)
          for (double& uj : a.u) uj *= 2.0;
      }
    }
  }

  if (!converged) {
    std::ostringstream msg;
    msg << "map_infer did not converge within " << opts.max_iter
        << " iterations (last objective="
        << (best_x.empty() ? mrf.objective(x) : best_obj)
        << ", constraint residual=" << mrf.constraint_residual(x)
        << ", residual of best candidate=" << last_residual << ")";
    throw Error(msg.str());
  }

  result.values = std::move(best_x);
  result.objective = best_obj;
  result.residual = mrf.constraint_residual(result.values);
  result.iterations = iter;
  return result;
}

// ---------------------------------------------------------------------------
// Discretization

namespace {

int argmax_label(std::span<const double> x, int offset, int size) {
  int best = 0;
  for (int i = 1; i < size; ++i)
    if (x[offset + i] > x[offset + best]) best = i;
  return best;
}

// Argmax over the group excluding one label.
int argmax_excluding(std::span<const double> x, int offset, int size,
                     int excluded) {
  int best = -1;
  for (int i = 0; i < size; ++i) {
    if (i == excluded) continue;
    if (best < 0 || x[offset + i] > x[offset + best]) best = i;
  }
  return best;
}

}  // namespace

FrameRecord discretize(const GroundedMRF& mrf, std::span<const double> values,
                       const RuleMask& mask) {
  if (static_cast<int>(values.size()) != mrf.num_atoms)
    throw Error("discretize: assignment size mismatch");

  FrameRecord rec;
  rec.article_id = mrf.article_id;

  auto group_of = [&](const std::string& ent, Task t) -> const AtomGroup& {
    const AtomGroup* g = mrf.find_group(ent, t);
    if (!g) throw Error("discretize: missing group " + ent + "/" + task_name(t));
    return *g;
  };

  const AtomGroup& g_art = group_of(mrf.article_id, Task::article_type);
  const AtomGroup& g_cond = group_of(mrf.article_id, Task::econ_conditions);
  const AtomGroup& g_dir = group_of(mrf.article_id, Task::econ_direction);

  const int art = argmax_label(values, g_art.offset, g_art.size);
  rec.article_type = label_set(Task::article_type)[art];
  const bool art_is_macro = art == macro_index(Task::article_type);
  if (mask.r2) {
    // The biconditional decides the dependent groups once the type is fixed.
    const int irr_c = irrelevant_index(Task::econ_conditions);
    const int irr_d = irrelevant_index(Task::econ_direction);
    rec.econ_conditions =
        label_set(Task::econ_conditions)
            [art_is_macro
                 ? argmax_excluding(values, g_cond.offset, g_cond.size, irr_c)
                 : irr_c];
    rec.econ_direction =
        label_set(Task::econ_direction)
            [art_is_macro
                 ? argmax_excluding(values, g_dir.offset, g_dir.size, irr_d)
                 : irr_d];
  } else {
    rec.econ_conditions = label_set(
        Task::econ_conditions)[argmax_label(values, g_cond.offset, g_cond.size)];
    rec.econ_direction = label_set(
        Task::econ_direction)[argmax_label(values, g_dir.offset, g_dir.size)];
  }

  for (const auto& qid : mrf.quantity_ids) {
    const AtomGroup& g_qt = group_of(qid, Task::quantity_type);
    const AtomGroup& g_ind = group_of(qid, Task::indicator);
    const AtomGroup& g_pol = group_of(qid, Task::polarity);
    QuantityLabels q;
    q.quantity_id = qid;
    const int qt = argmax_label(values, g_qt.offset, g_qt.size);
    q.qtype = label_set(Task::quantity_type)[qt];
    const bool qt_is_macro = qt == macro_index(Task::quantity_type);
    if (mask.r1) {
      const int none = none_indicator_index();
      q.indicator = label_set(Task::indicator)
          [qt_is_macro ? argmax_excluding(values, g_ind.offset, g_ind.size, none)
                       : none];
    } else {
      q.indicator =
          label_set(Task::indicator)[argmax_label(values, g_ind.offset, g_ind.size)];
    }
    q.polarity =
        label_set(Task::polarity)[argmax_label(values, g_pol.offset, g_pol.size)];
    rec.quantities.push_back(std::move(q));
  }

  // Label-level coherence must hold whenever the hard rules are active.
  if (mask.r1) {
    for (const auto& q : rec.quantities) {
      const bool is_macro = q.qtype == "macro";
      const bool none = q.indicator == "none";
      if (is_macro == none)
        throw Error("discretize: r1 coherence violated for " + q.quantity_id);
    }
  }
  if (mask.r2) {
    const bool is_macro = rec.article_type == "macro";
    if (is_macro == (rec.econ_conditions == "irrelevant") ||
        is_macro == (rec.econ_direction == "irrelevant"))
      throw Error("discretize: r2 coherence violated for " + rec.article_id);
  }
  return rec;
}

// ---------------------------------------------------------------------------
// Weight learning

std::vector<double> gold_assignment(const GroundedMRF& mrf,
                                    const FrameRecord& gold) {
  std::vector<double> x(mrf.num_atoms, 0.0);
  for (const auto& g : mrf.groups) {
    std::string label;
    if (is_article_task(g.task)) {
      if (g.entity_id != gold.article_id)
        throw Error("gold_assignment: article id mismatch");
      label = g.task == Task::article_type     ? gold.article_type
              : g.task == Task::econ_conditions ? gold.econ_conditions
                                                : gold.econ_direction;
    } else {
      const QuantityLabels* q = gold.find_quantity(g.entity_id);
      if (!q)
        throw Error("gold_assignment: no gold labels for " + g.entity_id);
      label = g.task == Task::quantity_type ? q->qtype
              : g.task == Task::indicator   ? q->indicator
                                            : q->polarity;
    }
    x[g.offset + label_index(g.task, label)] = 1.0;
  }
  return x;
}

LearnResult learn_weights(std::vector<LearnExample>& train,
                          const RuleWeights& init,
                          const LearnHyperparams& hyper) {
  if (train.empty()) throw Error("learn_weights: empty training set");

  LearnResult result;
  result.weights = init;
  const int num_keys = init.num_keys();
  const std::size_t n = train.size();

  std::vector<std::vector<double>> gold_phi(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::vector<double> y = gold_assignment(train[i].mrf, train[i].gold);
    gold_phi[i] = train[i].mrf.rule_feature_totals(y, num_keys);
  }

  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    for (auto& ex : train) ex.mrf.apply_weights(result.weights);

    // MAP solves use the epoch-start weights, so they can run in parallel;
    // updates still apply in example order.
    std::vector<std::vector<double>> map_phi(n);
    std::vector<std::string> failures(n);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, hyper.workers))
#endif
    for (std::size_t i = 0; i < n; ++i) {
      try {
        const MapResult r = map_infer(train[i].mrf, hyper.solve);
        map_phi[i] =
            train[i].mrf.rule_feature_totals(r.values, num_keys);
      } catch (const std::exception& e) {
        failures[i] = e.what();
      }
    }
    for (std::size_t i = 0; i < n; ++i)
      if (!failures[i].empty())
        throw Error("learn_weights: MAP failed for example " +
                    std::to_string(i) + ": " + failures[i]);

    const double step = hyper.step / (1.0 + hyper.step_decay * epoch);
    double total_distance = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (int k = 0; k < num_keys; ++k) {
        total_distance += map_phi[i][k];
        result.weights.values[k] = std::max(
            0.0, result.weights.values[k] +
                     step * (map_phi[i][k] - gold_phi[i][k]));
      }
    }
    result.epoch_map_distance.push_back(total_distance);
  }
  return result;
}

}  // namespace econoframe
