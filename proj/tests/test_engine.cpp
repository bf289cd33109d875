#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>

#include "econoframe/engine.hpp"
#include "econoframe/util.hpp"

using namespace econoframe;

// ---------------------------------------------------------------------------
// Independent oracles, implemented before the solver was trusted. The
// objective evaluator below shares nothing with GroundedMRF::objective.

namespace {

double oracle_objective(const GroundedMRF& mrf, const std::vector<double>& x) {
  double total = 0.0;
  for (const auto& h : mrf.hinges) {
    double d = x[h.pos] - x[h.neg];
    if (d < 0.0) d = 0.0;
    if (h.exponent == 2) d = d * d;
    total += h.weight * d;
  }
  for (const auto& p : mrf.priors) {
    total += mrf.prior_weight * (x[p.atom] - p.target) * (x[p.atom] - p.target);
  }
  return total;
}

// A hand-built MRF whose feasible set is parametrized by up to three free
// scalars in [0,1]; assemble() expands them into a full feasible assignment.
struct TinyMrf {
  GroundedMRF mrf;
  int n_free = 0;
  bool simplex3 = false;  // first two scalars share a 3-label simplex
  std::function<std::vector<double>(const std::vector<double>&)> assemble;
};

double grid_search(const TinyMrf& tiny, double step = 0.01) {
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> t(tiny.n_free, 0.0);
  const int steps = static_cast<int>(std::lround(1.0 / step));
  std::function<void(int)> recurse = [&](int dim) {
    if (dim == tiny.n_free) {
      best = std::min(best, oracle_objective(tiny.mrf, tiny.assemble(t)));
      return;
    }
    int limit = steps;
    if (tiny.simplex3 && dim == 1)
      limit = steps - static_cast<int>(std::lround(t[0] / step));
    for (int i = 0; i <= limit; ++i) {
      t[dim] = i * step;
      recurse(dim + 1);
    }
  };
  recurse(0);
  return best;
}

void add_group_prior(GroundedMRF& mrf, int group, const std::vector<double>& p) {
  for (std::size_t i = 0; i < p.size(); ++i)
    mrf.priors.push_back(
        {mrf.groups[group].offset + static_cast<int>(i), p[i]});
}

// Targets on the 0.05 lattice keep the grid oracle's discretization error
// negligible.
double lattice(Rng& rng) { return 0.05 * static_cast<double>(rng.next_below(21)); }

TinyMrf make_tiny(Rng& rng, int variant) {
  TinyMrf tiny;
  GroundedMRF& mrf = tiny.mrf;
  std::vector<std::pair<int, int>> free_pairs;  // (atom_hi, atom_lo) per scalar

  if (variant == 0) {
    // One to three independent 2-label groups.
    const int k = 1 + static_cast<int>(rng.next_below(3));
    tiny.n_free = k;
    for (int g = 0; g < k; ++g) {
      mrf.add_group("g" + std::to_string(g), Task::polarity, 2);
      const double p = lattice(rng);
      add_group_prior(mrf, g, {p, 1.0 - p});
      free_pairs.push_back({mrf.groups[g].offset, mrf.groups[g].offset + 1});
    }
    tiny.assemble = [free_pairs, n = mrf.num_atoms](const std::vector<double>& t) {
      std::vector<double> x(n, 0.0);
      for (std::size_t i = 0; i < free_pairs.size(); ++i) {
        x[free_pairs[i].first] = t[i];
        x[free_pairs[i].second] = 1.0 - t[i];
      }
      return x;
    };
  } else if (variant == 1) {
    // Two 2-label groups coupled by a hard equality leave one scalar, plus
    // an optional second free group.
    const bool extra = rng.next_below(2) == 1;
    tiny.n_free = extra ? 2 : 1;
    mrf.add_group("g0", Task::polarity, 2);
    mrf.add_group("g1", Task::polarity, 2);
    const double p0 = lattice(rng), p1 = lattice(rng);
    add_group_prior(mrf, 0, {p0, 1.0 - p0});
    add_group_prior(mrf, 1, {p1, 1.0 - p1});
    mrf.equalities.push_back({0, 2, 1.0, RuleId::r1});
    if (extra) {
      mrf.add_group("g2", Task::polarity, 2);
      const double p2 = lattice(rng);
      add_group_prior(mrf, 2, {p2, 1.0 - p2});
    }
    tiny.assemble = [extra, n = mrf.num_atoms](const std::vector<double>& t) {
      std::vector<double> x(n, 0.0);
      x[0] = t[0];
      x[1] = 1.0 - t[0];
      x[2] = 1.0 - t[0];
      x[3] = t[0];
      if (extra) {
        x[4] = t[1];
        x[5] = 1.0 - t[1];
      }
      return x;
    };
  } else {
    // One 3-label simplex (two scalars) plus an optional 2-label group.
    const bool extra = rng.next_below(2) == 1;
    tiny.n_free = extra ? 3 : 2;
    tiny.simplex3 = true;
    mrf.add_group("g0", Task::polarity, 3);
    double a = lattice(rng), b = lattice(rng);
    if (a + b > 1.0) {
      a /= 2.0;
      b /= 2.0;
      a = std::round(a / 0.05) * 0.05;
      b = std::round(b / 0.05) * 0.05;
    }
    add_group_prior(mrf, 0, {a, b, 1.0 - a - b});
    if (extra) {
      mrf.add_group("g1", Task::polarity, 2);
      const double p = lattice(rng);
      add_group_prior(mrf, 1, {p, 1.0 - p});
    }
    tiny.assemble = [extra, n = mrf.num_atoms](const std::vector<double>& t) {
      std::vector<double> x(n, 0.0);
      x[0] = t[0];
      x[1] = t[1];
      x[2] = std::max(0.0, 1.0 - t[0] - t[1]);
      if (extra) {
        x[3] = t[2];
        x[4] = 1.0 - t[2];
      }
      return x;
    };
  }

  // Random hinge potentials over distinct atoms.
  const int n_hinges = 1 + static_cast<int>(rng.next_below(4));
  for (int h = 0; h < n_hinges; ++h) {
    const int pos = static_cast<int>(rng.next_below(mrf.num_atoms));
    int neg = static_cast<int>(rng.next_below(mrf.num_atoms));
    if (neg == pos) neg = (neg + 1) % mrf.num_atoms;
    const double weight = 0.25 * (1.0 + static_cast<double>(rng.next_below(5)));
    const int exponent = rng.next_below(2) == 0 ? 1 : 2;
    mrf.hinges.push_back({pos, neg, weight, exponent, RuleId::r3, -1});
  }
  return tiny;
}

PriorSet uniform_priors(const std::string& article_id,
                        const std::vector<std::string>& qids) {
  PriorSet set;
  auto add = [&](const std::string& ent, Task t) {
    LabelDistribution d;
    d.atom_group_id = ent;
    d.task = t;
    d.probs.assign(label_count(t), 1.0 / label_count(t));
    set.add(std::move(d));
  };
  add(article_id, Task::article_type);
  add(article_id, Task::econ_conditions);
  add(article_id, Task::econ_direction);
  for (const auto& q : qids) {
    add(q, Task::quantity_type);
    add(q, Task::indicator);
    add(q, Task::polarity);
  }
  return set;
}

void set_prior(PriorSet& set, const std::string& ent, Task t,
               std::vector<double> probs) {
  LabelDistribution d;
  d.atom_group_id = ent;
  d.task = t;
  d.probs = std::move(probs);
  set.add(std::move(d));
}

}  // namespace

// ---------------------------------------------------------------------------
// Lukasiewicz

TEST_CASE("lukasiewicz corners") {
  const double both[] = {1.0, 1.0};
  CHECK(luk_and(both) == doctest::Approx(1.0));
  const double mid[] = {0.6, 0.7};
  CHECK(luk_and(mid) == doctest::Approx(0.3));
  CHECK(luk_or(mid) == doctest::Approx(1.0));
  const double low[] = {0.2, 0.3};
  CHECK(luk_or(low) == doctest::Approx(0.5));
  CHECK(luk_not(0.25) == doctest::Approx(0.75));
  CHECK(impl_distance(0.9, 0.2) == doctest::Approx(0.7));
  CHECK(impl_distance(0.2, 0.9) == doctest::Approx(0.0));
  const double triple[] = {0.9, 0.8, 0.7};
  CHECK(luk_and(triple) == doctest::Approx(0.4));  // max(0, 2.4 - 2)
  CHECK(luk_or(triple) == doctest::Approx(1.0));
  const double bad[] = {1.2, 0.5};
  CHECK_THROWS_AS(luk_and(bad), Error);
  CHECK_THROWS_AS(luk_not(-0.1), Error);
}

TEST_CASE("lukasiewicz properties on random inputs") {
  Rng rng(3);
  for (int i = 0; i < 2000; ++i) {
    const double a = rng.next_double();
    const double b = rng.next_double();
    const double pair[] = {a, b};
    const double conj = luk_and(pair);
    const double disj = luk_or(pair);
    CHECK(conj >= 0.0);
    CHECK(conj <= std::min(a, b) + 1e-12);
    CHECK(disj <= 1.0);
    CHECK(disj >= std::max(a, b) - 1e-12);
    // De Morgan holds exactly under the relaxation.
    const double na_nb[] = {1.0 - a, 1.0 - b};
    CHECK(luk_not(conj) == doctest::Approx(luk_or(na_nb)).epsilon(1e-12));
    CHECK((impl_distance(a, b) == 0.0) == (a <= b));
  }
}

TEST_CASE("lukasiewicz dispatch") {
  const double args[] = {0.9, 0.2};
  CHECK(lukasiewicz(LukOp::impl_distance, args) == doctest::Approx(0.7));
  const double one[] = {0.3};
  CHECK(lukasiewicz(LukOp::logic_not, one) == doctest::Approx(0.7));
  CHECK_THROWS_AS(lukasiewicz(LukOp::logic_not, args), Error);
}

// ---------------------------------------------------------------------------
// MAP inference against the grid oracle

TEST_CASE("prior-only group solves to the prior") {
  GroundedMRF mrf;
  mrf.add_group("g", Task::polarity, 2);
  add_group_prior(mrf, 0, {0.8, 0.2});
  const MapResult r = map_infer(mrf);
  CHECK(r.values[0] == doctest::Approx(0.8).epsilon(1e-6));
  CHECK(r.values[1] == doctest::Approx(0.2).epsilon(1e-6));
  CHECK(r.residual <= 1e-6);
}

TEST_CASE("coupled groups split the conflict evenly") {
  // Both sides want 0.9 but the equality allows only a total of 1.
  GroundedMRF mrf;
  mrf.add_group("q/type", Task::quantity_type, 2);
  mrf.add_group("q/ind", Task::indicator, 2);
  add_group_prior(mrf, 0, {0.9, 0.1});
  add_group_prior(mrf, 1, {0.9, 0.1});
  mrf.equalities.push_back({0, 2, 1.0, RuleId::r1});
  const MapResult r = map_infer(mrf);
  CHECK(r.values[0] == doctest::Approx(0.5).epsilon(1e-5));
  CHECK(r.values[2] == doctest::Approx(0.5).epsilon(1e-5));
  CHECK(r.residual <= 1e-6);

  TinyMrf tiny;
  tiny.mrf = mrf;
  tiny.n_free = 1;
  tiny.assemble = [](const std::vector<double>& t) {
    return std::vector<double>{t[0], 1.0 - t[0], 1.0 - t[0], t[0]};
  };
  CHECK(std::abs(r.objective - grid_search(tiny)) <= 1e-3);
}

TEST_CASE("random tiny groundings match exhaustive grid search") {
  Rng rng(17);
  for (int round = 0; round < 18; ++round) {
    TinyMrf tiny = make_tiny(rng, round % 3);
    const MapResult r = map_infer(tiny.mrf);
    const double oracle = grid_search(tiny);
    INFO("round ", round, " solver=", r.objective, " grid=", oracle);
    CHECK(r.objective <= oracle + 1e-3);
    CHECK(r.objective >= -1e-12);
    CHECK(std::abs(r.objective - oracle) <= 1e-3);
    CHECK(r.residual <= 1e-6);
    // The recorded trace never increases.
    for (std::size_t i = 1; i < r.trace.size(); ++i)
      CHECK(r.trace[i] <= r.trace[i - 1] + 1e-15);
  }
}

TEST_CASE("objective is convex over feasible mixtures") {
  Rng rng(23);
  for (int round = 0; round < 25; ++round) {
    TinyMrf tiny = make_tiny(rng, round % 3);
    std::vector<double> x(tiny.mrf.num_atoms), y(tiny.mrf.num_atoms);
    for (auto& v : x) v = rng.next_double();
    for (auto& v : y) v = rng.next_double();
    project_feasible(tiny.mrf, x);
    project_feasible(tiny.mrf, y);
    const double lambda = rng.next_double();
    std::vector<double> mix(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
      mix[i] = lambda * x[i] + (1.0 - lambda) * y[i];
    CHECK(tiny.mrf.objective(mix) <=
          lambda * tiny.mrf.objective(x) +
              (1.0 - lambda) * tiny.mrf.objective(y) + 1e-9);
  }
}

TEST_CASE("zero-weight rules leave the optimum unchanged") {
  Rng rng(31);
  TinyMrf tiny = make_tiny(rng, 0);
  const MapResult before = map_infer(tiny.mrf);
  tiny.mrf.hinges.push_back({0, 1, 0.0, 1, RuleId::r5, -1});
  const MapResult after = map_infer(tiny.mrf);
  CHECK(std::abs(before.objective - after.objective) <= 1e-6);
}

TEST_CASE("map_infer validates inputs and reports non-convergence") {
  GroundedMRF mrf;
  mrf.add_group("q/type", Task::quantity_type, 2);
  mrf.add_group("q/ind", Task::indicator, 2);
  add_group_prior(mrf, 0, {0.9, 0.1});
  add_group_prior(mrf, 1, {0.9, 0.1});
  mrf.equalities.push_back({0, 2, 1.0, RuleId::r1});
  CHECK_THROWS_AS(map_infer(mrf, {.tol = -1.0, .max_iter = 100}), Error);
  CHECK_THROWS_WITH_AS(map_infer(mrf, {.tol = 1e-6, .max_iter = 1}),
                       doctest::Contains("did not converge"), Error);
}

// ---------------------------------------------------------------------------
// Grounding

TEST_CASE("grounding instantiates the rule templates") {
  const std::vector<std::string> qids = {"a1#q0", "a1#q1"};
  const PriorSet priors = uniform_priors("a1", qids);
  const RuleWeights w = RuleWeights::init(1.0, WeightSharing::per_label);

  const GroundedMRF all = ground("a1", qids, priors, w,
                                 RuleMask::parse("r1,r2,r3,r4,r5"));
  CHECK(all.groups.size() == 9);  // 3 article-level + 3 per quantity
  CHECK(all.num_atoms == 6 + 4 + 4 + 2 * (6 + 12 + 3));
  CHECK(all.priors.size() == static_cast<std::size_t>(all.num_atoms));

  int r5 = 0, r3 = 0, r4 = 0;
  for (const auto& h : all.hinges) {
    if (h.rule == RuleId::r5) ++r5;
    if (h.rule == RuleId::r3) ++r3;
    if (h.rule == RuleId::r4) ++r4;
  }
  CHECK(r5 == 36);  // one adjacent pair x 36 label pairs
  CHECK(r3 == 6);   // two quantities x three polarity labels
  CHECK(r4 == 6);
  int eq_r1 = 0, eq_r2 = 0;
  for (const auto& e : all.equalities) {
    if (e.rule == RuleId::r1) ++eq_r1;
    if (e.rule == RuleId::r2) ++eq_r2;
  }
  CHECK(eq_r1 == 2);
  CHECK(eq_r2 == 2);

  const GroundedMRF none = ground("a1", qids, priors, w, RuleMask{});
  CHECK(none.hinges.empty());
  CHECK(none.equalities.empty());
  CHECK(none.priors.size() == static_cast<std::size_t>(none.num_atoms));

  const GroundedMRF empty = ground("a1", {}, priors, w,
                                   RuleMask::parse("r1,r2,r3,r4,r5"));
  CHECK(empty.groups.size() == 3);
  CHECK(empty.hinges.empty());
  int empty_r2 = 0;
  for (const auto& e : empty.equalities) empty_r2 += e.rule == RuleId::r2;
  CHECK(empty_r2 == 2);
}

TEST_CASE("grounding honors the squared-hinge configuration") {
  const std::vector<std::string> qids = {"a1#q0", "a1#q1"};
  const PriorSet priors = uniform_priors("a1", qids);
  const RuleWeights w = RuleWeights::init(1.0, WeightSharing::per_label);
  GroundingConfig config;
  config.hinge_exponent = 2;
  const GroundedMRF mrf =
      ground("a1", qids, priors, w, RuleMask::parse("r3,r5"), config);
  REQUIRE(!mrf.hinges.empty());
  for (const auto& h : mrf.hinges) CHECK(h.exponent == 2);
  const MapResult r = map_infer(mrf);
  CHECK(r.residual <= 1e-6);
}

TEST_CASE("grounding requires priors for every group") {
  PriorSet priors = uniform_priors("a1", {});
  const RuleWeights w = RuleWeights::init(1.0, WeightSharing::per_label);
  CHECK_THROWS_WITH_AS(
      ground("a1", {"a1#q0"}, priors, w, RuleMask::parse("r1")),
      doctest::Contains("missing prior"), Error);
}

TEST_CASE("priors-only inference returns the priors") {
  const std::vector<std::string> qids = {"a1#q0"};
  PriorSet priors = uniform_priors("a1", qids);
  set_prior(priors, "a1", Task::econ_conditions, {0.6, 0.2, 0.1, 0.1});
  set_prior(priors, "a1#q0", Task::polarity, {0.1, 0.7, 0.2});
  const RuleWeights w = RuleWeights::init(1.0, WeightSharing::per_label);
  const GroundedMRF mrf = ground("a1", qids, priors, w, RuleMask{});
  const MapResult r = map_infer(mrf);
  const AtomGroup* cond = mrf.find_group("a1", Task::econ_conditions);
  CHECK(r.values[cond->offset] == doctest::Approx(0.6).epsilon(1e-5));
  const FrameRecord rec = discretize(mrf, r.values, RuleMask{});
  CHECK(rec.econ_conditions == "good");
  const QuantityLabels* q = rec.find_quantity("a1#q0");
  REQUIRE(q != nullptr);
  CHECK(q->polarity == "negative");
}

// ---------------------------------------------------------------------------
// Discretization

TEST_CASE("argmax ties resolve to the first label in set order") {
  const std::vector<std::string> qids;
  PriorSet priors = uniform_priors("a1", qids);
  set_prior(priors, "a1", Task::econ_conditions, {0.4, 0.4, 0.1, 0.1});
  const RuleWeights w = RuleWeights::init(1.0, WeightSharing::per_label);
  const GroundedMRF mrf = ground("a1", qids, priors, w, RuleMask{});
  const MapResult r = map_infer(mrf);
  const FrameRecord rec = discretize(mrf, r.values, RuleMask{});
  CHECK(rec.econ_conditions == "good");  // good ties fair, good is first
}

TEST_CASE("discretization stays coherent on the r1 conflict fixture") {
  const std::vector<std::string> qids = {"a1#q0"};
  PriorSet priors = uniform_priors("a1", qids);
  // Both argmaxes would otherwise land on macro and none at ~0.5 each.
  set_prior(priors, "a1#q0", Task::quantity_type,
            {0.5, 0.2, 0.1, 0.1, 0.05, 0.05});
  std::vector<double> ind(12, 0.3 / 10.0);
  ind[11] = 0.5;  // none
  ind[0] = 0.2;   // jobs
  set_prior(priors, "a1#q0", Task::indicator, ind);
  const RuleWeights w = RuleWeights::init(1.0, WeightSharing::per_label);
  const RuleMask mask = RuleMask::parse("r1,r2");
  const GroundedMRF mrf = ground("a1", qids, priors, w, mask);
  const MapResult r = map_infer(mrf);
  CHECK(r.residual <= 1e-6);
  const FrameRecord rec = discretize(mrf, r.values, mask);
  const QuantityLabels* q = rec.find_quantity("a1#q0");
  REQUIRE(q != nullptr);
  const bool macro = q->qtype == "macro";
  const bool none = q->indicator == "none";
  CHECK(macro != none);
  const bool art_macro = rec.article_type == "macro";
  CHECK(art_macro == (rec.econ_conditions != "irrelevant"));
  CHECK(art_macro == (rec.econ_direction != "irrelevant"));
}

// ---------------------------------------------------------------------------
// Weights

TEST_CASE("rule mask parsing and labels") {
  const RuleMask m = RuleMask::parse("r1,r2,r5");
  CHECK(m.r1);
  CHECK(m.r2);
  CHECK(!m.r3);
  CHECK(m.r5);
  CHECK(m.label() == "r1+r2+r5");
  CHECK(RuleMask::parse("").label() == "priors_only");
  CHECK(RuleMask::parse("none").empty());
  CHECK_THROWS_AS(RuleMask::parse("r9"), Error);
}

TEST_CASE("shared weight mode grounds and learns") {
  const std::vector<std::string> qids = {"a1#q0", "a1#q1", "a1#q2"};
  PriorSet priors = uniform_priors("a1", qids);
  const RuleWeights shared = RuleWeights::init(0.7, WeightSharing::shared);
  const RuleMask mask = RuleMask::parse("r3,r4,r5");
  const GroundedMRF mrf = ground("a1", qids, priors, shared, mask);
  for (const auto& h : mrf.hinges) {
    CHECK(h.weight == doctest::Approx(0.7));
    CHECK(h.weight_key >= 0);
    CHECK(h.weight_key < 3);
  }

  FrameRecord gold;
  gold.article_id = "a1";
  gold.article_type = "macro";
  gold.econ_conditions = "good";
  gold.econ_direction = "better";
  for (const auto& q : qids)
    gold.quantities.push_back({q, "macro", "jobs", "positive"});
  std::vector<LearnExample> train;
  train.push_back({mrf, gold});
  LearnHyperparams hyper;
  hyper.epochs = 2;
  const LearnResult r = learn_weights(train, shared, hyper);
  CHECK(r.weights.num_keys() == 3);
  for (double v : r.weights.values) CHECK(v >= 0.0);
}

TEST_CASE("weights round-trip through JSON") {
  RuleWeights w = RuleWeights::init(1.0, WeightSharing::per_label);
  w.values[w.key_r3(0)] = 2.5;
  w.values[w.key_r5(1, 2)] = 0.25;
  w.prior_weight = 1.5;
  const RuleWeights back = RuleWeights::from_json(w.to_json());
  CHECK(back.sharing == WeightSharing::per_label);
  CHECK(back.values == w.values);
  CHECK(back.prior_weight == doctest::Approx(1.5));

  const RuleWeights shared = RuleWeights::init(0.5, WeightSharing::shared);
  const RuleWeights shared_back = RuleWeights::from_json(shared.to_json());
  CHECK(shared_back.num_keys() == 3);
  CHECK(shared_back.values == shared.values);
}

// ---------------------------------------------------------------------------
// Weight learning

namespace {

// Training example where conditions are good and every polarity is positive:
// a gold assignment that satisfies every rule.
LearnExample satisfied_example(const std::string& id, double prior_noise,
                               Rng& rng, const RuleWeights& w,
                               const RuleMask& mask) {
  const std::vector<std::string> qids = {id + "#q0", id + "#q1", id + "#q2"};
  FrameRecord gold;
  gold.article_id = id;
  gold.article_type = "macro";
  gold.econ_conditions = "good";
  gold.econ_direction = "better";
  for (const auto& q : qids) gold.quantities.push_back({q, "macro", "jobs",
                                                        "positive"});
  PriorSet priors = gold_priors({gold}, 0.3);
  if (prior_noise > 0.0 && rng.next_double() < prior_noise) {
    // Corrupt the conditions prior so MAP has something to fix.
    set_prior(priors, id, Task::econ_conditions, {0.2, 0.5, 0.2, 0.1});
  }
  LearnExample ex;
  ex.mrf = ground(id, qids, priors, w, mask);
  ex.gold = gold;
  return ex;
}

}  // namespace

TEST_CASE("zero training epochs leave the weights unchanged") {
  Rng rng(5);
  const RuleWeights init = RuleWeights::init(1.0, WeightSharing::per_label);
  const RuleMask mask = RuleMask::parse("r3");
  std::vector<LearnExample> train;
  train.push_back(satisfied_example("a1", 0.0, rng, init, mask));
  LearnHyperparams hyper;
  hyper.epochs = 0;
  const LearnResult r = learn_weights(train, init, hyper);
  CHECK(r.weights.values == init.values);
  CHECK(r.epoch_map_distance.empty());
}

TEST_CASE("rules the gold data satisfies never lose weight") {
  Rng rng(6);
  const RuleWeights init = RuleWeights::init(0.5, WeightSharing::per_label);
  const RuleMask mask = RuleMask::parse("r3,r5");
  std::vector<LearnExample> train;
  for (int i = 0; i < 6; ++i)
    train.push_back(
        satisfied_example("a" + std::to_string(i), 0.8, rng, init, mask));

  // Keys whose gold feature totals are zero across the whole set; only
  // those are guaranteed a nonnegative update.
  std::vector<double> gold_totals(init.num_keys(), 0.0);
  for (const auto& ex : train) {
    const auto phi = ex.mrf.rule_feature_totals(
        gold_assignment(ex.mrf, ex.gold), init.num_keys());
    for (int k = 0; k < init.num_keys(); ++k) gold_totals[k] += phi[k];
  }

  LearnHyperparams hyper;
  hyper.epochs = 5;
  const LearnResult r = learn_weights(train, init, hyper);
  int satisfied_keys = 0;
  for (int k = 0; k < init.num_keys(); ++k) {
    if (gold_totals[k] == 0.0) {
      ++satisfied_keys;
      CHECK(r.weights.values[k] >= init.values[k] - 1e-12);
    }
  }
  CHECK(satisfied_keys > 0);  // r3 keys and the macro->macro r5 key qualify
}

TEST_CASE("learning rejects an empty training set") {
  std::vector<LearnExample> train;
  CHECK_THROWS_AS(
      learn_weights(train, RuleWeights::init(1.0, WeightSharing::per_label),
                    LearnHyperparams{}),
      Error);
}

TEST_CASE("planted dependency outweighs the distractor") {
  // Articles alternate good/poor conditions. Positive polarity appears only
  // under good (planted rule); negative appears equally everywhere, so
  // r3[negative] is independent of the poor label.
  Rng rng(7);
  const RuleWeights init = RuleWeights::init(0.5, WeightSharing::per_label);
  const RuleMask mask = RuleMask::parse("r3");
  std::vector<LearnExample> train;
  for (int i = 0; i < 24; ++i) {
    const std::string id = "a" + std::to_string(i);
    const bool good = i % 2 == 0;
    const std::vector<std::string> qids = {id + "#q0", id + "#q1"};
    FrameRecord gold;
    gold.article_id = id;
    gold.article_type = "macro";
    gold.econ_conditions = good ? "good" : "fair";
    gold.econ_direction = good ? "better" : "same";
    for (const auto& q : qids) {
      const char* pol = good ? "positive" : (rng.next_below(2) ? "negative"
                                                               : "neutral");
      gold.quantities.push_back({q, "macro", "jobs", pol});
    }
    // Corrupt half of the conditions priors.
    PriorSet priors = gold_priors({gold}, 0.35);
    if (i % 2 == 0 && rng.next_double() < 0.5)
      set_prior(priors, id, Task::econ_conditions, {0.15, 0.55, 0.2, 0.1});
    LearnExample ex;
    ex.mrf = ground(id, qids, priors, init, mask);
    ex.gold = gold;
    train.push_back(std::move(ex));
  }
  LearnHyperparams hyper;
  hyper.epochs = 15;
  const LearnResult r = learn_weights(train, init, hyper);
  const int pos = r.weights.key_r3(0);
  const int neg = r.weights.key_r3(1);
  INFO("w3[positive]=", r.weights.values[pos],
       " w3[negative]=", r.weights.values[neg]);
  CHECK(r.weights.values[pos] > r.weights.values[neg]);
  for (double v : r.weights.values) CHECK(v >= 0.0);
  CHECK(r.epoch_map_distance.size() == 15);
}
