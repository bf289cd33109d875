#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "econoframe/evaluation.hpp"
#include "econoframe/util.hpp"

using namespace econoframe;

// ---------------------------------------------------------------------------
// Brute-force oracle: per-label TP/FP/FN counted with the most literal loop
// possible, kept independent of the implementation.

namespace {

struct OracleScores {
  std::vector<double> f1;
  double macro = 0.0;
  double weighted = 0.0;
};

OracleScores oracle_f1(const std::vector<int>& gold, const std::vector<int>& pred,
                       int n_labels) {
  OracleScores out;
  int total = static_cast<int>(gold.size());
  for (int c = 0; c < n_labels; ++c) {
    int tp = 0, fp = 0, fn = 0, support = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
      if (gold[i] == c) ++support;
      if (pred[i] == c && gold[i] == c) ++tp;
      if (pred[i] == c && gold[i] != c) ++fp;
      if (pred[i] != c && gold[i] == c) ++fn;
    }
    double precision = (tp + fp) > 0 ? double(tp) / (tp + fp) : 0.0;
    double recall = (tp + fn) > 0 ? double(tp) / (tp + fn) : 0.0;
    double f1 = (precision + recall) > 0.0
                    ? 2.0 * precision * recall / (precision + recall)
                    : 0.0;
    out.f1.push_back(f1);
    out.macro += f1 / n_labels;
    if (total > 0) out.weighted += f1 * support / total;
  }
  return out;
}

}  // namespace

TEST_CASE("f1 hand example reproduces to four decimals") {
  // gold [A,A,B,B], pred [A,B,B,B] over a two-label set.
  const std::vector<int> gold = {0, 0, 1, 1};
  const std::vector<int> pred = {0, 1, 1, 1};
  const TaskMetrics m = f1_scores(gold, pred, Task::polarity);  // any 3-label set
  CHECK(m.per_label[0].f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
  CHECK(m.per_label[1].f1 == doctest::Approx(0.8).epsilon(1e-9));
  // Macro over just the two used labels:
  const double macro_two = (m.per_label[0].f1 + m.per_label[1].f1) / 2.0;
  CHECK(std::abs(macro_two - 0.7333) < 5e-5);
}

TEST_CASE("perfect predictions score one") {
  const std::vector<int> gold = {0, 1, 2, 1, 0};
  const TaskMetrics m = f1_scores(gold, gold, Task::polarity);
  CHECK(m.macro_f1 == doctest::Approx(1.0));
  CHECK(m.weighted_f1 == doctest::Approx(1.0));
  CHECK(m.accuracy == doctest::Approx(1.0));
}

TEST_CASE("labels never predicted still count in macro") {
  // Label 2 (neutral) has zero support and zero predictions: its F1 of 0
  // drags macro down but not weighted.
  const std::vector<int> gold = {0, 0, 1, 1};
  const std::vector<int> pred = {0, 0, 1, 1};
  const TaskMetrics m = f1_scores(gold, pred, Task::polarity);
  CHECK(m.per_label[2].f1 == 0.0);
  CHECK(m.macro_f1 == doctest::Approx(2.0 / 3.0));
  CHECK(m.weighted_f1 == doctest::Approx(1.0));
}

TEST_CASE("f1 agrees with the brute-force oracle on random vectors") {
  Rng rng(13);
  for (int round = 0; round < 300; ++round) {
    const Task task = kAllTasks[rng.next_below(kNumTasks)];
    const int k = label_count(task);
    const int n = 1 + static_cast<int>(rng.next_below(40));
    std::vector<int> gold(n), pred(n);
    for (int i = 0; i < n; ++i) {
      gold[i] = static_cast<int>(rng.next_below(k));
      pred[i] = static_cast<int>(rng.next_below(k));
    }
    const TaskMetrics m = f1_scores(gold, pred, task);
    const OracleScores oracle = oracle_f1(gold, pred, k);
    CHECK(m.macro_f1 == doctest::Approx(oracle.macro).epsilon(1e-12));
    CHECK(m.weighted_f1 == doctest::Approx(oracle.weighted).epsilon(1e-12));
    for (int c = 0; c < k; ++c)
      CHECK(m.per_label[c].f1 == doctest::Approx(oracle.f1[c]).epsilon(1e-12));
    // Support sums to the test-set size; confusion rows sum to gold counts.
    int support_sum = 0;
    for (const auto& lm : m.per_label) support_sum += lm.support;
    CHECK(support_sum == n);
    for (int c = 0; c < k; ++c) {
      int row = 0;
      for (int j = 0; j < k; ++j) row += m.confusion[c][j];
      CHECK(row == m.per_label[c].support);
    }
  }
}

TEST_CASE("macro equals weighted under equal supports") {
  const std::vector<int> gold = {0, 0, 1, 1, 2, 2};
  const std::vector<int> pred = {0, 1, 1, 2, 2, 0};
  const TaskMetrics m = f1_scores(gold, pred, Task::polarity);
  CHECK(m.macro_f1 == doctest::Approx(m.weighted_f1).epsilon(1e-12));
}

TEST_CASE("metrics are invariant under joint permutation") {
  Rng rng(19);
  std::vector<int> gold(30), pred(30);
  for (int i = 0; i < 30; ++i) {
    gold[i] = static_cast<int>(rng.next_below(3));
    pred[i] = static_cast<int>(rng.next_below(3));
  }
  const TaskMetrics before = f1_scores(gold, pred, Task::polarity);
  std::vector<std::size_t> idx(30);
  for (std::size_t i = 0; i < 30; ++i) idx[i] = i;
  rng.shuffle(idx);
  std::vector<int> gold2(30), pred2(30);
  for (std::size_t i = 0; i < 30; ++i) {
    gold2[i] = gold[idx[i]];
    pred2[i] = pred[idx[i]];
  }
  const TaskMetrics after = f1_scores(gold2, pred2, Task::polarity);
  CHECK(before.macro_f1 == doctest::Approx(after.macro_f1).epsilon(1e-12));
  CHECK(before.weighted_f1 == doctest::Approx(after.weighted_f1).epsilon(1e-12));
}

TEST_CASE("f1 validates lengths and label ranges") {
  CHECK_THROWS_AS(f1_scores({0, 1}, {0}, Task::polarity), Error);
  CHECK_THROWS_AS(f1_scores({0, 5}, {0, 0}, Task::polarity), Error);
  CHECK_THROWS_AS(f1_scores_labels({"positive"}, {"sideways"}, Task::polarity),
                  Error);
}

// ---------------------------------------------------------------------------
// Krippendorff's alpha

TEST_CASE("alpha is one under full agreement") {
  std::vector<std::vector<int>> items = {{0, 0, 0}, {1, 1}, {2, 2, 2, 2},
                                         {0, 0}};
  CHECK(krippendorff_alpha(items) == doctest::Approx(1.0));
}

TEST_CASE("alpha is negative under systematic disagreement") {
  std::vector<std::vector<int>> items;
  for (int i = 0; i < 40; ++i) items.push_back({0, 1});
  CHECK(krippendorff_alpha(items) < 0.0);
}

TEST_CASE("alpha is near zero for independent coders") {
  Rng rng(101);
  std::vector<std::vector<int>> items;
  for (int i = 0; i < 1000; ++i)
    items.push_back({static_cast<int>(rng.next_below(2)),
                     static_cast<int>(rng.next_below(2))});
  const double alpha = krippendorff_alpha(items);
  INFO("alpha=", alpha);
  CHECK(std::abs(alpha) < 0.1);
}

TEST_CASE("alpha rejects insufficient overlap") {
  CHECK_THROWS_AS(krippendorff_alpha({{0}, {1}, {0}}), Error);
  CHECK_THROWS_AS(krippendorff_alpha({{0, 0}, {1}}), Error);
  // No variation at all: expected disagreement is zero.
  CHECK_THROWS_AS(krippendorff_alpha({{0, 0}, {0, 0}}), Error);
}

TEST_CASE("alpha accepts label strings") {
  std::vector<std::vector<std::string>> items = {{"good", "good"},
                                                 {"poor", "poor"}};
  CHECK(krippendorff_alpha_labels(items, Task::econ_conditions) ==
        doctest::Approx(1.0));
}

// ---------------------------------------------------------------------------
// Folds

TEST_CASE("make_folds splits evenly and deterministically") {
  std::vector<std::string> agreed;
  for (int i = 0; i < 10; ++i) agreed.push_back("a" + std::to_string(i));
  const FoldPlan p1 = make_folds(agreed, {}, 5, 42);
  const FoldPlan p2 = make_folds(agreed, {}, 5, 42);
  REQUIRE(p1.folds.size() == 5);
  std::vector<std::string> seen;
  for (int f = 0; f < 5; ++f) {
    CHECK(p1.folds[f].test.size() == 2);
    CHECK(p1.folds[f].train.size() == 8);
    CHECK(p1.folds[f].test == p2.folds[f].test);
    seen.insert(seen.end(), p1.folds[f].test.begin(), p1.folds[f].test.end());
  }
  std::sort(seen.begin(), seen.end());
  std::vector<std::string> expect = agreed;
  std::sort(expect.begin(), expect.end());
  CHECK(seen == expect);  // test folds partition the agreed set

  const FoldPlan other = make_folds(agreed, {}, 5, 43);
  bool any_difference = false;
  for (int f = 0; f < 5; ++f)
    any_difference = any_difference || other.folds[f].test != p1.folds[f].test;
  CHECK(any_difference);
}

TEST_CASE("noisy articles leak out of their test fold") {
  std::vector<std::string> agreed = {"a0", "a1", "a2", "a3"};
  std::vector<std::string> noisy = {"a1", "n7"};
  const FoldPlan plan = make_folds(agreed, noisy, 2, 7);
  for (const auto& fold : plan.folds) {
    for (const auto& id : fold.noisy) {
      CHECK(std::find(fold.test.begin(), fold.test.end(), id) ==
            fold.test.end());
    }
    CHECK(std::find(fold.noisy.begin(), fold.noisy.end(), "n7") !=
          fold.noisy.end());
  }
}

TEST_CASE("make_folds validates inputs") {
  CHECK_THROWS_AS(make_folds({}, {}, 2, 0), Error);
  CHECK_THROWS_AS(make_folds({"a"}, {}, 2, 0), Error);
  CHECK_THROWS_AS(make_folds({"a", "b", "c"}, {}, 1, 0), Error);
}

// ---------------------------------------------------------------------------
// Gold assembly

TEST_CASE("assemble_gold separates agreed and noisy annotations") {
  std::vector<AnnotationSet> anns;
  AnnotationSet a1;
  a1.article_id = "a1";
  a1.annotator_id = "c1";
  a1.article_type = "macro";
  a1.econ_conditions = "good";
  a1.econ_direction = "better";
  a1.quantities.push_back({"a1#q0", "macro", "jobs", "positive"});
  AnnotationSet a1b = a1;
  a1b.annotator_id = "c2";
  AnnotationSet a2 = a1;
  a2.article_id = "a2";
  a2.annotator_id = "c1";
  a2.quantities[0].quantity_id = "a2#q0";
  AnnotationSet a2b = a2;
  a2b.annotator_id = "c2";
  a2b.econ_conditions = "fair";  // disagreement
  AnnotationSet a3 = a1;
  a3.article_id = "a3";
  a3.quantities.clear();  // single annotator
  anns = {a1, a1b, a2, a2b, a3};

  std::map<std::string, std::string> pubs = {
      {"a1", "p1"}, {"a2", "p2"}, {"a3", "p1"}};

  const GoldAssembly all =
      assemble_gold(anns, pubs, NoisyMode::all_annotations);
  REQUIRE(all.agreed.size() == 1);
  CHECK(all.agreed[0].article_id == "a1");
  CHECK(all.agreed[0].publisher == "p1");
  CHECK(all.noisy.size() == 3);  // a2 twice + a3 once

  const GoldAssembly first =
      assemble_gold(anns, pubs, NoisyMode::first_annotation);
  CHECK(first.noisy.size() == 2);  // a2 once (c1 wins) + a3
  CHECK(first.noisy[0].gold.econ_conditions == "good");
}

// ---------------------------------------------------------------------------
// Ablation harness

namespace {

// Tiny planted evaluation set: gold labels plus gold-injected priors with a
// couple of corrupted entries the rules can repair.
struct Fixture {
  std::vector<EvalArticle> agreed;
  PriorSet priors;
};

Fixture make_fixture() {
  Fixture fx;
  Rng rng(77);
  for (int i = 0; i < 12; ++i) {
    EvalArticle ea;
    ea.article_id = "a" + std::to_string(i);
    ea.publisher = i % 2 ? "p-one" : "p-two";
    const bool good = i % 2 == 0;
    ea.gold.article_id = ea.article_id;
    ea.gold.article_type = "macro";
    ea.gold.econ_conditions = good ? "good" : "fair";
    ea.gold.econ_direction = good ? "better" : "same";
    for (int q = 0; q < 3; ++q) {
      const std::string qid = ea.article_id + "#q" + std::to_string(q);
      ea.quantity_ids.push_back(qid);
      ea.gold.quantities.push_back(
          {qid, "macro", "jobs", good ? "positive" : "neutral"});
    }
    fx.agreed.push_back(ea);
  }
  std::vector<FrameRecord> gold;
  for (const auto& ea : fx.agreed) gold.push_back(ea.gold);
  fx.priors = gold_priors(gold, 0.3);
  return fx;
}

}  // namespace

TEST_CASE("priors-only ablation equals discretized priors") {
  const Fixture fx = make_fixture();
  const FoldPlan plan = make_folds(
      [&] {
        std::vector<std::string> ids;
        for (const auto& ea : fx.agreed) ids.push_back(ea.article_id);
        return ids;
      }(),
      {}, 3, 5);

  HarnessConfig config;
  config.learn.epochs = 3;
  const std::vector<RuleMask> masks = {RuleMask{}, RuleMask::parse("r1,r2,r5")};
  const auto rows = run_ablation(fx.agreed, {}, fx.priors, plan, masks, config);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].mask_label == "priors_only");
  CHECK(rows[1].mask_label == "r1+r2+r5");

  // Priors-only predictions must equal the argmax of the priors. With
  // eps=0.3 gold injection that argmax is the gold label, so predictions
  // match gold exactly: weighted F1 is 1 and macro F1 equals the score of a
  // perfect predictor (unused labels still average in at zero).
  std::map<std::string, const EvalArticle*> by_id;
  for (const auto& ea : fx.agreed) by_id[ea.article_id] = &ea;
  for (int t = 0; t < kNumTasks; ++t) {
    CHECK(rows[0].avg_weighted_f1[t] == doctest::Approx(1.0));
    double expected_macro = 0.0;
    for (const auto& fold : plan.folds) {
      std::vector<PredictionOutcome> perfect;
      for (const auto& id : fold.test)
        perfect.push_back({*by_id.at(id), by_id.at(id)->gold});
      std::vector<int> g, p;
      collect_pairs(perfect, kAllTasks[t], nullptr, g, p);
      expected_macro += f1_scores(g, p, kAllTasks[t]).macro_f1;
    }
    expected_macro /= plan.folds.size();
    CHECK(rows[0].avg_macro_f1[t] ==
          doctest::Approx(expected_macro).epsilon(1e-12));
  }

  const auto rows_again =
      run_ablation(fx.agreed, {}, fx.priors, plan, masks, config);
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (int t = 0; t < kNumTasks; ++t)
      CHECK(rows[r].avg_macro_f1[t] ==
            doctest::Approx(rows_again[r].avg_macro_f1[t]).epsilon(1e-12));
}

TEST_CASE("zero-weight rules reproduce the priors-only row exactly") {
  const Fixture fx = make_fixture();
  const FoldPlan plan = make_folds(
      [&] {
        std::vector<std::string> ids;
        for (const auto& ea : fx.agreed) ids.push_back(ea.article_id);
        return ids;
      }(),
      {}, 3, 5);

  HarnessConfig zeroed;
  zeroed.init_weight = 0.0;
  zeroed.learn.epochs = 0;  // keep the forced-zero weights
  const std::vector<RuleMask> masks = {RuleMask{},
                                       RuleMask::parse("r3,r4,r5")};
  const auto rows =
      run_ablation(fx.agreed, {}, fx.priors, plan, masks, zeroed);
  REQUIRE(rows.size() == 2);
  for (int t = 0; t < kNumTasks; ++t) {
    CHECK(rows[1].avg_macro_f1[t] ==
          doctest::Approx(rows[0].avg_macro_f1[t]).epsilon(1e-12));
    CHECK(rows[1].avg_weighted_f1[t] ==
          doctest::Approx(rows[0].avg_weighted_f1[t]).epsilon(1e-12));
  }
}

TEST_CASE("per-publisher report groups outcomes") {
  const Fixture fx = make_fixture();
  std::vector<PredictionOutcome> outcomes;
  for (const auto& ea : fx.agreed) outcomes.push_back({ea, ea.gold});
  const auto report = per_publisher_macro_f1(outcomes);
  REQUIRE(report.size() == 2);
  for (const auto& [pub, scores] : report) {
    for (int t = 0; t < kNumTasks; ++t) {
      std::vector<int> g, p;
      collect_pairs(outcomes, kAllTasks[t], &pub, g, p);
      CHECK(scores[t] ==
            doctest::Approx(f1_scores(g, p, kAllTasks[t]).macro_f1));
    }
  }
}

TEST_CASE("report CSV formats are stable") {
  const TaskMetrics m = f1_scores({0, 1, 1}, {0, 1, 0}, Task::polarity);
  const std::string csv = metrics_to_csv(m);
  CHECK(csv.find("task,label,precision,recall,f1,support") == 0);
  CHECK(csv.find("macro_avg") != std::string::npos);
  CHECK(csv.find("weighted_avg") != std::string::npos);
  const std::string conf = confusion_to_csv(m);
  CHECK(conf.find("positive") != std::string::npos);

  AblationRow row;
  row.mask_label = "r1+r2";
  const std::string ab = ablation_to_csv({row});
  CHECK(ab.find("rules,macro_f1_article_type") == 0);
  CHECK(ab.find("r1+r2") != std::string::npos);
}
