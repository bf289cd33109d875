#include "econoframe/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "econoframe/util.hpp"

namespace econoframe {

FoldPlan make_folds(const std::vector<std::string>& agreed,
                    const std::vector<std::string>& noisy, int k,
                    std::uint64_t seed) {
  if (agreed.empty()) throw Error("make_folds: agreed set is empty");
  if (k < 2) throw Error("make_folds: k must be at least 2");
  if (static_cast<std::size_t>(k) > agreed.size())
    throw Error("make_folds: k=" + std::to_string(k) + " exceeds " +
                std::to_string(agreed.size()) + " agreed articles");

  std::vector<std::string> order = agreed;
  Rng rng(seed);
  rng.shuffle(order);

  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.folds.resize(k);

  // Chunk sizes differ by at most one.
  const std::size_t n = order.size();
  std::size_t start = 0;
  for (int f = 0; f < k; ++f) {
    const std::size_t size = n / k + (static_cast<std::size_t>(f) < n % k ? 1 : 0);
    plan.folds[f].test.assign(order.begin() + start,
                              order.begin() + start + size);
    start += size;
  }
  for (int f = 0; f < k; ++f) {
    for (int g = 0; g < k; ++g) {
      if (g == f) continue;
      plan.folds[f].train.insert(plan.folds[f].train.end(),
                                 plan.folds[g].test.begin(),
                                 plan.folds[g].test.end());
    }
    for (const auto& id : noisy) {
      const auto& test = plan.folds[f].test;
      if (std::find(test.begin(), test.end(), id) == test.end())
        plan.folds[f].noisy.push_back(id);
    }
  }
  return plan;
}

TaskMetrics f1_scores(const std::vector<int>& gold, const std::vector<int>& pred,
                      Task task) {
  if (gold.size() != pred.size())
    throw Error("f1_scores: gold and pred lengths differ");
  const int k = label_count(task);
  for (int g : gold)
    if (g < 0 || g >= k) throw Error("f1_scores: gold label outside set");
  for (int p : pred)
    if (p < 0 || p >= k) throw Error("f1_scores: pred label outside set");

  TaskMetrics m;
  m.task = task;
  m.total = static_cast<int>(gold.size());
  m.confusion.assign(k, std::vector<int>(k, 0));
  int correct = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    ++m.confusion[gold[i]][pred[i]];
    if (gold[i] == pred[i]) ++correct;
  }
  m.per_label.resize(k);
  double macro = 0.0, weighted = 0.0;
  for (int c = 0; c < k; ++c) {
    int tp = m.confusion[c][c];
    int gold_c = 0, pred_c = 0;
    for (int j = 0; j < k; ++j) {
      gold_c += m.confusion[c][j];
      pred_c += m.confusion[j][c];
    }
    LabelMetrics& lm = m.per_label[c];
    lm.support = gold_c;
    lm.precision = pred_c > 0 ? static_cast<double>(tp) / pred_c : 0.0;
    lm.recall = gold_c > 0 ? static_cast<double>(tp) / gold_c : 0.0;
    lm.f1 = lm.precision + lm.recall > 0.0
                ? 2.0 * lm.precision * lm.recall / (lm.precision + lm.recall)
                : 0.0;
    macro += lm.f1;
    weighted += lm.f1 * gold_c;
  }
  m.macro_f1 = macro / k;
  m.weighted_f1 = m.total > 0 ? weighted / m.total : 0.0;
  m.accuracy = m.total > 0 ? static_cast<double>(correct) / m.total : 0.0;
  return m;
}

TaskMetrics f1_scores_labels(const std::vector<std::string>& gold,
                             const std::vector<std::string>& pred, Task task) {
  std::vector<int> g, p;
  g.reserve(gold.size());
  p.reserve(pred.size());
  for (const auto& s : gold) g.push_back(label_index(task, s));
  for (const auto& s : pred) p.push_back(label_index(task, s));
  return f1_scores(g, p, task);
}

double krippendorff_alpha(const std::vector<std::vector<int>>& items) {
  // Coincidence matrix over label values present in the data.
  std::map<int, std::map<int, double>> coincidence;
  std::map<int, double> totals;
  int usable = 0;
  for (const auto& labels : items) {
    const std::size_t m = labels.size();
    if (m < 2) continue;
    ++usable;
    const double unit = 1.0 / static_cast<double>(m - 1);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        if (i == j) continue;
        coincidence[labels[i]][labels[j]] += unit;
        totals[labels[i]] += unit;
      }
    }
  }
  if (usable < 2)
    throw Error("krippendorff_alpha: need at least two items with two or "
                "more annotations");

  double n = 0.0;
  for (const auto& [c, t] : totals) n += t;
  double disagree = 0.0;
  for (const auto& [c, row] : coincidence)
    for (const auto& [k, v] : row)
      if (c != k) disagree += v;
  double expected = 0.0;
  for (const auto& [c, tc] : totals)
    for (const auto& [k, tk] : totals)
      if (c != k) expected += tc * tk;
  if (expected <= 0.0)
    throw Error("krippendorff_alpha: no label variation across items");
  // alpha = 1 - D_o/D_e with D_o = disagree/n, D_e = expected/(n(n-1)).
  return 1.0 - disagree * (n - 1.0) / expected;
}

double krippendorff_alpha_labels(
    const std::vector<std::vector<std::string>>& items, Task task) {
  std::vector<std::vector<int>> idx(items.size());
  for (std::size_t i = 0; i < items.size(); ++i)
    for (const auto& s : items[i]) idx[i].push_back(label_index(task, s));
  return krippendorff_alpha(idx);
}

GoldAssembly assemble_gold(
    const std::vector<AnnotationSet>& annotations,
    const std::map<std::string, std::string>& publisher_by_article,
    NoisyMode mode) {
  // Group annotations per article in file order.
  std::vector<std::string> article_order;
  std::map<std::string, std::vector<const AnnotationSet*>> by_article;
  for (const auto& ann : annotations) {
    auto [it, inserted] = by_article.try_emplace(ann.article_id);
    if (inserted) article_order.push_back(ann.article_id);
    it->second.push_back(&ann);
  }

  auto to_eval = [&](const AnnotationSet& ann) {
    EvalArticle ea;
    ea.article_id = ann.article_id;
    auto pub = publisher_by_article.find(ann.article_id);
    ea.publisher = pub == publisher_by_article.end() ? "" : pub->second;
    ea.gold.article_id = ann.article_id;
    ea.gold.article_type = ann.article_type;
    ea.gold.econ_conditions = ann.econ_conditions;
    ea.gold.econ_direction = ann.econ_direction;
    for (const auto& q : ann.quantities) {
      ea.quantity_ids.push_back(q.quantity_id);
      ea.gold.quantities.push_back({q.quantity_id, q.qtype, q.indicator,
                                    q.polarity});
    }
    return ea;
  };

  auto identical = [](const AnnotationSet& a, const AnnotationSet& b) {
    if (a.article_type != b.article_type ||
        a.econ_conditions != b.econ_conditions ||
        a.econ_direction != b.econ_direction ||
        a.quantities.size() != b.quantities.size())
      return false;
    for (std::size_t i = 0; i < a.quantities.size(); ++i) {
      const auto& qa = a.quantities[i];
      const auto& qb = b.quantities[i];
      if (qa.quantity_id != qb.quantity_id || qa.qtype != qb.qtype ||
          qa.indicator != qb.indicator || qa.polarity != qb.polarity)
        return false;
    }
    return true;
  };

  GoldAssembly out;
  for (const auto& id : article_order) {
    const auto& group = by_article.at(id);
    bool agreed = group.size() >= 2;
    for (std::size_t i = 1; agreed && i < group.size(); ++i)
      agreed = identical(*group[0], *group[i]);
    if (agreed) {
      out.agreed.push_back(to_eval(*group[0]));
    } else if (mode == NoisyMode::first_annotation) {
      out.noisy.push_back(to_eval(*group[0]));
    } else {
      for (const auto* ann : group) out.noisy.push_back(to_eval(*ann));
    }
  }
  return out;
}

FoldRun run_fold(const std::vector<EvalArticle>& train,
                 const std::vector<EvalArticle>& test, const PriorSet& priors,
                 const RuleMask& mask, const HarnessConfig& config) {
  FoldRun run;
  run.weights = RuleWeights::init(config.init_weight, config.sharing);

  if (mask.any_soft() && !train.empty()) {
    std::vector<LearnExample> examples;
    examples.reserve(train.size());
    for (const auto& ea : train) {
      LearnExample ex;
      ex.mrf = ground(ea.article_id, ea.quantity_ids, priors, run.weights,
                      mask, config.grounding);
      ex.gold = ea.gold;
      examples.push_back(std::move(ex));
    }
    LearnHyperparams hyper = config.learn;
    hyper.workers = config.workers;
    hyper.solve = config.solve;
    run.weights = learn_weights(examples, run.weights, hyper).weights;
  }

  for (const auto& ea : test) {
    GroundedMRF mrf = ground(ea.article_id, ea.quantity_ids, priors,
                             run.weights, mask, config.grounding);
    const MapResult sol = map_infer(mrf, config.solve);
    run.outcomes.push_back({ea, discretize(mrf, sol.values, mask)});
  }
  return run;
}

void collect_pairs(const std::vector<PredictionOutcome>& outcomes, Task task,
                   const std::string* publisher, std::vector<int>& gold,
                   std::vector<int>& pred) {
  for (const auto& oc : outcomes) {
    if (publisher && oc.article.publisher != *publisher) continue;
    const FrameRecord& g = oc.article.gold;
    const FrameRecord& p = oc.pred;
    if (is_article_task(task)) {
      const std::string& gl = task == Task::article_type ? g.article_type
                              : task == Task::econ_conditions
                                  ? g.econ_conditions
                                  : g.econ_direction;
      const std::string& pl = task == Task::article_type ? p.article_type
                              : task == Task::econ_conditions
                                  ? p.econ_conditions
                                  : p.econ_direction;
      gold.push_back(label_index(task, gl));
      pred.push_back(label_index(task, pl));
    } else {
      for (const auto& gq : g.quantities) {
        const QuantityLabels* pq = p.find_quantity(gq.quantity_id);
        if (!pq) continue;
        const std::string& gl = task == Task::quantity_type ? gq.qtype
                                : task == Task::indicator   ? gq.indicator
                                                            : gq.polarity;
        const std::string& pl = task == Task::quantity_type ? pq->qtype
                                : task == Task::indicator   ? pq->indicator
                                                            : pq->polarity;
        gold.push_back(label_index(task, gl));
        pred.push_back(label_index(task, pl));
      }
    }
  }
}

std::vector<AblationRow> run_ablation(const std::vector<EvalArticle>& agreed,
                                      const std::vector<EvalArticle>& noisy,
                                      const PriorSet& priors,
                                      const FoldPlan& plan,
                                      const std::vector<RuleMask>& masks,
                                      const HarnessConfig& config) {
  std::map<std::string, const EvalArticle*> agreed_by_id;
  for (const auto& ea : agreed) agreed_by_id[ea.article_id] = &ea;

  std::vector<AblationRow> rows;
  for (const auto& mask : masks) {
    AblationRow row;
    row.mask_label = mask.label();
    std::array<double, kNumTasks> macro_sum{};
    std::array<double, kNumTasks> weighted_sum{};
    std::array<int, kNumTasks> counted{};

    for (const auto& fold : plan.folds) {
      std::vector<EvalArticle> train, test;
      for (const auto& id : fold.train) {
        auto it = agreed_by_id.find(id);
        if (it == agreed_by_id.end())
          throw Error("run_ablation: unknown agreed article " + id);
        train.push_back(*it->second);
      }
      for (const auto& id : fold.test) test.push_back(*agreed_by_id.at(id));
      for (const auto& ea : noisy) {
        if (std::find(fold.noisy.begin(), fold.noisy.end(), ea.article_id) !=
            fold.noisy.end())
          train.push_back(ea);
      }

      const FoldRun run = run_fold(train, test, priors, mask, config);
      for (int t = 0; t < kNumTasks; ++t) {
        std::vector<int> g, p;
        collect_pairs(run.outcomes, kAllTasks[t], nullptr, g, p);
        if (g.empty()) continue;
        const TaskMetrics m = f1_scores(g, p, kAllTasks[t]);
        macro_sum[t] += m.macro_f1;
        weighted_sum[t] += m.weighted_f1;
        ++counted[t];
      }
    }
    for (int t = 0; t < kNumTasks; ++t) {
      row.avg_macro_f1[t] = counted[t] ? macro_sum[t] / counted[t] : 0.0;
      row.avg_weighted_f1[t] = counted[t] ? weighted_sum[t] / counted[t] : 0.0;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::map<std::string, std::array<double, kNumTasks>> per_publisher_macro_f1(
    const std::vector<PredictionOutcome>& outcomes) {
  std::map<std::string, std::array<double, kNumTasks>> out;
  std::vector<std::string> publishers;
  for (const auto& oc : outcomes) {
    if (!out.count(oc.article.publisher)) {
      out[oc.article.publisher] = {};
      publishers.push_back(oc.article.publisher);
    }
  }
  for (const auto& pub : publishers) {
    for (int t = 0; t < kNumTasks; ++t) {
      std::vector<int> g, p;
      collect_pairs(outcomes, kAllTasks[t], &pub, g, p);
      out[pub][t] = g.empty() ? 0.0 : f1_scores(g, p, kAllTasks[t]).macro_f1;
    }
  }
  return out;
}

std::string metrics_to_csv(const TaskMetrics& m) {
  std::ostringstream ss;
  ss << "task,label,precision,recall,f1,support\n";
  const auto& labels = label_set(m.task);
  for (std::size_t c = 0; c < m.per_label.size(); ++c) {
    const auto& lm = m.per_label[c];
    ss << task_name(m.task) << "," << labels[c] << "," << fmt_double(lm.precision)
       << "," << fmt_double(lm.recall) << "," << fmt_double(lm.f1) << ","
       << lm.support << "\n";
  }
  ss << task_name(m.task) << ",accuracy," << fmt_double(m.accuracy) << ","
     << fmt_double(m.accuracy) << "," << fmt_double(m.accuracy) << ","
     << m.total << "\n";
  ss << task_name(m.task) << ",macro_avg,,," << fmt_double(m.macro_f1) << ","
     << m.total << "\n";
  ss << task_name(m.task) << ",weighted_avg,,," << fmt_double(m.weighted_f1)
     << "," << m.total << "\n";
  return ss.str();
}

std::string confusion_to_csv(const TaskMetrics& m) {
  std::ostringstream ss;
  const auto& labels = label_set(m.task);
  ss << "gold\\pred";
  for (const auto& l : labels) ss << "," << l;
  ss << "\n";
  for (std::size_t g = 0; g < m.confusion.size(); ++g) {
    ss << labels[g];
    for (int v : m.confusion[g]) ss << "," << v;
    ss << "\n";
  }
  return ss.str();
}

std::string ablation_to_csv(const std::vector<AblationRow>& rows) {
  std::ostringstream ss;
  ss << "rules";
  for (int t = 0; t < kNumTasks; ++t) ss << ",macro_f1_" << task_name(kAllTasks[t]);
  for (int t = 0; t < kNumTasks; ++t)
    ss << ",weighted_f1_" << task_name(kAllTasks[t]);
  ss << "\n";
  for (const auto& row : rows) {
    ss << row.mask_label;
    for (int t = 0; t < kNumTasks; ++t) ss << "," << fmt_double(row.avg_macro_f1[t]);
    for (int t = 0; t < kNumTasks; ++t)
      ss << "," << fmt_double(row.avg_weighted_f1[t]);
    ss << "\n";
  }
  return ss.str();
}

std::string metrics_to_json(const std::vector<TaskMetrics>& all) {
  nlohmann::ordered_json root;
  for (const auto& m : all) {
    nlohmann::ordered_json obj;
    obj["macro_f1"] = m.macro_f1;
    obj["weighted_f1"] = m.weighted_f1;
    obj["accuracy"] = m.accuracy;
    obj["total"] = m.total;
    nlohmann::ordered_json per_label;
    const auto& labels = label_set(m.task);
    for (std::size_t c = 0; c < m.per_label.size(); ++c) {
      nlohmann::ordered_json lm;
      lm["precision"] = m.per_label[c].precision;
      lm["recall"] = m.per_label[c].recall;
      lm["f1"] = m.per_label[c].f1;
      lm["support"] = m.per_label[c].support;
      per_label[labels[c]] = lm;
    }
    obj["per_label"] = per_label;
    obj["confusion"] = m.confusion;
    root[task_name(m.task)] = obj;
  }
  return root.dump(2) + "\n";
}

}  // namespace econoframe
