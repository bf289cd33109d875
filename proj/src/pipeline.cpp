#include "econoframe/pipeline.hpp"

#include <thread>

#include <json.hpp>

#include "econoframe/util.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace econoframe {

int default_workers() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
#endif
}

void run_indexed_serial(std::size_t n,
                        const std::function<void(std::size_t)>& fn) {
  for (std::size_t i = 0; i < n; ++i) fn(i);
}

void run_indexed_parallel(std::size_t n, int workers,
                          const std::function<void(std::size_t)>& fn) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, workers))
  for (std::size_t i = 0; i < n; ++i) fn(i);
#else
  (void)workers;
  run_indexed_serial(n, fn);
#endif
}

void run_indexed(std::size_t n, int workers,
                 const std::function<void(std::size_t)>& fn) {
  if (workers <= 1) {
    run_indexed_serial(n, fn);
  } else {
    run_indexed_parallel(n, workers, fn);
  }
}

std::vector<char> filter_flags(const std::vector<Article>& articles,
                               const Lexicon& lexicon, int workers) {
  std::vector<char> flags(articles.size(), 0);
  run_indexed(articles.size(), workers, [&](std::size_t i) {
    flags[i] = is_economic(articles[i], lexicon) ? 1 : 0;
  });
  return flags;
}

std::vector<Article> filter_economic(const std::vector<Article>& articles,
                                     const Lexicon& lexicon, int workers) {
  const std::vector<char> flags = filter_flags(articles, lexicon, workers);
  std::vector<Article> out;
  for (std::size_t i = 0; i < articles.size(); ++i)
    if (flags[i]) out.push_back(articles[i]);
  return out;
}

std::vector<std::vector<QuantityMention>> extract_batch(
    const std::vector<Article>& articles, int workers) {
  std::vector<std::vector<QuantityMention>> out(articles.size());
  run_indexed(articles.size(), workers,
              [&](std::size_t i) { out[i] = extract_quantities(articles[i]); });
  return out;
}

std::vector<ArticleInference> infer_batch(
    const std::vector<Article>& articles,
    const std::vector<std::vector<QuantityMention>>& mentions,
    const PriorSet& priors, const RuleWeights& weights,
    const InferOptions& options) {
  if (articles.size() != mentions.size())
    throw Error("infer_batch: articles and mention lists differ in length");

  std::vector<ArticleInference> out(articles.size());
  std::vector<std::string> errors(articles.size());
  run_indexed(articles.size(), options.workers, [&](std::size_t i) {
    try {
      std::vector<std::string> qids;
      qids.reserve(mentions[i].size());
      for (const auto& m : mentions[i]) qids.push_back(m.quantity_id);
      GroundedMRF mrf = ground(articles[i].id, qids, priors, weights,
                               options.mask, options.grounding);
      const MapResult sol = map_infer(mrf, options.solve);
      out[i].record = discretize(mrf, sol.values, options.mask);
      for (const auto& g : mrf.groups) {
        GroupAssignment ga;
        ga.entity_id = g.entity_id;
        ga.task = g.task;
        ga.values.assign(sol.values.begin() + g.offset,
                         sol.values.begin() + g.offset + g.size);
        int best = 0;
        for (int l = 1; l < g.size; ++l)
          if (ga.values[l] > ga.values[best]) best = l;
        ga.argmax = label_set(g.task)[best];
        out[i].assignments.push_back(std::move(ga));
      }
      out[i].objective = sol.objective;
      out[i].residual = sol.residual;
      out[i].iterations = sol.iterations;
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  for (std::size_t i = 0; i < articles.size(); ++i)
    if (!errors[i].empty())
      throw Error("article " + articles[i].id + ": " + errors[i]);
  return out;
}

PriorSet model_priors(const std::vector<Article>& articles,
                      const std::vector<std::vector<QuantityMention>>& mentions,
                      const std::vector<BowModel>& models,
                      const BowConfig& config, int workers) {
  if (articles.size() != mentions.size())
    throw Error("model_priors: articles and mention lists differ in length");
  const BowModel* by_task[kNumTasks] = {};
  for (const auto& m : models) by_task[static_cast<int>(m.task)] = &m;
  for (Task t : kAllTasks)
    if (!by_task[static_cast<int>(t)])
      throw Error("model_priors: no model for task " + task_name(t));

  std::vector<std::vector<LabelDistribution>> per_article(articles.size());
  run_indexed(articles.size(), workers, [&](std::size_t i) {
    const Article& a = articles[i];
    const std::string text = article_prior_text(a);
    for (Task t : {Task::article_type, Task::econ_conditions,
                   Task::econ_direction}) {
      per_article[i].push_back(
          predict_prior(*by_task[static_cast<int>(t)], text, config, a.id));
    }
    for (const auto& m : mentions[i]) {
      const std::string qtext = quantity_prior_text(m.context, m.surface);
      for (Task t : {Task::quantity_type, Task::indicator, Task::polarity}) {
        per_article[i].push_back(predict_prior(*by_task[static_cast<int>(t)],
                                               qtext, config, m.quantity_id));
      }
    }
  });

  PriorSet set;
  for (auto& dists : per_article)
    for (auto& d : dists) set.add(std::move(d));
  return set;
}

std::string frame_record_to_json(const ArticleInference& inf) {
  nlohmann::ordered_json obj;
  obj["article_id"] = inf.record.article_id;
  obj["article_type"] = inf.record.article_type;
  obj["econ_conditions"] = inf.record.econ_conditions;
  obj["econ_direction"] = inf.record.econ_direction;
  nlohmann::ordered_json quantities = nlohmann::ordered_json::array();
  for (const auto& q : inf.record.quantities) {
    nlohmann::ordered_json qj;
    qj["quantity_id"] = q.quantity_id;
    qj["qtype"] = q.qtype;
    qj["indicator"] = q.indicator;
    qj["polarity"] = q.polarity;
    quantities.push_back(qj);
  }
  obj["quantities"] = quantities;
  obj["objective"] = inf.objective;
  obj["residual"] = inf.residual;
  obj["iterations"] = inf.iterations;
  return obj.dump();
}

std::string assignments_to_jsonl(const ArticleInference& inf) {
  std::string out;
  for (const auto& ga : inf.assignments) {
    nlohmann::ordered_json obj;
    obj["article_id"] = inf.record.article_id;
    obj["atom_group_id"] = ga.entity_id;
    obj["task"] = task_name(ga.task);
    obj["values"] = ga.values;
    obj["argmax"] = ga.argmax;
    out += obj.dump();
    out += "\n";
  }
  return out;
}

}  // namespace econoframe
