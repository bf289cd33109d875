// econoframe: economic-news framing pipeline.
//
// Subcommands: ingest, filter, extract, train-priors, infer, learn-weights,
// eval, ablate, analyze. Every run is deterministic given its config and
// seed; outputs are written in article order regardless of worker count.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "econoframe/analysis.hpp"
#include "econoframe/corpus.hpp"
#include "econoframe/engine.hpp"
#include "econoframe/evaluation.hpp"
#include "econoframe/pipeline.hpp"
#include "econoframe/priors.hpp"
#include "econoframe/quantities.hpp"
#include "econoframe/relevance.hpp"
#include "econoframe/util.hpp"

namespace ef = econoframe;
namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

int log_level() {
  const char* env = std::getenv("ECONOFRAME_LOG");
  if (!env) return 1;
  const std::string v = ef::to_lower(env);
  if (v == "debug") return 2;
  if (v == "quiet" || v == "error") return 0;
  return 1;
}

void log_info(const std::string& msg) {
  if (log_level() >= 1) std::cerr << "econoframe: " << msg << "\n";
}

struct RunConfig {
  std::string corpus;
  std::string lexicon;
  std::string annotations;
  std::string priors;       // prior JSONL
  std::string models_dir;   // trained bow models
  std::string weights;      // rule-weight JSON
  std::string truth;        // ground-truth CSV
  std::string out_dir = "out";
  std::string rules = "r1,r2,r5";
  std::uint64_t seed = 1;
  int workers = 1;
  int folds = 5;
  int hinge_exponent = 1;
  std::string weight_sharing = "per_label";
  double init_weight = 1.0;
  double gold_prior_eps = 0.1;
  std::string noisy_mode = "all";
  std::vector<std::string> indicators = {"jobs", "prices+energy_prices"};
  std::vector<std::string> masks = {
      "",   "r1",       "r2",       "r3",       "r4",       "r5",
      "r1,r2", "r1,r2,r3", "r1,r2,r4", "r1,r2,r5", "r1,r2,r3,r4,r5"};
  ef::LearnHyperparams learn;
  ef::SolveOptions solve;
  ef::BowConfig bow;
  ef::BowHyperparams bow_hyper;
};

void apply_config_file(RunConfig& cfg, const std::string& path) {
  json obj;
  try {
    obj = json::parse(ef::read_file(path));
  } catch (const json::exception& e) {
    throw ef::Error(std::string("bad config file: ") + e.what());
  }
  auto get_str = [&](const char* key, std::string& out) {
    if (obj.contains(key)) out = obj[key].get<std::string>();
  };
  get_str("corpus", cfg.corpus);
  get_str("lexicon", cfg.lexicon);
  get_str("annotations", cfg.annotations);
  get_str("priors", cfg.priors);
  get_str("models_dir", cfg.models_dir);
  get_str("weights", cfg.weights);
  get_str("truth", cfg.truth);
  get_str("out_dir", cfg.out_dir);
  get_str("rules", cfg.rules);
  get_str("weight_sharing", cfg.weight_sharing);
  get_str("noisy_mode", cfg.noisy_mode);
  if (obj.contains("seed")) cfg.seed = obj["seed"].get<std::uint64_t>();
  if (obj.contains("workers")) cfg.workers = obj["workers"].get<int>();
  if (obj.contains("folds")) cfg.folds = obj["folds"].get<int>();
  if (obj.contains("hinge_exponent"))
    cfg.hinge_exponent = obj["hinge_exponent"].get<int>();
  if (obj.contains("init_weight"))
    cfg.init_weight = obj["init_weight"].get<double>();
  if (obj.contains("gold_prior_eps"))
    cfg.gold_prior_eps = obj["gold_prior_eps"].get<double>();
  if (obj.contains("indicators"))
    cfg.indicators = obj["indicators"].get<std::vector<std::string>>();
  if (obj.contains("masks"))
    cfg.masks = obj["masks"].get<std::vector<std::string>>();
  if (obj.contains("learn")) {
    const auto& l = obj["learn"];
    if (l.contains("step")) cfg.learn.step = l["step"].get<double>();
    if (l.contains("step_decay"))
      cfg.learn.step_decay = l["step_decay"].get<double>();
    if (l.contains("epochs")) cfg.learn.epochs = l["epochs"].get<int>();
  }
  if (obj.contains("solve")) {
    const auto& s = obj["solve"];
    if (s.contains("tol")) cfg.solve.tol = s["tol"].get<double>();
    if (s.contains("max_iter")) cfg.solve.max_iter = s["max_iter"].get<int>();
  }
  if (obj.contains("bow")) {
    const auto& b = obj["bow"];
    if (b.contains("dim")) cfg.bow.dim = b["dim"].get<std::uint32_t>();
    if (b.contains("learning_rate"))
      cfg.bow_hyper.learning_rate = b["learning_rate"].get<double>();
    if (b.contains("epochs")) cfg.bow_hyper.epochs = b["epochs"].get<int>();
    if (b.contains("l2")) cfg.bow_hyper.l2 = b["l2"].get<double>();
    if (b.contains("dev_fraction"))
      cfg.bow_hyper.dev_fraction = b["dev_fraction"].get<double>();
  }
}

ef::WeightSharing sharing_of(const RunConfig& cfg) {
  if (cfg.weight_sharing == "shared") return ef::WeightSharing::shared;
  if (cfg.weight_sharing == "per_label") return ef::WeightSharing::per_label;
  throw ef::Error("weight_sharing must be per_label or shared");
}

ef::GroundingConfig grounding_of(const RunConfig& cfg) {
  ef::GroundingConfig g;
  g.hinge_exponent = cfg.hinge_exponent;
  return g;
}

std::vector<ef::Article> load_corpus_checked(const RunConfig& cfg) {
  if (cfg.corpus.empty()) throw ef::Error("no corpus path configured");
  return ef::load_corpus(cfg.corpus);
}

ef::Lexicon load_lexicon_checked(const RunConfig& cfg) {
  if (cfg.lexicon.empty()) throw ef::Error("no lexicon path configured");
  return ef::load_lexicon(cfg.lexicon);
}

ef::RuleWeights load_weights_or_init(const RunConfig& cfg) {
  if (!cfg.weights.empty()) return ef::load_rule_weights(cfg.weights);
  return ef::RuleWeights::init(cfg.init_weight, sharing_of(cfg));
}

std::map<std::string, std::string> publisher_map(
    const std::vector<ef::Article>& articles) {
  std::map<std::string, std::string> out;
  for (const auto& a : articles) out[a.id] = a.publisher;
  return out;
}

// Gold FrameRecords from annotations for gold-prior generation and weight
// learning; "all" keeps one record per annotation, "first" keeps the first
// annotator per article.
std::vector<ef::FrameRecord> gold_records(const RunConfig& cfg,
                                          const std::vector<ef::AnnotationSet>&
                                              annotations) {
  std::vector<ef::FrameRecord> out;
  std::map<std::string, bool> seen;
  for (const auto& ann : annotations) {
    if (cfg.noisy_mode == "first" && seen[ann.article_id]) continue;
    seen[ann.article_id] = true;
    ef::FrameRecord rec;
    rec.article_id = ann.article_id;
    rec.article_type = ann.article_type;
    rec.econ_conditions = ann.econ_conditions;
    rec.econ_direction = ann.econ_direction;
    for (const auto& q : ann.quantities)
      rec.quantities.push_back({q.quantity_id, q.qtype, q.indicator,
                                q.polarity});
    out.push_back(std::move(rec));
  }
  return out;
}

ef::PriorSet resolve_priors(const RunConfig& cfg,
                            const std::vector<ef::Article>& articles,
                            const std::vector<std::vector<ef::QuantityMention>>&
                                mentions) {
  if (!cfg.priors.empty()) {
    ef::PriorSet set;
    for (auto& d : ef::load_prior_file(cfg.priors)) set.add(std::move(d));
    log_info("loaded priors from " + cfg.priors);
    return set;
  }
  if (!cfg.models_dir.empty()) {
    std::vector<ef::BowModel> models;
    for (ef::Task t : ef::kAllTasks) {
      const std::string path =
          cfg.models_dir + "/model_" + ef::task_name(t) + ".bin";
      models.push_back(ef::load_bow_model(path));
    }
    ef::BowConfig config;
    config.dim = models[0].dim;
    log_info("predicting priors from models in " + cfg.models_dir);
    return ef::model_priors(articles, mentions, models, config, cfg.workers);
  }
  if (!cfg.annotations.empty()) {
    log_info("gold-injection priors (eps=" + ef::fmt_double(cfg.gold_prior_eps) +
             ") from " + cfg.annotations);
    return ef::gold_priors(gold_records(cfg,
                                        ef::load_annotations(cfg.annotations)),
                           cfg.gold_prior_eps);
  }
  throw ef::Error("no prior source: set priors, models_dir, or annotations");
}

void ensure_out_dir(const RunConfig& cfg) {
  fs::create_directories(cfg.out_dir);
}

// ---------------------------------------------------------------------------

int cmd_ingest(const RunConfig& cfg) {
  ensure_out_dir(cfg);
  const auto raw = load_corpus_checked(cfg);
  const auto deduped = ef::dedupe(raw);
  ef::save_corpus(cfg.out_dir + "/corpus.jsonl", deduped);

  std::map<std::string, int> per_publisher;
  for (const auto& a : deduped) ++per_publisher[a.publisher];
  ordered_json summary;
  summary["input_articles"] = raw.size();
  summary["deduped_articles"] = deduped.size();
  summary["per_publisher"] = per_publisher;
  ef::write_file(cfg.out_dir + "/ingest_summary.json", summary.dump(2) + "\n");
  log_info("ingested " + std::to_string(deduped.size()) + "/" +
           std::to_string(raw.size()) + " articles");
  return 0;
}

int cmd_filter(const RunConfig& cfg) {
  ensure_out_dir(cfg);
  const auto articles = load_corpus_checked(cfg);
  const auto lexicon = load_lexicon_checked(cfg);
  const auto flags = ef::filter_flags(articles, lexicon, cfg.workers);

  std::vector<ef::Article> kept;
  std::map<std::string, std::pair<int, int>> per_publisher;  // total, econ
  for (std::size_t i = 0; i < articles.size(); ++i) {
    auto& cell = per_publisher[articles[i].publisher];
    ++cell.first;
    if (flags[i]) {
      ++cell.second;
      kept.push_back(articles[i]);
    }
  }
  ef::save_corpus(cfg.out_dir + "/filtered.jsonl", kept);

  std::ostringstream csv;
  csv << "publisher,articles,economic\n";
  for (const auto& [pub, counts] : per_publisher)
    csv << pub << "," << counts.first << "," << counts.second << "\n";
  ef::write_file(cfg.out_dir + "/filter_summary.csv", csv.str());
  std::cout << kept.size() << "/" << articles.size() << " economic\n";
  return 0;
}

int cmd_extract(const RunConfig& cfg) {
  ensure_out_dir(cfg);
  const auto articles = load_corpus_checked(cfg);
  const auto mentions = ef::extract_batch(articles, cfg.workers);
  std::ostringstream out;
  std::size_t total = 0;
  for (const auto& per_article : mentions) {
    for (const auto& m : per_article) {
      out << ef::quantity_to_json(m) << "\n";
      ++total;
    }
  }
  ef::write_file(cfg.out_dir + "/quantities.jsonl", out.str());
  log_info("extracted " + std::to_string(total) + " quantity mentions");
  return 0;
}

int cmd_train_priors(const RunConfig& cfg) {
  ensure_out_dir(cfg);
  if (cfg.annotations.empty()) throw ef::Error("train-priors needs annotations");
  const auto articles = load_corpus_checked(cfg);
  const auto annotations = ef::load_annotations(cfg.annotations);
  const auto mentions = ef::extract_batch(articles, cfg.workers);

  std::map<std::string, std::size_t> article_index;
  for (std::size_t i = 0; i < articles.size(); ++i)
    article_index[articles[i].id] = i;
  std::map<std::string, const ef::QuantityMention*> mention_by_id;
  for (const auto& per_article : mentions)
    for (const auto& m : per_article) mention_by_id[m.quantity_id] = &m;

  ef::BowHyperparams hyper = cfg.bow_hyper;
  hyper.seed = cfg.seed;
  std::vector<ef::BowModel> models;
  for (ef::Task t : ef::kAllTasks) {
    std::vector<std::pair<std::string, std::string>> examples;
    for (const auto& ann : annotations) {
      auto it = article_index.find(ann.article_id);
      if (it == article_index.end())
        throw ef::Error("annotation references unknown article " +
                        ann.article_id);
      if (ef::is_article_task(t)) {
        const std::string& label = t == ef::Task::article_type
                                       ? ann.article_type
                                       : t == ef::Task::econ_conditions
                                             ? ann.econ_conditions
                                             : ann.econ_direction;
        examples.push_back(
            {ef::article_prior_text(articles[it->second]), label});
      } else {
        for (const auto& q : ann.quantities) {
          auto mit = mention_by_id.find(q.quantity_id);
          if (mit == mention_by_id.end())
            throw ef::Error("annotation references unknown quantity " +
                            q.quantity_id);
          const std::string& label = t == ef::Task::quantity_type
                                         ? q.qtype
                                         : t == ef::Task::indicator
                                               ? q.indicator
                                               : q.polarity;
          examples.push_back(
              {ef::quantity_prior_text(mit->second->context,
                                       mit->second->surface),
               label});
        }
      }
    }
    log_info("training " + ef::task_name(t) + " on " +
             std::to_string(examples.size()) + " examples");
    const auto result = ef::train_bow(examples, t, cfg.bow, hyper);
    ef::save_bow_model(cfg.out_dir + "/model_" + ef::task_name(t) + ".bin",
                       result.model);
    models.push_back(result.model);
  }

  const ef::PriorSet priors =
      ef::model_priors(articles, mentions, models, cfg.bow, cfg.workers);
  ef::save_prior_file(cfg.out_dir + "/priors.jsonl", priors.all());
  return 0;
}

int cmd_infer(const RunConfig& cfg) {
  ensure_out_dir(cfg);
  const auto articles = load_corpus_checked(cfg);
  const auto mentions = ef::extract_batch(articles, cfg.workers);
  const ef::PriorSet priors = resolve_priors(cfg, articles, mentions);
  const ef::RuleWeights weights = load_weights_or_init(cfg);

  ef::InferOptions options;
  options.mask = ef::RuleMask::parse(cfg.rules);
  options.grounding = grounding_of(cfg);
  options.solve = cfg.solve;
  options.workers = cfg.workers;
  const auto results =
      ef::infer_batch(articles, mentions, priors, weights, options);

  std::ostringstream out, assignments;
  for (const auto& r : results) {
    out << ef::frame_record_to_json(r) << "\n";
    assignments << ef::assignments_to_jsonl(r);
  }
  ef::write_file(cfg.out_dir + "/frames.jsonl", out.str());
  ef::write_file(cfg.out_dir + "/assignments.jsonl", assignments.str());
  log_info("inferred frames for " + std::to_string(results.size()) +
           " articles (rules " + options.mask.label() + ")");
  return 0;
}

int cmd_learn_weights(const RunConfig& cfg) {
  ensure_out_dir(cfg);
  if (cfg.annotations.empty())
    throw ef::Error("learn-weights needs annotations");
  const auto articles = load_corpus_checked(cfg);
  const auto mentions = ef::extract_batch(articles, cfg.workers);
  const ef::PriorSet priors = resolve_priors(cfg, articles, mentions);
  const auto annotations = ef::load_annotations(cfg.annotations);
  const auto gold = gold_records(cfg, annotations);

  const ef::RuleMask mask = ef::RuleMask::parse(cfg.rules);
  const ef::RuleWeights init =
      ef::RuleWeights::init(cfg.init_weight, sharing_of(cfg));
  std::vector<ef::LearnExample> train;
  for (const auto& rec : gold) {
    std::vector<std::string> qids;
    for (const auto& q : rec.quantities) qids.push_back(q.quantity_id);
    ef::LearnExample ex;
    ex.mrf = ef::ground(rec.article_id, qids, priors, init, mask,
                        grounding_of(cfg));
    ex.gold = rec;
    train.push_back(std::move(ex));
  }
  ef::LearnHyperparams hyper = cfg.learn;
  hyper.seed = cfg.seed;
  hyper.workers = cfg.workers;
  hyper.solve = cfg.solve;
  const ef::LearnResult result = ef::learn_weights(train, init, hyper);
  ef::save_rule_weights(cfg.out_dir + "/weights.json", result.weights);

  std::ostringstream trace;
  trace << "epoch,total_map_distance\n";
  for (std::size_t e = 0; e < result.epoch_map_distance.size(); ++e)
    trace << e << "," << ef::fmt_double(result.epoch_map_distance[e]) << "\n";
  ef::write_file(cfg.out_dir + "/learn_trace.csv", trace.str());
  return 0;
}

ef::HarnessConfig harness_of(const RunConfig& cfg) {
  ef::HarnessConfig h;
  h.grounding = grounding_of(cfg);
  h.sharing = sharing_of(cfg);
  h.init_weight = cfg.init_weight;
  h.learn = cfg.learn;
  h.learn.seed = cfg.seed;
  h.solve = cfg.solve;
  h.workers = cfg.workers;
  return h;
}

int cmd_eval(const RunConfig& cfg) {
  ensure_out_dir(cfg);
  if (cfg.annotations.empty()) throw ef::Error("eval needs annotations");
  const auto articles = load_corpus_checked(cfg);
  const auto mentions = ef::extract_batch(articles, cfg.workers);
  const ef::PriorSet priors = resolve_priors(cfg, articles, mentions);
  const auto annotations = ef::load_annotations(cfg.annotations);

  const ef::GoldAssembly gold = ef::assemble_gold(
      annotations, publisher_map(articles),
      cfg.noisy_mode == "first" ? ef::NoisyMode::first_annotation
                                : ef::NoisyMode::all_annotations);
  if (gold.agreed.empty()) throw ef::Error("no cross-annotated agreed articles");
  std::vector<std::string> agreed_ids, noisy_ids;
  for (const auto& ea : gold.agreed) agreed_ids.push_back(ea.article_id);
  for (const auto& ea : gold.noisy) noisy_ids.push_back(ea.article_id);
  const ef::FoldPlan plan =
      ef::make_folds(agreed_ids, noisy_ids, cfg.folds, cfg.seed);

  const ef::RuleMask mask = ef::RuleMask::parse(cfg.rules);
  const ef::HarnessConfig harness = harness_of(cfg);

  std::map<std::string, const ef::EvalArticle*> agreed_by_id;
  for (const auto& ea : gold.agreed) agreed_by_id[ea.article_id] = &ea;
  std::vector<ef::PredictionOutcome> outcomes;
  for (const auto& fold : plan.folds) {
    std::vector<ef::EvalArticle> train, test;
    for (const auto& id : fold.train) train.push_back(*agreed_by_id.at(id));
    for (const auto& id : fold.test) test.push_back(*agreed_by_id.at(id));
    for (const auto& ea : gold.noisy)
      if (std::find(fold.noisy.begin(), fold.noisy.end(), ea.article_id) !=
          fold.noisy.end())
        train.push_back(ea);
    const ef::FoldRun run = ef::run_fold(train, test, priors, mask, harness);
    outcomes.insert(outcomes.end(), run.outcomes.begin(), run.outcomes.end());
  }

  std::vector<ef::TaskMetrics> all;
  std::ostringstream per_task_csv;
  for (ef::Task t : ef::kAllTasks) {
    std::vector<int> g, p;
    ef::collect_pairs(outcomes, t, nullptr, g, p);
    if (g.empty()) continue;
    const ef::TaskMetrics m = ef::f1_scores(g, p, t);
    all.push_back(m);
    per_task_csv << ef::metrics_to_csv(m);
    ef::write_file(cfg.out_dir + "/confusion_" + ef::task_name(t) + ".csv",
                   ef::confusion_to_csv(m));
  }
  ef::write_file(cfg.out_dir + "/metrics.csv", per_task_csv.str());
  ef::write_file(cfg.out_dir + "/metrics.json", ef::metrics_to_json(all));

  const auto per_pub = ef::per_publisher_macro_f1(outcomes);
  std::ostringstream pub_csv;
  pub_csv << "publisher";
  for (ef::Task t : ef::kAllTasks) pub_csv << ",macro_f1_" << ef::task_name(t);
  pub_csv << "\n";
  for (const auto& [pub, scores] : per_pub) {
    pub_csv << pub;
    for (double s : scores) pub_csv << "," << ef::fmt_double(s);
    pub_csv << "\n";
  }
  ef::write_file(cfg.out_dir + "/per_publisher.csv", pub_csv.str());

  // Inter-annotator agreement per task over the raw annotations.
  std::ostringstream alpha_csv;
  alpha_csv << "task,krippendorff_alpha\n";
  for (ef::Task t : ef::kAllTasks) {
    std::map<std::string, std::vector<std::string>> items;
    for (const auto& ann : annotations) {
      if (ef::is_article_task(t)) {
        const std::string& label = t == ef::Task::article_type
                                       ? ann.article_type
                                       : t == ef::Task::econ_conditions
                                             ? ann.econ_conditions
                                             : ann.econ_direction;
        items[ann.article_id].push_back(label);
      } else {
        for (const auto& q : ann.quantities) {
          const std::string& label = t == ef::Task::quantity_type
                                         ? q.qtype
                                         : t == ef::Task::indicator
                                               ? q.indicator
                                               : q.polarity;
          items[q.quantity_id].push_back(label);
        }
      }
    }
    std::vector<std::vector<std::string>> lists;
    for (auto& [id, labels] : items) lists.push_back(labels);
    try {
      alpha_csv << ef::task_name(t) << ","
                << ef::fmt_double(ef::krippendorff_alpha_labels(lists, t))
                << "\n";
    } catch (const ef::Error&) {
      alpha_csv << ef::task_name(t) << ",\n";
    }
  }
  ef::write_file(cfg.out_dir + "/agreement.csv", alpha_csv.str());
  return 0;
}

int cmd_ablate(const RunConfig& cfg) {
  ensure_out_dir(cfg);
  if (cfg.annotations.empty()) throw ef::Error("ablate needs annotations");
  const auto articles = load_corpus_checked(cfg);
  const auto mentions = ef::extract_batch(articles, cfg.workers);
  const ef::PriorSet priors = resolve_priors(cfg, articles, mentions);
  const auto annotations = ef::load_annotations(cfg.annotations);

  const ef::GoldAssembly gold = ef::assemble_gold(
      annotations, publisher_map(articles),
      cfg.noisy_mode == "first" ? ef::NoisyMode::first_annotation
                                : ef::NoisyMode::all_annotations);
  if (gold.agreed.empty()) throw ef::Error("no cross-annotated agreed articles");
  std::vector<std::string> agreed_ids, noisy_ids;
  for (const auto& ea : gold.agreed) agreed_ids.push_back(ea.article_id);
  for (const auto& ea : gold.noisy) noisy_ids.push_back(ea.article_id);
  const ef::FoldPlan plan =
      ef::make_folds(agreed_ids, noisy_ids, cfg.folds, cfg.seed);

  std::vector<ef::RuleMask> masks;
  for (const auto& m : cfg.masks) masks.push_back(ef::RuleMask::parse(m));
  const auto rows = ef::run_ablation(gold.agreed, gold.noisy, priors, plan,
                                     masks, harness_of(cfg));
  ef::write_file(cfg.out_dir + "/ablation.csv", ef::ablation_to_csv(rows));
  log_info("wrote ablation table with " + std::to_string(rows.size()) +
           " rows");
  return 0;
}

int cmd_analyze(const RunConfig& cfg, const std::string& frames_path) {
  ensure_out_dir(cfg);
  const auto articles = load_corpus_checked(cfg);
  if (frames_path.empty()) throw ef::Error("analyze needs --frames");

  std::vector<ef::FrameRecord> records;
  {
    std::ifstream in(frames_path);
    if (!in) throw ef::Error("cannot open frames file: " + frames_path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (ef::trim(line).empty()) continue;
      json obj;
      try {
        obj = json::parse(line);
      } catch (const json::exception& e) {
        throw ef::Error("frames line " + std::to_string(line_no) + ": " +
                        e.what());
      }
      ef::FrameRecord rec;
      rec.article_id = obj.at("article_id").get<std::string>();
      rec.article_type = obj.at("article_type").get<std::string>();
      rec.econ_conditions = obj.at("econ_conditions").get<std::string>();
      rec.econ_direction = obj.at("econ_direction").get<std::string>();
      for (const auto& q : obj.at("quantities"))
        rec.quantities.push_back({q.at("quantity_id").get<std::string>(),
                                  q.at("qtype").get<std::string>(),
                                  q.at("indicator").get<std::string>(),
                                  q.at("polarity").get<std::string>()});
      records.push_back(std::move(rec));
    }
  }

  std::vector<ef::IndicatorFrame> frames;
  for (const auto& selector_text : cfg.indicators) {
    const ef::IndicatorSelector selector = ef::IndicatorSelector::parse(selector_text);
    for (const auto& rec : records) {
      if (auto frame = ef::assign_indicator_frame(rec, selector))
        frames.push_back(*frame);
    }
  }
  auto rows = ef::aggregate_quarterly(frames, articles);
  ef::fill_coverage_share(rows, articles);
  std::vector<ef::TruthPoint> truth;
  if (!cfg.truth.empty()) truth = ef::load_truth_csv(cfg.truth);
  ef::write_file(cfg.out_dir + "/analysis.csv",
                 ef::analysis_to_csv(rows, truth));
  log_info("analysis rows: " + std::to_string(rows.size()));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"economic-news framing pipeline"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string config_path;
  std::string frames_path;

  app.add_option("--config", config_path, "JSON config file");
  // Flag overrides win over the config file.
  std::optional<std::string> corpus, lexicon, annotations, priors, models_dir,
      weights, truth, out_dir, rules, noisy_mode;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers, folds;
  std::optional<double> gold_eps;
  app.add_option("--corpus", corpus, "corpus JSONL");
  app.add_option("--lexicon", lexicon, "lexicon file");
  app.add_option("--annotations", annotations, "annotation JSONL");
  app.add_option("--priors", priors, "prior JSONL");
  app.add_option("--models", models_dir, "directory with trained bow models");
  app.add_option("--weights", weights, "rule-weight JSON");
  app.add_option("--truth", truth, "ground-truth CSV");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--rules", rules, "rule mask, e.g. r1,r2,r5");
  app.add_option("--seed", seed, "random seed");
  app.add_option("--workers", workers, "worker threads (default 1)");
  app.add_option("--folds", folds, "cross-validation folds");
  app.add_option("--gold-prior-eps", gold_eps,
                 "noise for gold-injection priors");
  app.add_option("--noisy-mode", noisy_mode, "all | first");

  auto* ingest = app.add_subcommand("ingest", "validate + dedupe a corpus");
  auto* filter = app.add_subcommand("filter", "relevance-filter a corpus");
  auto* extract = app.add_subcommand("extract", "extract quantity mentions");
  auto* train_priors =
      app.add_subcommand("train-priors", "train bag-of-words prior models");
  auto* infer = app.add_subcommand("infer", "grounded MAP inference");
  auto* learn =
      app.add_subcommand("learn-weights", "learn soft-rule weights");
  auto* eval = app.add_subcommand("eval", "cross-validated evaluation");
  auto* ablate = app.add_subcommand("ablate", "rule-mask ablation table");
  auto* analyze = app.add_subcommand("analyze", "quarterly framing series");
  analyze->add_option("--frames", frames_path, "frames JSONL from infer");

  CLI11_PARSE(app, argc, argv);

  try {
    if (!config_path.empty()) apply_config_file(cfg, config_path);
    if (corpus) cfg.corpus = *corpus;
    if (lexicon) cfg.lexicon = *lexicon;
    if (annotations) cfg.annotations = *annotations;
    if (priors) cfg.priors = *priors;
    if (models_dir) cfg.models_dir = *models_dir;
    if (weights) cfg.weights = *weights;
    if (truth) cfg.truth = *truth;
    if (out_dir) cfg.out_dir = *out_dir;
    if (rules) cfg.rules = *rules;
    if (seed) cfg.seed = *seed;
    if (workers) cfg.workers = *workers;
    if (folds) cfg.folds = *folds;
    if (gold_eps) cfg.gold_prior_eps = *gold_eps;
    if (noisy_mode) cfg.noisy_mode = *noisy_mode;

    if (ingest->parsed()) return cmd_ingest(cfg);
    if (filter->parsed()) return cmd_filter(cfg);
    if (extract->parsed()) return cmd_extract(cfg);
    if (train_priors->parsed()) return cmd_train_priors(cfg);
    if (infer->parsed()) return cmd_infer(cfg);
    if (learn->parsed()) return cmd_learn_weights(cfg);
    if (eval->parsed()) return cmd_eval(cfg);
    if (ablate->parsed()) return cmd_ablate(cfg);
    if (analyze->parsed()) return cmd_analyze(cfg, frames_path);
    throw ef::Error("no subcommand");
  } catch (const std::exception& e) {
    ordered_json err;
    err["error"] = e.what();
    std::cerr << err.dump() << "\n";
    return 1;
  }
}
