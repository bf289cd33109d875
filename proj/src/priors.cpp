#include "econoframe/priors.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "econoframe/relevance.hpp"
#include "econoframe/util.hpp"

namespace econoframe {

void validate_distribution(const LabelDistribution& d) {
  const int expect = label_count(d.task);
  if (static_cast<int>(d.probs.size()) != expect)
    throw Error("distribution for " + task_name(d.task) + " has " +
                std::to_string(d.probs.size()) + " entries, expected " +
                std::to_string(expect));
  double sum = 0.0;
  for (double p : d.probs) {
    if (!(p >= 0.0)) throw Error("negative probability in distribution");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw Error("distribution sums to " + std::to_string(sum) + ", not 1");
}

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

SparseVec featurize(const std::string& text, const BowConfig& config) {
  const std::uint32_t mask = config.dim - 1;
  std::vector<std::string> tokens = tokenize(text);
  std::map<std::uint32_t, double> counts;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    counts[static_cast<std::uint32_t>(fnv1a(tokens[i])) & mask] += 1.0;
    if (i + 1 < tokens.size())
      counts[static_cast<std::uint32_t>(
                 fnv1a(tokens[i] + "\x1e" + tokens[i + 1])) &
             mask] += 1.0;
  }
  double norm2 = 0.0;
  for (const auto& [k, v] : counts) norm2 += v * v;
  const double inv = norm2 > 0 ? 1.0 / std::sqrt(norm2) : 0.0;
  SparseVec out;
  out.reserve(counts.size());
  for (const auto& [k, v] : counts) out.emplace_back(k, v * inv);
  return out;
}

namespace {

std::vector<double> softmax(std::vector<double> scores) {
  double mx = scores[0];
  for (double s : scores) mx = std::max(mx, s);
  double sum = 0.0;
  for (double& s : scores) {
    s = std::exp(s - mx);
    sum += s;
  }
  for (double& s : scores) s /= sum;
  return scores;
}

std::vector<double> raw_scores(const BowModel& m, const SparseVec& x) {
  std::vector<double> scores(m.bias);
  for (int c = 0; c < m.n_labels; ++c) {
    double acc = 0.0;
    for (const auto& [bucket, value] : x) acc += m.w(c, bucket) * value;
    scores[c] += acc;
  }
  return scores;
}

}  // namespace

std::vector<double> predict_probs(const BowModel& model, const SparseVec& x) {
  return softmax(raw_scores(model, x));
}

BowGradient bow_loss_gradient(const BowModel& model,
                              const std::vector<BowExample>& examples,
                              double l2) {
  BowGradient g;
  g.weight_grad.assign(model.weights.size(), 0.0);
  g.bias_grad.assign(model.bias.size(), 0.0);
  const double inv_n = 1.0 / static_cast<double>(examples.size());
  for (const auto& ex : examples) {
    std::vector<double> p = predict_probs(model, ex.features);
    g.loss -= std::log(std::max(p[ex.label], 1e-300)) * inv_n;
    for (int c = 0; c < model.n_labels; ++c) {
      const double delta = (p[c] - (c == ex.label ? 1.0 : 0.0)) * inv_n;
      g.bias_grad[c] += delta;
      for (const auto& [bucket, value] : ex.features)
        g.weight_grad[static_cast<std::size_t>(c) * model.dim + bucket] +=
            delta * value;
    }
  }
  double w2 = 0.0;
  for (std::size_t i = 0; i < model.weights.size(); ++i) {
    g.weight_grad[i] += l2 * model.weights[i];
    w2 += model.weights[i] * model.weights[i];
  }
  g.loss += 0.5 * l2 * w2;
  return g;
}

namespace {

double macro_f1_simple(const std::vector<int>& gold, const std::vector<int>& pred,
                       int n_labels) {
  std::vector<int> tp(n_labels, 0), fp(n_labels, 0), fn(n_labels, 0);
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i] == pred[i]) {
      ++tp[gold[i]];
    } else {
      ++fp[pred[i]];
      ++fn[gold[i]];
    }
  }
  double sum = 0.0;
  for (int c = 0; c < n_labels; ++c) {
    const double denom = 2.0 * tp[c] + fp[c] + fn[c];
    sum += denom > 0 ? 2.0 * tp[c] / denom : 0.0;
  }
  return sum / n_labels;
}

}  // namespace

BowTrainResult train_bow(
    const std::vector<std::pair<std::string, std::string>>& text_label_examples,
    Task task, const BowConfig& config, const BowHyperparams& hyper) {
  if (text_label_examples.empty()) throw Error("train_bow: empty training set");
  if ((config.dim & (config.dim - 1)) != 0 || config.dim == 0)
    throw Error("train_bow: dim must be a power of two");

  std::vector<BowExample> all;
  all.reserve(text_label_examples.size());
  for (const auto& [text, label] : text_label_examples) {
    BowExample ex;
    ex.features = featurize(text, config);
    ex.label = label_index(task, label);
    all.push_back(std::move(ex));
  }

  // Optional dev split for model selection across epochs.
  std::vector<BowExample> train = all, dev;
  if (hyper.dev_fraction > 0.0 && all.size() >= 10) {
    std::vector<std::size_t> order(all.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(hyper.seed);
    rng.shuffle(order);
    const std::size_t n_dev = std::max<std::size_t>(
        1, static_cast<std::size_t>(hyper.dev_fraction * all.size()));
    train.clear();
    for (std::size_t i = 0; i < order.size(); ++i) {
      (i < n_dev ? dev : train).push_back(all[order[i]]);
    }
  }

  BowModel model;
  model.task = task;
  model.dim = config.dim;
  model.n_labels = label_count(task);
  model.weights.assign(static_cast<std::size_t>(model.n_labels) * model.dim,
                       0.0);
  model.bias.assign(model.n_labels, 0.0);

  BowTrainResult result;
  BowModel best = model;
  double best_dev = -1.0;
  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    BowGradient g = bow_loss_gradient(model, train, hyper.l2);
    for (std::size_t i = 0; i < model.weights.size(); ++i)
      model.weights[i] -= hyper.learning_rate * g.weight_grad[i];
    for (std::size_t i = 0; i < model.bias.size(); ++i)
      model.bias[i] -= hyper.learning_rate * g.bias_grad[i];
    result.loss_trace.push_back(
        bow_loss_gradient(model, train, hyper.l2).loss);

    if (!dev.empty()) {
      std::vector<int> gold, pred;
      for (const auto& ex : dev) {
        gold.push_back(ex.label);
        const auto p = predict_probs(model, ex.features);
        pred.push_back(static_cast<int>(
            std::max_element(p.begin(), p.end()) - p.begin()));
      }
      const double f1 = macro_f1_simple(gold, pred, model.n_labels);
      if (f1 > best_dev) {
        best_dev = f1;
        best = model;
      }
    }
  }
  result.model = dev.empty() ? std::move(model) : std::move(best);
  return result;
}

LabelDistribution predict_prior(const BowModel& model, const std::string& text,
                                const BowConfig& config,
                                const std::string& atom_group_id) {
  LabelDistribution d;
  d.atom_group_id = atom_group_id;
  d.task = model.task;
  d.probs = predict_probs(model, featurize(text, config));
  return d;
}

namespace {

constexpr char kModelMagic[4] = {'E', 'F', 'B', 'M'};
constexpr std::uint32_t kModelVersion = 1;

template <typename T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T take(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw Error("truncated model file");
  T v;
  std::memcpy(&v, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

}  // namespace

void save_bow_model(const std::string& path, const BowModel& model) {
  static_assert(std::endian::native == std::endian::little,
                "model format is little-endian");
  std::string out;
  out.append(kModelMagic, 4);
  put<std::uint32_t>(out, kModelVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(model.task));
  put<std::uint32_t>(out, model.dim);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(model.n_labels));
  for (double b : model.bias) put<double>(out, b);
  for (double w : model.weights) put<double>(out, w);
  write_file(path, out);
}

BowModel load_bow_model(const std::string& path) {
  const std::string in = read_file(path);
  if (in.size() < 4 || std::memcmp(in.data(), kModelMagic, 4) != 0)
    throw Error("not a model file: " + path);
  std::size_t pos = 4;
  const auto version = take<std::uint32_t>(in, pos);
  if (version != kModelVersion)
    throw Error("unsupported model version " + std::to_string(version));
  BowModel m;
  m.task = static_cast<Task>(take<std::uint32_t>(in, pos));
  m.dim = take<std::uint32_t>(in, pos);
  m.n_labels = static_cast<int>(take<std::uint32_t>(in, pos));
  if (m.n_labels != label_count(m.task))
    throw Error("model label count mismatch in " + path);
  m.bias.resize(m.n_labels);
  for (double& b : m.bias) b = take<double>(in, pos);
  m.weights.resize(static_cast<std::size_t>(m.n_labels) * m.dim);
  for (double& w : m.weights) w = take<double>(in, pos);
  if (pos != in.size()) throw Error("trailing bytes in model file: " + path);
  return m;
}

std::string article_prior_text(const Article& a) {
  return a.headline + "\n" + a.body;
}

std::string quantity_prior_text(const std::string& context,
                                const std::string& surface) {
  return context + " qsurface " + surface;
}

void PriorSet::add(LabelDistribution d) {
  validate_distribution(d);
  probs_[{d.atom_group_id, static_cast<int>(d.task)}] = std::move(d.probs);
}

const std::vector<double>* PriorSet::find(const std::string& entity_id,
                                          Task task) const {
  auto it = probs_.find({entity_id, static_cast<int>(task)});
  return it == probs_.end() ? nullptr : &it->second;
}

const std::vector<double>& PriorSet::require(const std::string& entity_id,
                                             Task task) const {
  const auto* p = find(entity_id, task);
  if (!p)
    throw Error("missing prior for " + entity_id + "/" + task_name(task));
  return *p;
}

std::vector<LabelDistribution> PriorSet::all() const {
  std::vector<LabelDistribution> out;
  out.reserve(probs_.size());
  for (const auto& [key, probs] : probs_) {
    LabelDistribution d;
    d.atom_group_id = key.first;
    d.task = static_cast<Task>(key.second);
    d.probs = probs;
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<LabelDistribution> load_prior_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open prior file: " + path);
  std::vector<LabelDistribution> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error("malformed JSON at line " + std::to_string(line_no) + ": " +
                  e.what());
    }
    LabelDistribution d;
    if (!obj.contains("atom_group_id") || !obj.contains("task") ||
        !obj.contains("probs"))
      throw Error("prior line " + std::to_string(line_no) +
                  " needs atom_group_id, task, probs");
    d.atom_group_id = obj["atom_group_id"].get<std::string>();
    d.task = task_from_name(obj["task"].get<std::string>());
    d.probs = obj["probs"].get<std::vector<double>>();
    if (static_cast<int>(d.probs.size()) != label_count(d.task))
      throw Error("prior line " + std::to_string(line_no) + ": expected " +
                  std::to_string(label_count(d.task)) + " probs for " +
                  task_name(d.task) + ", got " +
                  std::to_string(d.probs.size()));
    double sum = 0.0;
    for (double p : d.probs) {
      if (!(p >= 0.0))
        throw Error("prior line " + std::to_string(line_no) +
                    ": negative probability");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-6)
      throw Error("prior line " + std::to_string(line_no) + ": probs sum to " +
                  std::to_string(sum) + ", not 1");
    for (double& p : d.probs) p /= sum;
    out.push_back(std::move(d));
  }
  return out;
}

void save_prior_file(const std::string& path,
                     const std::vector<LabelDistribution>& dists) {
  std::ostringstream ss;
  for (const auto& d : dists) {
    nlohmann::ordered_json obj;
    obj["atom_group_id"] = d.atom_group_id;
    obj["task"] = task_name(d.task);
    obj["probs"] = d.probs;
    ss << obj.dump() << "\n";
  }
  write_file(path, ss.str());
}

std::vector<double> gold_prior_probs(Task task, const std::string& gold_label,
                                     double eps) {
  const int k = label_count(task);
  const int gold = label_index(task, gold_label);
  std::vector<double> probs(k, k > 1 ? eps / (k - 1) : 0.0);
  probs[gold] = k > 1 ? 1.0 - eps : 1.0;
  return probs;
}

PriorSet gold_priors(const std::vector<FrameRecord>& gold, double eps) {
  PriorSet set;
  for (const auto& rec : gold) {
    auto put = [&](const std::string& id, Task t, const std::string& lbl) {
      LabelDistribution d;
      d.atom_group_id = id;
      d.task = t;
      d.probs = gold_prior_probs(t, lbl, eps);
      set.add(std::move(d));
    };
    put(rec.article_id, Task::article_type, rec.article_type);
    put(rec.article_id, Task::econ_conditions, rec.econ_conditions);
    put(rec.article_id, Task::econ_direction, rec.econ_direction);
    for (const auto& q : rec.quantities) {
      put(q.quantity_id, Task::quantity_type, q.qtype);
      put(q.quantity_id, Task::indicator, q.indicator);
      put(q.quantity_id, Task::polarity, q.polarity);
    }
  }
  return set;
}

}  // namespace econoframe
