// Benchmark the OpenMP batch kernels against the serial reference on a
// synthetic corpus, verifying that both paths produce identical output.

#include <chrono>
#include <cstdio>
#include <string>

#include "econoframe/pipeline.hpp"
#include "econoframe/util.hpp"
#include "synthetic.hpp"

namespace ef = econoframe;

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

template <typename Fn>
double timed(Fn&& fn) {
  const auto start = std::chrono::steady_clock::now();
  fn();
  return seconds_since(start);
}

}  // namespace

int main(int argc, char** argv) {
  int n_articles = 400;
  if (argc > 1) n_articles = std::atoi(argv[1]);
  const int workers = ef::default_workers();

  ef::synth::SyntheticOptions options;
  options.n_articles = n_articles;
  options.seed = 12345;
  const auto corpus = ef::synth::make_synthetic(options);
  const ef::Lexicon lexicon =
      ef::load_lexicon(std::string(ECONOFRAME_DATA_DIR) + "/lexicon.txt");

  std::printf("corpus: %d articles, workers: %d\n", n_articles, workers);
  std::printf("%-22s %12s %12s %9s\n", "kernel", "serial (s)", "parallel (s)",
              "speedup");

  std::vector<char> flags_serial, flags_parallel;
  const double t_fs = timed([&] {
    flags_serial = ef::filter_flags(corpus.articles, lexicon, 1);
  });
  const double t_fp = timed([&] {
    flags_parallel = ef::filter_flags(corpus.articles, lexicon, workers);
  });
  std::printf("%-22s %12.3f %12.3f %8.2fx\n", "relevance_filter", t_fs, t_fp,
              t_fs / t_fp);
  if (flags_serial != flags_parallel) {
    std::fprintf(stderr, "relevance_filter outputs differ\n");
    return 1;
  }

  std::vector<std::vector<ef::QuantityMention>> mentions_serial,
      mentions_parallel;
  const double t_es = timed([&] {
    mentions_serial = ef::extract_batch(corpus.articles, 1);
  });
  const double t_ep = timed([&] {
    mentions_parallel = ef::extract_batch(corpus.articles, workers);
  });
  std::printf("%-22s %12.3f %12.3f %8.2fx\n", "quantity_extraction", t_es,
              t_ep, t_es / t_ep);

  ef::InferOptions serial_opts;
  serial_opts.mask = ef::RuleMask::parse("r1,r2,r3,r4,r5");
  serial_opts.workers = 1;
  ef::InferOptions parallel_opts = serial_opts;
  parallel_opts.workers = workers;
  const ef::RuleWeights weights =
      ef::RuleWeights::init(1.0, ef::WeightSharing::per_label);

  std::vector<ef::ArticleInference> inf_serial, inf_parallel;
  const double t_is = timed([&] {
    inf_serial = ef::infer_batch(corpus.articles, mentions_serial,
                                 corpus.priors, weights, serial_opts);
  });
  const double t_ip = timed([&] {
    inf_parallel = ef::infer_batch(corpus.articles, mentions_parallel,
                                   corpus.priors, weights, parallel_opts);
  });
  std::printf("%-22s %12.3f %12.3f %8.2fx\n", "map_inference", t_is, t_ip,
              t_is / t_ip);

  for (std::size_t i = 0; i < inf_serial.size(); ++i) {
    if (ef::frame_record_to_json(inf_serial[i]) !=
        ef::frame_record_to_json(inf_parallel[i])) {
      std::fprintf(stderr, "map_inference outputs differ at article %zu\n", i);
      return 1;
    }
  }
  std::printf("outputs identical across serial and parallel paths\n");
  return 0;
}
