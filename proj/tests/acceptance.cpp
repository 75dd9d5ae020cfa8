// Runs the fourteen acceptance checks and prints one PASS/FAIL line each.
// Usage: acceptance [criterion ...]

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "chunk_cases.hpp"
#include "support.hpp"
#include "tweetner/cli.hpp"
#include "tweetner/ensemble.hpp"
#include "tweetner/pipeline.hpp"

namespace fs = std::filesystem;
using namespace tweetner;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Same generator for criteria 1 and 2: n <= 6, L <= 5.
std::vector<support::CrfInstance> small_instances() {
  Rng rng(20240601);
  std::vector<support::CrfInstance> out;
  for (int k = 0; k < 200; ++k) {
    const std::size_t n = 1 + rng.uniform_int(6);
    const std::size_t L = 1 + rng.uniform_int(5);
    out.push_back(support::random_crf(rng, n, L, 4, 1.0));
  }
  return out;
}

Outcome viterbi_exactness() {
  const auto t0 = Clock::now();
  std::size_t path_fail = 0;
  double worst = 0.0;
  for (const auto& inst : small_instances()) {
    const auto got = viterbi(inst.model, inst.seq);
    const auto want = support::brute_argmax(inst.model, inst.seq);
    path_fail += got.path != want.path ? 1 : 0;
    worst = std::max(worst, std::abs(got.score - want.score));
  }
  const double secs = seconds_since(t0);
  return {path_fail == 0 && worst <= 1e-10 && secs < 10.0,
          fmt("200 instances, %zu path mismatches, max score error %.2e, %.2fs", path_fail, worst, secs)};
}

Outcome partition_exactness() {
  double worst = 0.0;
  for (const auto& inst : small_instances()) {
    const double got = log_partition(inst.model, inst.seq);
    const double want = support::brute_log_partition(inst.model, inst.seq);
    worst = std::max(worst, std::abs(got - want) / std::max(1.0, std::abs(want)));
  }
  return {worst <= 1e-8, fmt("200 instances, max relative error %.2e", worst)};
}

Outcome gradient_check() {
  Rng rng(77);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const std::size_t L = 2 + rng.uniform_int(3);
    auto inst = support::random_crf(rng, 1, L, 3, 0.5);
    inst.model.c1 = 0.0;
    inst.model.c2 = rng.uniform();
    const auto data = support::random_labeled(rng, inst.model, 4, 5);
    const auto analytic = nll_and_gradient(inst.model, data).gradient;
    const auto numeric = support::finite_difference_gradient(inst.model, data, 1e-5);
    for (std::size_t i = 0; i < analytic.size(); ++i) {
      const double scale = std::max({std::abs(analytic[i]), std::abs(numeric[i]), 1e-3});
      worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / scale);
    }
  }
  return {worst <= 1e-4, fmt("20 models, max relative deviation %.2e", worst)};
}

Outcome training_convergence() {
  const auto data = support::separable_dataset(200, 11);
  const auto t0 = Clock::now();
  const auto model = train_crf(data, TrainConfig{});
  const double secs = seconds_since(t0);
  const double acc = support::token_accuracy(model, data);
  return {acc >= 0.99 && secs < 60.0, fmt("token accuracy %.4f, %.2fs", acc, secs)};
}

Outcome elastic_net() {
  const auto data = support::sparse_noisy_dataset(100, 5);
  std::vector<std::size_t> zeros;
  std::string detail = "zeros at c1 0,1e-4,1e-2,1:";
  for (double c1 : {0.0, 1e-4, 1e-2, 1.0}) {
    TrainConfig cfg;
    cfg.c1 = c1;
    zeros.push_back(count_zero_weights(train_crf(data, cfg)));
    detail += " " + std::to_string(zeros.back());
  }
  const bool monotone = std::is_sorted(zeros.begin(), zeros.end());
  TrainConfig huge;
  huge.c1 = 1e3;
  const auto model = train_crf(data, huge);
  std::size_t nonzero_state = 0;
  for (std::size_t f = 0; f < model.num_features(); ++f)
    for (std::size_t y = 0; y < model.num_labels(); ++y) nonzero_state += model.state(f, y) != 0.0 ? 1 : 0;
  detail += "; nonzero state weights at c1=1e3: " + std::to_string(nonzero_state);
  return {monotone && nonzero_state == 0, detail};
}

Outcome f_measure() {
  const double micro = f1_score(0.7365, 0.4906);
  const double person = f1_score(0.767, 0.618);
  return {std::abs(micro - 0.5889) <= 1e-4 && std::abs(person - 0.684) <= 5e-4,
          fmt("F1(0.7365,0.4906)=%.5f, F1(0.767,0.618)=%.5f", micro, person)};
}

Outcome chunker() {
  std::size_t bad = 0;
  const auto& cases = support::chunk_cases();
  for (const auto& c : cases) bad += extract_chunks(c.labels) != c.chunks ? 1 : 0;
  return {bad == 0 && cases.size() == 30, fmt("%zu sentences, %zu mismatches", cases.size(), bad)};
}

Outcome eq2_assembly() {
  std::size_t bad = 0, checked = 0;
  EmbeddingParams p;
  p.dim = 6;
  p.bucket_count = 97;
  p.min_ngram = 3;
  p.max_ngram = 5;
  auto model = init_embedding_model(Vocab({{"paris", 3}, {"lyon", 2}, {"a", 1}}), p, 3);
  Rng rng(9);
  for (auto* mat : {&model.word_input, &model.ngram_input}) {
    for (auto& x : mat->data()) x = static_cast<float>(rng.normal());
  }
  // Independent assembly: u_w (if known) then each u_g in n-gram order.
  auto oracle = [&](const std::string& w) {
    std::vector<float> h(p.dim, 0.0f);
    if (auto id = model.vocab.find(w)) {
      for (std::size_t k = 0; k < p.dim; ++k) h[k] = model.word_input(*id, k);
    }
    for (const auto& g : extract_ngrams(w, p.min_ngram, p.max_ngram)) {
      const auto b = hash_ngram(g, p.bucket_count);
      for (std::size_t k = 0; k < p.dim; ++k) h[k] += model.ngram_input(b, k);
    }
    return h;
  };
  for (const std::string w : {"paris", "lyon", "a", "marseille", "é", "zz"}) {
    ++checked;
    bad += model.word_vector(w) != oracle(w) ? 1 : 0;
  }
  // Empty n-gram set: in-vocabulary word whose padded form is shorter than min_n.
  EmbeddingParams q = p;
  q.min_ngram = 4;
  q.max_ngram = 4;
  auto short_model = init_embedding_model(Vocab({{"a", 2}, {"b", 1}}), q, 4);
  ++checked;
  const auto u_a = short_model.word_input.row(*short_model.vocab.find("a"));
  bad += extract_ngrams("a", 4, 4).empty() && short_model.word_vector("a") == std::vector<float>(u_a.begin(), u_a.end())
             ? 0
             : 1;
  // OOV with zeroed buckets gives the zero vector.
  std::fill(short_model.ngram_input.data().begin(), short_model.ngram_input.data().end(), 0.0f);
  ++checked;
  bad += short_model.word_vector("inconnu") == std::vector<float>(q.dim, 0.0f) ? 0 : 1;
  // Basis vectors: u_w = e1 and the two n-grams of "ab" = e2, e3.
  EmbeddingParams r;
  r.dim = 3;
  r.bucket_count = 1000;
  r.min_ngram = 3;
  r.max_ngram = 3;
  auto basis = init_embedding_model(Vocab({{"ab", 1}, {"cd", 1}}), r, 1);
  std::fill(basis.word_input.data().begin(), basis.word_input.data().end(), 0.0f);
  std::fill(basis.ngram_input.data().begin(), basis.ngram_input.data().end(), 0.0f);
  const auto grams = extract_ngrams("ab", 3, 3);
  const auto b0 = hash_ngram(grams.at(0), 1000), b1 = hash_ngram(grams.at(1), 1000);
  basis.word_input(0, 0) = 1.0f;
  basis.ngram_input(b0, 1) = 1.0f;
  basis.ngram_input(b1, 2) = 1.0f;
  ++checked;
  bad += b0 != b1 && basis.word_vector("ab") == std::vector<float>{1.0f, 1.0f, 1.0f} ? 0 : 1;
  return {bad == 0, fmt("%zu constructed cases, %zu mismatches", checked, bad)};
}

Outcome embedding_quality() {
  const auto t0 = Clock::now();
  EmbeddingParams p;
  p.dim = 10;
  p.epochs = 50;
  p.min_count = 1;
  p.learning_rate = 0.05;
  p.subsample_threshold = 1e-3;
  p.bucket_count = 50000;
  int topic_ok = 0, stem_ok = 0;
  double worst_sep = 1e9;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto topics = train_skipgram(support::two_topic_corpus(400, 1000 + seed), p, seed);
    const double sep = support::topic_separation(topics);
    worst_sep = std::min(worst_sep, sep);
    topic_ok += sep >= 0.2 ? 1 : 0;

    auto q = p;
    q.dim = 20;
    const auto stems = support::stem_corpus(100, 5000 + seed);
    const auto model = train_skipgram(stems.corpus, q, seed);
    stem_ok += support::mean_cosine(model, stems.stem_pairs) > support::mean_cosine(model, stems.random_pairs) ? 1 : 0;
  }
  const double secs = seconds_since(t0);
  return {topic_ok >= 18 && stem_ok >= 16 && secs < 120.0,
          fmt("topic gap >= 0.2 for %d/20 seeds (min %.3f), stem pairs closer for %d/20, %.1fs", topic_ok, worst_sep,
              stem_ok, secs)};
}

Outcome gmm_checks() {
  Rng rng(31);
  std::size_t monotone_fail = 0;
  double worst_sum = 0.0;
  for (int k = 0; k < 50; ++k) {
    const std::size_t n = 20 + rng.uniform_int(80), d = 1 + rng.uniform_int(4), K = 1 + rng.uniform_int(5);
    Points x(n, d);
    for (auto& v : x.data()) v = rng.normal() * 3.0 + (rng.bernoulli(0.5) ? 4.0 : 0.0);
    GmmOptions opt;
    opt.components = K;
    opt.tol = 0.0;
    opt.max_iter = 60;
    const auto fit = fit_gmm(x, opt, 100 + k);
    for (std::size_t t = 1; t < fit.trace.size(); ++t) {
      if (fit.trace[t] - fit.trace[t - 1] < -1e-9) ++monotone_fail;
    }
    for (std::size_t i = 0; i < n; ++i) {
      const auto post = posterior(fit.model, x.row(i));
      double s = 0.0;
      for (double v : post) s += v;
      worst_sum = std::max(worst_sum, std::abs(s - 1.0));
    }
  }
  std::vector<std::size_t> truth;
  const auto blobs = support::two_blobs(500, 5, 8, truth);
  GmmOptions two;
  two.components = 2;
  const auto fit = fit_gmm(blobs, two, 1);
  std::vector<std::size_t> hard;
  for (std::size_t i = 0; i < blobs.rows(); ++i) hard.push_back(assign(fit.model, blobs.row(i)));
  const double ari = support::adjusted_rand_index(truth, hard);
  return {monotone_fail == 0 && worst_sum <= 1e-12 && ari >= 0.99,
          fmt("50 datasets, %zu likelihood decreases, max |sum-1| %.1e, two-blob ARI %.4f", monotone_fail, worst_sum,
              ari)};
}

Outcome voting() {
  Rng rng(2024);
  const std::vector<std::vector<std::string>> pool{
      {"O", "O", "O"}, {"B-per", "O", "O"}, {"B-per", "I-per", "O"}, {"O", "B-loc", "O"}, {"O", "O", "B-org"}};
  std::size_t majority_fail = 0, tie_fail = 0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 1 + rng.uniform_int(11);
    const auto winner = rng.uniform_int(pool.size());
    const std::size_t need = n / 2 + 1;
    std::vector<std::vector<std::string>> votes;
    for (std::size_t i = 0; i < need; ++i) votes.push_back(pool[winner]);
    while (votes.size() < n) votes.push_back(pool[rng.uniform_int(pool.size())]);
    for (std::size_t i = votes.size(); i > 1; --i) std::swap(votes[i - 1], votes[rng.uniform_int(i)]);
    majority_fail += vote(votes) != pool[winner] ? 1 : 0;
  }
  for (int t = 0; t < 200; ++t) {
    // Two sequences with equal counts: the one voted first must win.
    const auto a = rng.uniform_int(pool.size());
    const auto b = (a + 1 + rng.uniform_int(pool.size() - 1)) % pool.size();
    const std::size_t each = 1 + rng.uniform_int(4);
    std::vector<std::vector<std::string>> votes;
    for (std::size_t i = 0; i < each; ++i) {
      votes.push_back(pool[a]);
      votes.push_back(pool[b]);
    }
    for (std::size_t i = votes.size(); i > 1; --i) std::swap(votes[i - 1], votes[rng.uniform_int(i)]);
    const auto first = votes.front();
    tie_fail += vote(votes) != first || vote(votes) != vote(votes) ? 1 : 0;
  }
  std::size_t identity_fail = 0;
  for (const auto& s : pool) {
    const std::vector<std::vector<std::string>> single{s};
    identity_fail += vote(single) != s ? 1 : 0;
  }
  return {majority_fail + tie_fail + identity_fail == 0,
          fmt("1000 majority sets (%zu wrong), 200 ties (%zu wrong), N=1 identity (%zu wrong)", majority_fail,
              tie_fail, identity_fail)};
}

int cli(std::vector<std::string> args, std::string* out = nullptr) {
  args.insert(args.begin(), "tweetner");
  std::ostringstream o, e;
  const int code = cli::run(args, o, e);
  if (out) *out = o.str();
  if (code != 0) std::cerr << "  [" << args[1] << " exit " << code << "] " << e.str();
  return code;
}

const fs::path kToy = TWEETNER_TOY_DIR;

// The toy pipeline with small models; returns false when a stage fails.
bool run_stages(const fs::path& dir, std::string& grid_out) {
  const auto p = [&](const char* name) { return (dir / name).string(); };
  const std::vector<std::string> emb{"--dim", "16", "--epochs", "2", "--min-count", "2", "--buckets", "20000",
                                     "--threads", "1", "--seed", "5"};
  auto with = [](std::vector<std::string> a, const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
  };
  return cli({"preprocess", "--in", (kToy / "corpus.txt").string(), "--out", p("pre.txt"), "--seed", "3"}) == 0 &&
         cli(with({"embed-train", "--corpus", p("pre.txt"), "--out", p("word.sgns")}, emb)) == 0 &&
         cli({"gmm-fit", "--embeddings", p("word.sgns"), "--words", (kToy / "train.iob").string(), "--k", "8",
              "--seed", "5", "--out", p("clusters.gmm")}) == 0 &&
         cli({"train", "--data", (kToy / "train.iob").string(), "--model", p("model.crf"), "--embeddings",
              p("word.sgns"), "--gmm", p("clusters.gmm"), "--max-iter", "40", "--threads", "1"}) == 0 &&
         cli({"tag", "--model", p("model.crf"), "--in", (kToy / "test.iob").string(), "--out", p("pred.iob"),
              "--threads", "1"}) == 0 &&
         cli(with({"ensemble-train", "--n", "2", "--data", (kToy / "train.iob").string(), "--corpus", p("pre.txt"),
                   "--out-dir", p("ensemble"), "--sent-dim", "8", "--gmm-dim", "8", "--k", "4", "--max-iter", "20"},
                  emb)) == 0 &&
         cli({"ensemble-tag", "--models", p("ensemble"), "--in", (kToy / "test.iob").string(), "--out",
              p("ensemble_pred.iob"), "--threads", "1"}) == 0 &&
         cli({"gridsearch", "--data", (kToy / "train.iob").string(), "--c1", "1e-4,1e-2", "--c2", "0.3", "--folds",
              "3", "--max-iter", "15", "--seed", "5", "--threads", "1"},
             &grid_out) == 0;
}

Outcome reproducibility() {
  const auto dir = support::scratch_dir("repro");
  std::string grid1, grid2;
  if (!run_stages(dir, grid1)) return {false, "first run failed"};
  std::map<std::string, std::string> first;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) first[fs::relative(e.path(), dir).string()] = support::read_file(e.path());
  }
  if (!run_stages(dir, grid2)) return {false, "second run failed"};
  std::size_t differ = 0;
  for (const auto& [name, bytes] : first) differ += support::read_file(dir / name) != bytes ? 1 : 0;
  differ += grid1 != grid2 ? 1 : 0;
  return {differ == 0 && first.size() >= 15,
          fmt("%zu files plus gridsearch table compared, %zu differ", first.size(), differ)};
}

Outcome scale() {
  const auto train = support::synthetic_tweets(3000, 1);
  const auto test = support::synthetic_tweets(3688, 2);
  TokenizedCorpus corpus;
  for (const auto* set : {&train, &test}) {
    for (const auto& s : *set) corpus.push_back(s.words());
  }
  EmbeddingParams word;
  word.epochs = 1;
  word.min_count = 1;
  word.bucket_count = 200000;
  auto sentence = word;
  sentence.dim = 40;
  auto gmm_input = word;
  gmm_input.dim = 100;
  Pipeline p;
  p.pos.source = PosSource::None;
  p.word = train_skipgram(corpus, word, 1);
  p.sentence = train_skipgram(corpus, sentence, 2);
  p.gmm_input = train_skipgram(corpus, gmm_input, 3);
  GmmOptions gopt;
  gopt.max_iter = 20;
  p.gmm = fit_gmm(word_points(*p.gmm_input, unique_words(train, unique_words(test))), gopt, 4).model;

  const auto t0 = Clock::now();
  auto fit = fit_crf(build_problem(train, p.models(), p.features, p.pos), TrainConfig{});
  const double fit_secs = seconds_since(t0);
  p.crf = std::move(fit.model);
  const auto t1 = Clock::now();
  const auto tags = p.tag(token_lists(test), 1);
  const double tag_secs = seconds_since(t1);
  std::vector<LabelSequence> gold;
  for (const auto& s : test) gold.push_back(s.labels);
  const double f1 = chunk_prf(gold, tags).micro.f1;
  return {fit_secs < 900.0 && tag_secs < 120.0,
          fmt("fit 3000 sentences (%zu features, %zu iterations) %.1fs; tag 3688 sentences %.1fs; micro F1 %.3f",
              p.crf.num_features(), fit.iterations, fit_secs, tag_secs, f1)};
}

Outcome end_to_end() {
  const auto dir = support::scratch_dir("e2e");
  const auto p = [&](const char* name) { return (dir / name).string(); };
  const auto train = (kToy / "train.iob").string(), test = (kToy / "test.iob").string();
  std::string report, table;
  const bool ok =
      cli({"preprocess", "--in", (kToy / "corpus.txt").string(), "--out", p("pre.txt"), "--seed", "1"}) == 0 &&
      cli({"embed-train", "--corpus", p("pre.txt"), "--out", p("word.sgns"), "--dim", "20", "--epochs", "3",
           "--min-count", "2", "--buckets", "20000", "--seed", "1"}) == 0 &&
      cli({"gmm-fit", "--embeddings", p("word.sgns"), "--words", train, "--k", "10", "--seed", "1", "--out",
           p("clusters.gmm")}) == 0 &&
      cli({"train", "--data", train, "--model", p("model.crf"), "--embeddings", p("word.sgns"), "--gmm",
           p("clusters.gmm")}) == 0 &&
      cli({"tag", "--model", p("model.crf"), "--in", test, "--out", p("pred.iob")}) == 0 &&
      cli({"eval", "--gold", test, "--pred", p("pred.iob"), "--json"}, &report) == 0 &&
      cli({"eval", "--gold", test, "--pred", p("pred.iob")}, &table) == 0;
  if (!ok) return {false, "a pipeline stage exited non-zero"};
  const auto j = nlohmann::json::parse(report, nullptr, false);
  bool well_formed = !j.is_discarded() && table.find("micro F1 ") != std::string::npos;
  for (const char* key : {"micro_precision", "micro_recall", "micro_f1", "sequence_accuracy"}) {
    well_formed = well_formed && j.contains(key) && j[key].is_number() && j[key] >= 0.0 && j[key] <= 1.0;
  }
  well_formed = well_formed && j.contains("per_tag") && j["per_tag"].is_array();
  return {well_formed, well_formed ? fmt("micro F1 %.3f, sequence accuracy %.3f", j["micro_f1"].get<double>(),
                                         j["sequence_accuracy"].get<double>())
                                   : "malformed report"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, Outcome (*)()>> criteria{
      {"viterbi exactness", viterbi_exactness},
      {"partition exactness", partition_exactness},
      {"gradient check", gradient_check},
      {"training convergence", training_convergence},
      {"elastic-net sparsity", elastic_net},
      {"f-measure consistency", f_measure},
      {"chunker conformance", chunker},
      {"word vector assembly", eq2_assembly},
      {"embedding quality", embedding_quality},
      {"gmm", gmm_checks},
      {"ensemble voting", voting},
      {"reproducibility", reproducibility},
      {"scale", scale},
      {"end-to-end", end_to_end},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.contains(id)) continue;
    Outcome r;
    try {
      r = criteria[i].second();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    failed += r.pass ? 0 : 1;
    std::cout << (r.pass ? "PASS" : "FAIL") << " " << std::setw(2) << id << " " << criteria[i].first << ": "
              << r.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
