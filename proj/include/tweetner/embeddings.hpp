#pragma once

// Skipgram word vectors with character n-gram (subword) units.
//
// A word w is represented by h_w = u_w + sum_{g in G_w} u_g, where u_w is
// its own input vector (absent for out-of-vocabulary words) and G_w the
// hashed character n-grams of "<" + w + ">". Training maximizes the
// negative-sampling objective with Hogwild-style parallel SGD.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <vector>

#include "tweetner/binary_io.hpp"
#include "tweetner/error.hpp"
#include "tweetner/matrix.hpp"
#include "tweetner/rng.hpp"
#include "tweetner/utf8.hpp"

namespace tweetner {

struct EmbeddingParams {
  double learning_rate = 0.02;
  std::uint32_t dim = 200;
  std::uint32_t window = 5;
  std::uint32_t epochs = 4;
  std::uint32_t min_count = 5;
  std::uint32_t negatives = 5;
  std::uint32_t min_ngram = 3;
  std::uint32_t max_ngram = 6;
  double subsample_threshold = 1e-4;
  std::uint32_t bucket_count = 2'000'000;

  void validate() const {
    auto bad = [](const std::string& what) { throw Error(ErrorKind::InvalidParams, what); };
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) bad("learning rate must be positive");
    if (!(subsample_threshold > 0.0)) bad("subsampling threshold must be positive");
    if (dim == 0 || window == 0 || epochs == 0 || min_count == 0 || negatives == 0 || bucket_count == 0) {
      bad("dim, window, epochs, min_count, negatives and bucket_count must be >= 1");
    }
    if (min_ngram < 1 || min_ngram > max_ngram) bad("need 1 <= min_ngram <= max_ngram");
  }

  friend bool operator==(const EmbeddingParams&, const EmbeddingParams&) = default;
};

/// Character n-grams of "<word>" over Unicode scalar values, ordered by
/// increasing n, then left to right.
inline std::vector<std::string> extract_ngrams(std::string_view word, std::uint32_t min_n, std::uint32_t max_n) {
  std::u32string padded = U"<";
  padded += utf8::decode(word);
  padded += U'>';
  std::vector<std::string> out;
  for (std::size_t n = min_n; n <= max_n && n <= padded.size(); ++n) {
    for (std::size_t start = 0; start + n <= padded.size(); ++start) {
      out.push_back(utf8::encode(std::u32string_view(padded).substr(start, n)));
    }
  }
  return out;
}

/// 32-bit FNV-1a over the UTF-8 bytes, reduced modulo bucket_count.
inline std::uint32_t hash_ngram(std::string_view gram, std::uint32_t bucket_count) {
  std::uint32_t h = 2166136261u;
  for (char c : gram) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 16777619u;
  }
  return h % bucket_count;
}

struct VocabEntry {
  std::string word;
  std::uint64_t count = 0;

  friend bool operator==(const VocabEntry&, const VocabEntry&) = default;
};

/// Words ordered by decreasing count, ties lexicographic.
class Vocab {
 public:
  Vocab() = default;
  explicit Vocab(std::vector<VocabEntry> entries) : entries_(std::move(entries)) {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      index_.emplace(entries_[i].word, static_cast<std::uint32_t>(i));
      total_ += entries_[i].count;
    }
  }

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const VocabEntry& operator[](std::size_t i) const { return entries_[i]; }
  const std::vector<VocabEntry>& entries() const { return entries_; }
  std::uint64_t total_count() const { return total_; }

  std::optional<std::uint32_t> find(std::string_view word) const {
    const auto it = index_.find(std::string(word));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

 private:
  std::vector<VocabEntry> entries_;
  std::unordered_map<std::string, std::uint32_t> index_;
  std::uint64_t total_ = 0;
};

using TokenizedCorpus = std::vector<std::vector<std::string>>;

inline Vocab build_vocab(const TokenizedCorpus& corpus, std::uint32_t min_count) {
  if (min_count < 1) throw Error(ErrorKind::InvalidParams, "min_count must be >= 1");
  std::unordered_map<std::string, std::uint64_t> counts;
  for (const auto& sentence : corpus) {
    for (const auto& w : sentence) ++counts[w];
  }
  std::vector<VocabEntry> kept;
  for (auto& [word, count] : counts) {
    if (count >= min_count) kept.push_back({word, count});
  }
  if (kept.empty()) throw Error(ErrorKind::EmptyVocab, "no word reaches min_count " + std::to_string(min_count));
  std::sort(kept.begin(), kept.end(), [](const VocabEntry& a, const VocabEntry& b) {
    return a.count != b.count ? a.count > b.count : a.word < b.word;
  });
  return Vocab(std::move(kept));
}

using Matrix = DenseMatrix<float>;

struct EmbeddingModel {
  EmbeddingParams params;
  Vocab vocab;
  Matrix word_input;   // u_w, |V| x dim
  Matrix ngram_input;  // u_g, bucket_count x dim
  Matrix output;       // v_c, |V| x dim

  std::size_t dim() const { return params.dim; }

  std::vector<std::uint32_t> ngram_buckets(std::string_view word) const {
    std::vector<std::uint32_t> out;
    for (const auto& g : extract_ngrams(word, params.min_ngram, params.max_ngram)) {
      out.push_back(hash_ngram(g, params.bucket_count));
    }
    return out;
  }

  /// h_w: u_w (when in vocabulary) followed by each u_g in n-gram order.
  std::vector<float> word_vector(std::string_view word) const {
    std::vector<float> h(params.dim, 0.0f);
    if (const auto id = vocab.find(word)) {
      const auto u = word_input.row(*id);
      std::copy(u.begin(), u.end(), h.begin());
    }
    for (std::uint32_t b : ngram_buckets(word)) {
      const auto g = ngram_input.row(b);
      for (std::size_t k = 0; k < h.size(); ++k) h[k] += g[k];
    }
    return h;
  }
};

/// Mean of the word vectors of a sentence.
inline std::vector<double> sentence_vector(const EmbeddingModel& model, std::span<const std::string> tokens) {
  if (tokens.empty()) throw Error(ErrorKind::EmptySentence, "cannot average an empty sentence");
  std::vector<double> mean(model.dim(), 0.0);
  for (const auto& t : tokens) {
    const auto v = model.word_vector(t);
    for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += v[k];
  }
  for (auto& x : mean) x /= static_cast<double>(tokens.size());
  return mean;
}

inline double cosine(std::span<const float> a, std::span<const float> b) {
  double dot = 0, na = 0, nb = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    dot += double(a[k]) * b[k];
    na += double(a[k]) * a[k];
    nb += double(b[k]) * b[k];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / std::sqrt(na * nb);
}

/// Walker/Vose alias table: O(1) draws from a fixed discrete distribution.
class AliasSampler {
 public:
  AliasSampler() = default;
  explicit AliasSampler(std::span<const double> weights) : prob_(weights.size()), alias_(weights.size()) {
    const std::size_t n = weights.size();
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    std::vector<double> scaled(n);
    std::vector<std::uint32_t> small, large;
    for (std::size_t i = 0; i < n; ++i) {
      scaled[i] = weights[i] * static_cast<double>(n) / total;
      (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
    }
    while (!small.empty() && !large.empty()) {
      const auto s = small.back();
      small.pop_back();
      const auto l = large.back();
      prob_[s] = scaled[s];
      alias_[s] = l;
      scaled[l] = (scaled[l] + scaled[s]) - 1.0;
      if (scaled[l] < 1.0) {
        large.pop_back();
        small.push_back(l);
      }
    }
    for (auto i : large) prob_[i] = 1.0, alias_[i] = i;
    for (auto i : small) prob_[i] = 1.0, alias_[i] = i;
  }

  std::uint32_t sample(Rng& rng) const {
    const auto i = static_cast<std::uint32_t>(rng.uniform_int(prob_.size()));
    return rng.uniform() < prob_[i] ? i : alias_[i];
  }

  std::size_t size() const { return prob_.size(); }

 private:
  std::vector<double> prob_;
  std::vector<std::uint32_t> alias_;
};

/// Subsampling keep probability min(1, sqrt(t/f) + t/f), f the relative
/// corpus frequency of the word.
inline double keep_probability(std::uint64_t count, std::uint64_t total, double threshold) {
  const double ratio = threshold / (static_cast<double>(count) / static_cast<double>(total));
  return std::min(1.0, std::sqrt(ratio) + ratio);
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

namespace detail {

inline void hidden_vector(const EmbeddingModel& m, std::uint32_t word, std::span<const std::uint32_t> buckets,
                          std::span<float> h) {
  const auto u = m.word_input.row(word);
  std::copy(u.begin(), u.end(), h.begin());
  for (auto b : buckets) {
    const auto g = m.ngram_input.row(b);
    for (std::size_t k = 0; k < h.size(); ++k) h[k] += g[k];
  }
}

}  // namespace detail

/// -log s(h.v_ctx) - sum_k log s(-h.v_neg_k) for one training triple.
inline double negative_sampling_loss(const EmbeddingModel& m, std::uint32_t center, std::uint32_t context,
                                     std::span<const std::uint32_t> negatives) {
  const auto buckets = m.ngram_buckets(m.vocab[center].word);
  std::vector<float> h(m.dim());
  detail::hidden_vector(m, center, buckets, h);
  auto dot = [&](std::uint32_t c) {
    double s = 0;
    const auto v = m.output.row(c);
    for (std::size_t k = 0; k < h.size(); ++k) s += double(h[k]) * v[k];
    return s;
  };
  double loss = -std::log(sigmoid(dot(context)));
  for (auto n : negatives) loss -= std::log(sigmoid(-dot(n)));
  return loss;
}

/// One SGD step on the negative-sampling loss. The gradient with respect to
/// h_w is added unscaled to u_w and to every u_g of w. `hidden` and `grad`
/// are caller-owned scratch buffers of length dim.
inline void skipgram_step(EmbeddingModel& m, std::uint32_t center, std::span<const std::uint32_t> buckets,
                          std::uint32_t context, std::span<const std::uint32_t> negatives, float lr,
                          std::span<float> hidden, std::span<float> grad) {
  const std::size_t dim = m.dim();
  detail::hidden_vector(m, center, buckets, hidden);
  std::fill(grad.begin(), grad.end(), 0.0f);
  auto update = [&](std::uint32_t target, float label) {
    auto v = m.output.row(target);
    float dot = 0.0f;
    for (std::size_t k = 0; k < dim; ++k) dot += hidden[k] * v[k];
    const float alpha = lr * (label - static_cast<float>(sigmoid(dot)));
    for (std::size_t k = 0; k < dim; ++k) grad[k] += alpha * v[k];
    for (std::size_t k = 0; k < dim; ++k) v[k] += alpha * hidden[k];
  };
  update(context, 1.0f);
  for (auto n : negatives) update(n, 0.0f);
  auto u = m.word_input.row(center);
  for (std::size_t k = 0; k < dim; ++k) u[k] += grad[k];
  for (auto b : buckets) {
    auto g = m.ngram_input.row(b);
    for (std::size_t k = 0; k < dim; ++k) g[k] += grad[k];
  }
}

/// Fresh model: input rows uniform in [-1/dim, 1/dim), output rows zero.
inline EmbeddingModel init_embedding_model(Vocab vocab, const EmbeddingParams& params, std::uint64_t seed) {
  params.validate();
  EmbeddingModel m;
  m.params = params;
  m.vocab = std::move(vocab);
  m.word_input = Matrix(m.vocab.size(), params.dim);
  m.ngram_input = Matrix(params.bucket_count, params.dim);
  m.output = Matrix(m.vocab.size(), params.dim);
  Rng rng(seed);
  const double scale = 1.0 / params.dim;
  for (auto* mat : {&m.word_input, &m.ngram_input}) {
    for (auto& x : mat->data()) x = static_cast<float>((2.0 * rng.uniform() - 1.0) * scale);
  }
  return m;
}

/// Trains on `corpus` (sentences of tokens). With threads == 1 the result
/// is a pure function of (corpus, params, seed). With more threads the
/// workers update the shared matrices without synchronization, so results
/// vary from run to run.
inline EmbeddingModel train_skipgram(const TokenizedCorpus& corpus, const EmbeddingParams& params,
                                     std::uint64_t seed, unsigned threads = 1) {
  params.validate();
  Vocab vocab = build_vocab(corpus, params.min_count);
  if (vocab.size() < 2) throw Error(ErrorKind::InvalidParams, "negative sampling needs at least two vocabulary words");
  EmbeddingModel model = init_embedding_model(std::move(vocab), params, seed);
  const Vocab& v = model.vocab;

  std::vector<std::vector<std::uint32_t>> buckets(v.size());
  std::vector<double> keep(v.size());
  std::vector<double> noise(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    buckets[i] = model.ngram_buckets(v[i].word);
    keep[i] = keep_probability(v[i].count, v.total_count(), params.subsample_threshold);
    noise[i] = std::pow(static_cast<double>(v[i].count), 0.75);
  }
  const AliasSampler sampler(noise);

  std::uint64_t corpus_tokens = 0;
  for (const auto& s : corpus) corpus_tokens += s.size();
  const double scheduled = static_cast<double>(corpus_tokens) * params.epochs;
  std::atomic<std::uint64_t> processed{0};

  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, corpus.size()))));
  auto worker = [&](unsigned t) {
    Rng rng(derive_seed(seed, t));
    const std::size_t begin = corpus.size() * t / threads;
    const std::size_t end = corpus.size() * (t + 1) / threads;
    std::vector<float> hidden(params.dim), grad(params.dim);
    std::vector<std::uint32_t> ids, negs(params.negatives);
    for (std::uint32_t epoch = 0; epoch < params.epochs; ++epoch) {
      for (std::size_t s = begin; s < end; ++s) {
        ids.clear();
        for (const auto& w : corpus[s]) {
          const auto id = v.find(w);
          if (id && rng.uniform() < keep[*id]) ids.push_back(*id);
        }
        const double done = static_cast<double>(processed.fetch_add(corpus[s].size(), std::memory_order_relaxed));
        const float lr = static_cast<float>(params.learning_rate * std::max(0.0, 1.0 - done / scheduled));
        for (std::size_t pos = 0; pos < ids.size(); ++pos) {
          const auto radius = static_cast<std::size_t>(1 + rng.uniform_int(params.window));
          const std::size_t lo = pos >= radius ? pos - radius : 0;
          const std::size_t hi = std::min(ids.size() - 1, pos + radius);
          for (std::size_t c = lo; c <= hi; ++c) {
            if (c == pos) continue;
            for (auto& n : negs) {
              do {
                n = sampler.sample(rng);
              } while (n == ids[c]);
            }
            skipgram_step(model, ids[pos], buckets[ids[pos]], ids[c], negs, lr, hidden, grad);
          }
        }
      }
    }
  };

  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker, t);
  }
  return model;
}

inline constexpr std::uint32_t kEmbeddingFormatVersion = 1;

inline void save_embeddings(const EmbeddingModel& m, std::ostream& out) {
  binary::Writer w(out);
  w.magic("SGNS");
  w.put<std::uint32_t>(kEmbeddingFormatVersion);
  const auto& p = m.params;
  w.put<double>(p.learning_rate);
  for (std::uint32_t x : {p.dim, p.window, p.epochs, p.min_count, p.negatives, p.min_ngram, p.max_ngram}) w.put(x);
  w.put<double>(p.subsample_threshold);
  w.put<std::uint32_t>(p.bucket_count);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(m.vocab.size()));
  for (const auto& e : m.vocab.entries()) {
    w.str(e.word);
    w.put<std::uint64_t>(e.count);
  }
  for (const auto* mat : {&m.word_input, &m.ngram_input, &m.output}) w.array<float>(mat->data());
  w.finish();
}

inline EmbeddingModel load_embeddings(std::istream& in) {
  binary::Reader r(in);
  r.expect_magic("SGNS");
  const auto version = r.get<std::uint32_t>();
  if (version != kEmbeddingFormatVersion) {
    throw Error(ErrorKind::VersionMismatch, "embedding format version " + std::to_string(version));
  }
  EmbeddingModel m;
  auto& p = m.params;
  p.learning_rate = r.get<double>();
  for (std::uint32_t* x : {&p.dim, &p.window, &p.epochs, &p.min_count, &p.negatives, &p.min_ngram, &p.max_ngram}) {
    *x = r.get<std::uint32_t>();
  }
  p.subsample_threshold = r.get<double>();
  p.bucket_count = r.get<std::uint32_t>();
  try {
    p.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::CorruptFile, e.what());
  }
  const auto n = r.get<std::uint32_t>();
  r.require(std::size_t{n} * 12);
  std::vector<VocabEntry> entries(n);
  for (auto& e : entries) {
    e.word = r.str();
    e.count = r.get<std::uint64_t>();
  }
  m.vocab = Vocab(std::move(entries));
  r.require((2 * std::size_t{n} + p.bucket_count) * p.dim * sizeof(float));
  m.word_input = Matrix(n, p.dim);
  m.ngram_input = Matrix(p.bucket_count, p.dim);
  m.output = Matrix(n, p.dim);
  for (auto* mat : {&m.word_input, &m.ngram_input, &m.output}) r.array<float>(mat->data());
  r.expect_end();
  return m;
}

inline void save_embeddings(const EmbeddingModel& m, const std::string& path) {
  auto out = binary::open_out(path);
  save_embeddings(m, out);
}

inline EmbeddingModel load_embeddings(const std::string& path) {
  auto in = binary::open_in(path);
  return load_embeddings(in);
}

}  // namespace tweetner
