#pragma once

// Brute-force oracles and synthetic data shared by the unit tests and the
// acceptance runner.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "tweetner/corpus.hpp"
#include "tweetner/crf.hpp"
#include "tweetner/embeddings.hpp"
#include "tweetner/evaluation.hpp"
#include "tweetner/gmm.hpp"
#include "tweetner/rng.hpp"

namespace support {

using namespace tweetner;

struct CrfInstance {
  CrfModel model;
  CompiledSequence seq;
};

inline std::vector<std::string> label_set(std::size_t L) {
  std::vector<std::string> labels{"O"};
  for (std::size_t i = 1; i < L; ++i) labels.push_back("B-t" + std::to_string(i));
  return labels;
}

/// Random weights (normal * scale) and a random sparse real-valued input.
inline CrfInstance random_crf(Rng& rng, std::size_t n, std::size_t L, std::size_t F = 4, double scale = 1.0) {
  std::vector<std::string> features;
  for (std::size_t f = 0; f < F; ++f) features.push_back("f" + std::to_string(f));
  CrfInstance inst{CrfModel(label_set(L), features), {}};
  for (auto& w : inst.model.weights()) w = scale * rng.normal();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t f = 0; f < F; ++f) {
      if (rng.bernoulli(0.6)) inst.seq.add_feature(static_cast<std::uint32_t>(f), rng.normal());
    }
    inst.seq.add_position();
  }
  return inst;
}

/// Calls visit(path) for every label sequence in lexicographic order.
inline void for_each_path(std::size_t n, std::size_t L, const std::function<void(const std::vector<std::uint32_t>&)>& visit) {
  std::vector<std::uint32_t> y(n, 0);
  while (true) {
    visit(y);
    std::size_t i = n;
    while (i > 0) {
      if (++y[i - 1] < L) break;
      y[i - 1] = 0;
      --i;
    }
    if (i == 0) return;
  }
}

inline double brute_log_partition(const CrfModel& m, const CompiledSequence& seq) {
  std::vector<double> scores;
  for_each_path(seq.size(), m.num_labels(), [&](const auto& y) { scores.push_back(sequence_score(m, seq, y)); });
  const double top = *std::max_element(scores.begin(), scores.end());
  double s = 0.0;
  for (double v : scores) s += std::exp(v - top);
  return top + std::log(s);
}

/// First (lexicographically smallest) path with the maximal score.
inline ViterbiResult brute_argmax(const CrfModel& m, const CompiledSequence& seq) {
  ViterbiResult best{{}, -std::numeric_limits<double>::infinity()};
  for_each_path(seq.size(), m.num_labels(), [&](const auto& y) {
    const double s = sequence_score(m, seq, y);
    if (s > best.score) best = {y, s};
  });
  return best;
}

inline Marginals brute_marginals(const CrfModel& m, const CompiledSequence& seq) {
  const std::size_t n = seq.size(), L = m.num_labels();
  const double log_z = brute_log_partition(m, seq);
  Marginals out{DenseMatrix<double>(n, L), {}, log_z};
  for (std::size_t i = 1; i < n; ++i) out.edge.emplace_back(L, L);
  for_each_path(n, L, [&](const auto& y) {
    const double p = std::exp(sequence_score(m, seq, y) - log_z);
    for (std::size_t i = 0; i < n; ++i) out.node(i, y[i]) += p;
    for (std::size_t i = 1; i < n; ++i) out.edge[i - 1](y[i - 1], y[i]) += p;
  });
  return out;
}

/// Central differences of the smooth objective at the model's weights.
inline std::vector<double> finite_difference_gradient(CrfModel model, std::span<const CompiledSequence> data, double h) {
  std::vector<double> g(model.weights().size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double w0 = model.weights()[i];
    model.weights()[i] = w0 + h;
    const double up = nll_and_gradient(model, data).smooth_value;
    model.weights()[i] = w0 - h;
    const double down = nll_and_gradient(model, data).smooth_value;
    model.weights()[i] = w0;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

/// Random labeled sequences for a model's label set, for gradient checks.
inline std::vector<CompiledSequence> random_labeled(Rng& rng, const CrfModel& m, std::size_t count, std::size_t max_len) {
  std::vector<CompiledSequence> data;
  for (std::size_t s = 0; s < count; ++s) {
    CompiledSequence seq;
    const std::size_t n = 1 + rng.uniform_int(max_len);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t f = 0; f < m.num_features(); ++f) {
        if (rng.bernoulli(0.5)) seq.add_feature(static_cast<std::uint32_t>(f), rng.normal());
      }
      seq.add_position();
      seq.labels.push_back(static_cast<std::uint32_t>(rng.uniform_int(m.num_labels())));
    }
    data.push_back(std::move(seq));
  }
  return data;
}

/// Sentences whose word feature "w=X" determines the label: words of group
/// k carry label k (group 0 is "O").
inline std::vector<FeatureSequence> separable_dataset(std::size_t sentences, std::uint64_t seed) {
  const std::vector<std::string> labels{"O", "B-person", "I-person", "B-geoloc", "B-org"};
  Rng rng(seed);
  std::vector<FeatureSequence> data;
  for (std::size_t s = 0; s < sentences; ++s) {
    FeatureSequence seq;
    const std::size_t n = 3 + rng.uniform_int(8);
    for (std::size_t i = 0; i < n; ++i) {
      const auto y = rng.uniform_int(labels.size());
      const auto word = rng.uniform_int(6);
      FeatureVector fv;
      fv.add("w=" + std::to_string(y) + "_" + std::to_string(word), 1.0);
      fv.add("bias", 1.0);
      seq.features.push_back(std::move(fv));
      seq.labels.push_back(labels[y]);
    }
    data.push_back(std::move(seq));
  }
  return data;
}

/// Noisy binary-feature data in which no feature occurs more than a few
/// hundred times, so a large L1 weight pins every weight at zero.
inline std::vector<FeatureSequence> sparse_noisy_dataset(std::size_t sentences, std::uint64_t seed) {
  const std::vector<std::string> labels{"O", "B-a", "I-a", "B-b"};
  Rng rng(seed);
  std::vector<FeatureSequence> data;
  for (std::size_t s = 0; s < sentences; ++s) {
    FeatureSequence seq;
    for (std::size_t i = 0; i < 5; ++i) {
      const auto word = rng.uniform_int(40);
      const auto y = rng.bernoulli(0.7) ? word % labels.size() : rng.uniform_int(labels.size());
      FeatureVector fv;
      fv.add("w=" + std::to_string(word), 1.0);
      fv.add("s=" + std::to_string(word % 7), 1.0);
      seq.features.push_back(std::move(fv));
      seq.labels.push_back(labels[y]);
    }
    data.push_back(std::move(seq));
  }
  return data;
}

inline double token_accuracy(const CrfModel& m, std::span<const FeatureSequence> data) {
  std::size_t right = 0, total = 0;
  for (const auto& s : data) {
    const auto pred = tag(m, s.features);
    for (std::size_t i = 0; i < pred.size(); ++i) right += pred[i] == s.labels[i] ? 1 : 0;
    total += pred.size();
  }
  return static_cast<double>(right) / static_cast<double>(total);
}

/// Two topics: a1..a5 only co-occur with each other, b1..b5 likewise.
inline TokenizedCorpus two_topic_corpus(std::size_t sentences, std::uint64_t seed) {
  Rng rng(seed);
  TokenizedCorpus corpus;
  for (std::size_t s = 0; s < sentences; ++s) {
    const char topic = rng.bernoulli(0.5) ? 'a' : 'b';
    std::vector<std::string> sent;
    for (std::size_t i = 0; i < 8; ++i) sent.push_back(std::string(1, topic) + std::to_string(1 + rng.uniform_int(5)));
    corpus.push_back(std::move(sent));
  }
  return corpus;
}

inline double mean_cosine(const EmbeddingModel& m, const std::vector<std::pair<std::string, std::string>>& pairs) {
  double total = 0.0;
  for (const auto& [a, b] : pairs) total += cosine(m.word_vector(a), m.word_vector(b));
  return total / static_cast<double>(pairs.size());
}

/// Intra-topic minus inter-topic mean cosine.
inline double topic_separation(const EmbeddingModel& m) {
  std::vector<std::pair<std::string, std::string>> intra, inter;
  for (int i = 1; i <= 5; ++i) {
    for (int j = 1; j <= 5; ++j) {
      const auto ai = "a" + std::to_string(i), aj = "a" + std::to_string(j);
      const auto bi = "b" + std::to_string(i), bj = "b" + std::to_string(j);
      if (i < j) {
        intra.emplace_back(ai, aj);
        intra.emplace_back(bi, bj);
      }
      inter.emplace_back(ai, bj);
    }
  }
  return mean_cosine(m, intra) - mean_cosine(m, inter);
}

/// Words in uniformly random contexts, so only shared parameters can make
/// two vectors similar. Six pairs share a 5-letter stem; twelve pairs of
/// unrelated 8-letter words serve as the baseline.
struct StemCorpus {
  TokenizedCorpus corpus;
  std::vector<std::pair<std::string, std::string>> stem_pairs, random_pairs;
};

inline StemCorpus stem_corpus(std::size_t sentences, std::uint64_t seed) {
  Rng rng(seed);
  auto letters = [&](int n) {
    std::string w;
    for (int k = 0; k < n; ++k) w += static_cast<char>('a' + rng.uniform_int(26));
    return w;
  };
  StemCorpus out;
  std::vector<std::string> words;
  for (int i = 0; i < 6; ++i) {
    const auto stem = letters(5);
    out.stem_pairs.emplace_back(stem + letters(3), stem + letters(3));
  }
  for (int i = 0; i < 12; ++i) out.random_pairs.emplace_back(letters(8), letters(8));
  for (const auto* pairs : {&out.stem_pairs, &out.random_pairs}) {
    for (const auto& [a, b] : *pairs) {
      words.push_back(a);
      words.push_back(b);
    }
  }
  for (std::size_t s = 0; s < sentences; ++s) {
    std::vector<std::string> sent;
    for (int i = 0; i < 8; ++i) sent.push_back(words[rng.uniform_int(words.size())]);
    out.corpus.push_back(std::move(sent));
  }
  return out;
}

inline double adjusted_rand_index(std::span<const std::size_t> a, std::span<const std::size_t> b) {
  std::map<std::pair<std::size_t, std::size_t>, double> joint;
  std::map<std::size_t, double> ra, rb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ++joint[{a[i], b[i]}];
    ++ra[a[i]];
    ++rb[b[i]];
  }
  auto c2 = [](double x) { return x * (x - 1.0) / 2.0; };
  double index = 0, sa = 0, sb = 0;
  for (const auto& [k, v] : joint) index += c2(v);
  for (const auto& [k, v] : ra) sa += c2(v);
  for (const auto& [k, v] : rb) sb += c2(v);
  const double expected = sa * sb / c2(static_cast<double>(a.size()));
  const double max_index = 0.5 * (sa + sb);
  return (index - expected) / (max_index - expected);
}

/// Two unit-variance blobs at +-10 e1 in d dimensions; truth[i] is the blob.
inline Points two_blobs(std::size_t n, std::size_t d, std::uint64_t seed, std::vector<std::size_t>& truth) {
  Rng rng(seed);
  Points x(n, d);
  truth.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    truth[i] = i % 2;
    for (std::size_t j = 0; j < d; ++j) x(i, j) = rng.normal();
    x(i, 0) += truth[i] == 0 ? -10.0 : 10.0;
  }
  return x;
}

/// Tweet-like labeled sentences over six entity types (13 IOB labels).
inline std::vector<LabeledSentence> synthetic_tweets(std::size_t count, std::uint64_t seed) {
  static const std::vector<std::pair<std::string, std::vector<std::vector<std::string>>>> entities{
      {"person", {{"Emmanuel", "Macron"}, {"Zinedine", "Zidane"}, {"Marion", "Cotillard"}, {"Omar", "Sy"}}},
      {"musicartist", {{"Stromae"}, {"Angèle"}, {"Aya", "Nakamura"}, {"Orelsan"}}},
      {"geoloc", {{"Paris"}, {"Lyon"}, {"Saint-Étienne"}, {"Marseille"}, {"Lille"}}},
      {"organisation", {{"SNCF"}, {"PSG"}, {"France", "Inter"}, {"RATP"}}},
      {"product", {{"iPhone"}, {"Netflix"}, {"PlayStation"}}},
      {"event", {{"Roland-Garros"}, {"Coupe", "du", "monde"}, {"Fête", "de", "la", "musique"}}},
  };
  Rng rng(seed);
  std::vector<std::string> filler;
  for (const char* w : {"le", "la", "les", "de", "du", "à", "avec", "pour", "ce", "soir", "demain", "trop", "bien",
                        "vraiment", "génial", "nul", "j'adore", "encore", "😂", "😍", "!", "?", "...", "«", "»", "lol",
                        "mdr", "#direct", "on", "est", "il", "elle", "pas", "plus", "très", "merci", "vu", "dit"}) {
    filler.emplace_back(w);
  }
  for (int i = 0; i < 120; ++i) filler.push_back("mot" + std::to_string(i));
  std::vector<LabeledSentence> out;
  for (std::size_t s = 0; s < count; ++s) {
    LabeledSentence sent;
    const std::size_t len = 8 + rng.uniform_int(14);
    while (sent.size() < len) {
      if (rng.bernoulli(0.15)) {
        const auto& [type, names] = entities[rng.uniform_int(entities.size())];
        const auto& name = names[rng.uniform_int(names.size())];
        for (std::size_t j = 0; j < name.size(); ++j) {
          sent.tokens.push_back({name[j], std::nullopt});
          sent.labels.push_back((j == 0 ? "B-" : "I-") + type);
        }
      } else {
        sent.tokens.push_back({filler[rng.uniform_int(filler.size())], std::nullopt});
        sent.labels.push_back("O");
      }
    }
    out.push_back(std::move(sent));
  }
  return out;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("tweetner-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace support
