#pragma once

// One complete tagger: the embedding models and GMM its features draw on,
// the POS source, and the CRF over the assembled features.

#include <algorithm>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "tweetner/corpus.hpp"
#include "tweetner/crf.hpp"
#include "tweetner/embeddings.hpp"
#include "tweetner/error.hpp"
#include "tweetner/features.hpp"
#include "tweetner/gmm.hpp"
#include "tweetner/pos.hpp"
#include "tweetner/rng.hpp"

namespace tweetner {

inline EmbeddingParams default_sentence_embedding_params() {
  EmbeddingParams p;
  p.dim = 40;
  return p;
}

inline EmbeddingParams default_gmm_embedding_params() {
  EmbeddingParams p;
  p.dim = 100;
  return p;
}

struct PipelineConfig {
  FeatureConfig features;
  PosProvider pos;
  EmbeddingParams word_embeddings;
  EmbeddingParams sentence_embeddings = default_sentence_embedding_params();
  EmbeddingParams gmm_embeddings = default_gmm_embedding_params();
  GmmOptions gmm;
  TrainConfig crf;
};

struct Pipeline {
  FeatureConfig features;
  PosProvider pos;
  std::optional<EmbeddingModel> word;
  std::optional<EmbeddingModel> sentence;
  std::optional<EmbeddingModel> gmm_input;
  std::optional<GmmModel> gmm;
  CrfModel crf;

  FeatureModels models() const {
    return {word ? &*word : nullptr, gmm_input ? &*gmm_input : nullptr, gmm ? &*gmm : nullptr,
            sentence ? &*sentence : nullptr};
  }

  /// Viterbi labels for each sentence. Sentences are split into `threads`
  /// contiguous blocks, each with its own feature extractor.
  std::vector<std::vector<std::string>> tag(std::vector<std::vector<Token>> sentences, unsigned threads = 1) const {
    apply_pos_provider(sentences, pos);
    std::vector<std::vector<std::string>> out(sentences.size());
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, sentences.size()))));
    auto work = [&](std::size_t begin, std::size_t end) {
      FeatureExtractor fx(models(), features);
      for (std::size_t i = begin; i < end; ++i) out[i] = tweetner::tag(crf, fx.extract(sentences[i]));
    };
    if (threads == 1) {
      work(0, sentences.size());
      return out;
    }
    std::vector<std::exception_ptr> errors(threads);
    {
      std::vector<std::jthread> pool;
      for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
          try {
            work(sentences.size() * t / threads, sentences.size() * (t + 1) / threads);
          } catch (...) {
            errors[t] = std::current_exception();
          }
        });
      }
    }
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
    return out;
  }
};

inline std::vector<std::vector<Token>> token_lists(const std::vector<LabeledSentence>& data) {
  std::vector<std::vector<Token>> out;
  out.reserve(data.size());
  for (const auto& s : data) out.push_back(s.tokens);
  return out;
}

/// Sorted distinct token texts of the labeled data plus extra words.
inline std::vector<std::string> unique_words(const std::vector<LabeledSentence>& data,
                                             const std::vector<std::string>& extra = {}) {
  std::set<std::string> words(extra.begin(), extra.end());
  for (const auto& s : data)
    for (const auto& t : s.tokens) words.insert(t.text);
  return {words.begin(), words.end()};
}

inline Points word_points(const EmbeddingModel& model, const std::vector<std::string>& words) {
  Points points(words.size(), model.dim());
  for (std::size_t i = 0; i < words.size(); ++i) {
    const auto v = model.word_vector(words[i]);
    std::copy(v.begin(), v.end(), points.row(i).begin());
  }
  return points;
}

/// Builds the CRF problem from labeled sentences, extracting features one
/// sentence at a time.
inline CrfProblem build_problem(const std::vector<LabeledSentence>& data, const FeatureModels& models,
                                const FeatureConfig& config, const PosProvider& pos) {
  if (data.empty()) throw Error(ErrorKind::EmptyDataset, "no labeled sentences");
  auto sentences = token_lists(data);
  apply_pos_provider(sentences, pos);
  FeatureExtractor fx(models, config);
  CrfProblemBuilder builder;
  for (std::size_t i = 0; i < data.size(); ++i) builder.add(fx.extract(sentences[i]), data[i].labels);
  return std::move(builder).finish();
}

/// Seeds of the four random stages of a pipeline.
struct PipelineSeeds {
  std::uint64_t word, sentence, gmm_input, gmm;

  static PipelineSeeds from(std::uint64_t seed) {
    return {derive_seed(seed, 0), derive_seed(seed, 1), derive_seed(seed, 2), derive_seed(seed, 3)};
  }
};

/// Trains every model the feature configuration needs, then the CRF. The
/// GMM is fitted on the distinct words of the labeled data plus
/// `extra_words`.
inline Pipeline train_pipeline(const std::vector<LabeledSentence>& labeled, const TokenizedCorpus& corpus,
                               const PipelineConfig& config, std::uint64_t seed,
                               const std::vector<std::string>& extra_words = {}, unsigned threads = 1) {
  config.features.validate();
  const auto seeds = PipelineSeeds::from(seed);
  Pipeline p;
  p.features = config.features;
  p.pos = config.pos;
  if (config.features.ft_word) p.word = train_skipgram(corpus, config.word_embeddings, seeds.word, threads);
  if (config.features.ft_sentence) {
    p.sentence = train_skipgram(corpus, config.sentence_embeddings, seeds.sentence, threads);
  }
  if (config.features.ft_cluster) {
    p.gmm_input = train_skipgram(corpus, config.gmm_embeddings, seeds.gmm_input, threads);
    p.gmm = fit_gmm(word_points(*p.gmm_input, unique_words(labeled, extra_words)), config.gmm, seeds.gmm).model;
  }
  TrainConfig crf_config = config.crf;
  crf_config.threads = threads;
  p.crf = fit_crf(build_problem(labeled, p.models(), p.features, p.pos), crf_config).model;
  return p;
}

// Pipeline persistence. The CRF file's metadata records the feature
// configuration, the POS source and the paths of the other model files;
// relative paths resolve against the CRF file's directory.

namespace pipeline_keys {
inline constexpr const char* kHandcrafted = "features.handcrafted";
inline constexpr const char* kWord = "features.ft_word";
inline constexpr const char* kCluster = "features.ft_cluster";
inline constexpr const char* kSentence = "features.ft_sentence";
inline constexpr const char* kPos = "pos.source";
inline constexpr const char* kPosCommand = "pos.command";
inline constexpr const char* kWordPath = "path.embeddings";
inline constexpr const char* kSentencePath = "path.sent_embeddings";
inline constexpr const char* kGmmInputPath = "path.gmm_embeddings";
inline constexpr const char* kGmmPath = "path.gmm";
}  // namespace pipeline_keys

struct PipelinePaths {
  std::string word, sentence, gmm_input, gmm;
};

inline void record_pipeline(CrfModel& crf, const FeatureConfig& features, const PosProvider& pos,
                            const PipelinePaths& paths) {
  using namespace pipeline_keys;
  crf.metadata[kHandcrafted] = features.handcrafted ? "1" : "0";
  crf.metadata[kWord] = features.ft_word ? "1" : "0";
  crf.metadata[kCluster] = features.ft_cluster ? "1" : "0";
  crf.metadata[kSentence] = features.ft_sentence ? "1" : "0";
  crf.metadata[kPos] = std::string(to_string(pos.source));
  if (pos.source == PosSource::External) crf.metadata[kPosCommand] = pos.command;
  auto put = [&](const char* key, const std::string& value) {
    if (!value.empty()) crf.metadata[key] = value;
  };
  put(kWordPath, paths.word);
  put(kSentencePath, paths.sentence);
  put(kGmmInputPath, paths.gmm_input);
  put(kGmmPath, paths.gmm);
}

/// Loads a pipeline from its CRF file; non-empty entries of `overrides`
/// replace the recorded model paths.
inline Pipeline load_pipeline(const std::string& crf_path, const PipelinePaths& overrides = {}) {
  using namespace pipeline_keys;
  namespace fs = std::filesystem;
  Pipeline p;
  p.crf = load_crf(crf_path);
  const auto& meta = p.crf.metadata;
  auto flag = [&](const char* key, bool fallback) {
    const auto it = meta.find(key);
    return it == meta.end() ? fallback : it->second == "1";
  };
  p.features.handcrafted = flag(kHandcrafted, true);
  p.features.ft_word = flag(kWord, false);
  p.features.ft_cluster = flag(kCluster, false);
  p.features.ft_sentence = flag(kSentence, false);
  if (const auto it = meta.find(kPos); it != meta.end()) p.pos.source = parse_pos_source(it->second);
  if (const auto it = meta.find(kPosCommand); it != meta.end()) p.pos.command = it->second;

  const fs::path base = fs::path(crf_path).parent_path();
  auto resolve = [&](const char* key, const std::string& override_path) -> std::string {
    if (!override_path.empty()) return override_path;
    const auto it = meta.find(key);
    if (it == meta.end()) throw Error(ErrorKind::ModelMissing, std::string("no path recorded for ") + key);
    const fs::path path(it->second);
    return (path.is_absolute() ? path : base / path).string();
  };
  if (p.features.ft_word) p.word = load_embeddings(resolve(kWordPath, overrides.word));
  if (p.features.ft_sentence) p.sentence = load_embeddings(resolve(kSentencePath, overrides.sentence));
  if (p.features.ft_cluster) {
    p.gmm_input = load_embeddings(resolve(kGmmInputPath, overrides.gmm_input));
    p.gmm = load_gmm(resolve(kGmmPath, overrides.gmm));
  }
  p.models().check(p.features);
  return p;
}

/// Writes every model of the pipeline into `dir` under fixed names.
inline void save_pipeline(Pipeline p, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  PipelinePaths names;
  if (p.word) save_embeddings(*p.word, (dir / (names.word = "word.sgns")).string());
  if (p.sentence) save_embeddings(*p.sentence, (dir / (names.sentence = "sentence.sgns")).string());
  if (p.gmm_input) save_embeddings(*p.gmm_input, (dir / (names.gmm_input = "gmm_input.sgns")).string());
  if (p.gmm) save_gmm(*p.gmm, (dir / (names.gmm = "clusters.gmm")).string());
  record_pipeline(p.crf, p.features, p.pos, names);
  save_crf(p.crf, (dir / "model.crf").string());
}

}  // namespace tweetner
