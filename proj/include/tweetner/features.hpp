#pragma once

// Per-token observation features: the word-level handcrafted templates
// (some also emitted for the neighbouring tokens), raw word-vector
// components, GMM cluster posteriors and the sentence mean vector.
//
// Name spaces: "hc:" handcrafted, "prev:"/"next:" context copies,
// "ft_wo_<k>" word vector, "ft_wo_c<k>" cluster posterior, "ft_sen_<k>"
// sentence vector.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tweetner/corpus.hpp"
#include "tweetner/embeddings.hpp"
#include "tweetner/emoji_table.hpp"
#include "tweetner/error.hpp"
#include "tweetner/gmm.hpp"
#include "tweetner/utf8.hpp"

namespace tweetner {

/// Named real-valued features of one token. Binary features carry 1.0.
class FeatureVector {
 public:
  using Entry = std::pair<std::string, double>;

  void add(std::string name, double value) {
    if (name.empty()) throw Error(ErrorKind::InvalidParams, "empty feature name");
    if (!std::isfinite(value)) throw Error(ErrorKind::InvalidParams, "non-finite value for feature '" + name + "'");
    entries_.emplace_back(std::move(name), value);
  }

  std::optional<double> find(std::string_view name) const {
    for (const auto& [n, v] : entries_)
      if (n == name) return v;
    return std::nullopt;
  }
  bool contains(std::string_view name) const { return find(name).has_value(); }

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  void append(const FeatureVector& other) { entries_.insert(entries_.end(), other.begin(), other.end()); }

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;

 private:
  std::vector<Entry> entries_;
};

struct FeatureConfig {
  bool handcrafted = true;
  bool ft_word = true;
  bool ft_cluster = true;
  bool ft_sentence = true;

  void validate() const {
    if (!(handcrafted || ft_word || ft_cluster || ft_sentence)) {
      throw Error(ErrorKind::InvalidParams, "at least one feature family must be enabled");
    }
  }

  friend bool operator==(const FeatureConfig&, const FeatureConfig&) = default;
};

inline bool is_emoji(std::string_view token) {
  if (token.empty()) return false;
  const auto cps = utf8::decode(token);
  return std::all_of(cps.begin(), cps.end(), [](char32_t cp) { return emoji::contains(cp); });
}

inline bool is_quote(std::string_view token) {
  static constexpr std::string_view quotes[] = {"\"", "'", "«", "»", "“", "”", "‘", "’"};
  return std::find(std::begin(quotes), std::end(quotes), token) != std::end(quotes);
}

/// At least one cased letter and no lowercase letter.
inline bool is_upper_word(std::u32string_view cps) {
  bool cased = false;
  for (char32_t cp : cps) {
    if (utf8::is_lower(cp)) return false;
    cased = cased || utf8::is_upper(cp);
  }
  return cased;
}

/// First character uppercase, every other character lowercase or uncased.
inline bool is_title_word(std::u32string_view cps) {
  if (cps.empty() || !utf8::is_upper(cps.front())) return false;
  return std::none_of(cps.begin() + 1, cps.end(), [](char32_t cp) { return utf8::is_upper(cp); });
}

namespace detail {

struct WordShape {
  std::string lower;
  std::string prefix1, prefix2, suffix1, suffix2;
  std::size_t length = 0;
  std::size_t uppercase = 0;
  bool upper = false, title = false, quote = false;
};

inline WordShape word_shape(std::string_view text) {
  const auto cps = utf8::decode(text);
  std::u32string lower(cps);
  for (auto& cp : lower) cp = utf8::to_lower(cp);
  const std::u32string_view lv(lower);
  WordShape s;
  s.length = cps.size();
  s.lower = utf8::encode(lv);
  s.prefix1 = utf8::encode(lv.substr(0, 1));
  s.prefix2 = utf8::encode(lv.substr(0, 2));
  s.suffix1 = utf8::encode(lv.substr(lv.size() - std::min<std::size_t>(1, lv.size())));
  s.suffix2 = utf8::encode(lv.substr(lv.size() - std::min<std::size_t>(2, lv.size())));
  s.uppercase = static_cast<std::size_t>(std::count_if(cps.begin(), cps.end(), utf8::is_upper));
  s.upper = is_upper_word(cps);
  s.title = is_title_word(cps);
  s.quote = is_quote(text);
  return s;
}

inline void add_context(FeatureVector& fv, std::string_view prefix, const WordShape& s) {
  const std::string p(prefix);
  fv.add(p + "word=" + s.lower, 1.0);
  fv.add(p + "prefix1=" + s.prefix1, 1.0);
  fv.add(p + "suffix1=" + s.suffix1, 1.0);
  if (s.upper) fv.add(p + "is_upper", 1.0);
  if (s.title) fv.add(p + "is_title", 1.0);
  if (s.quote) fv.add(p + "is_quote", 1.0);
}

}  // namespace detail

/// Word-level handcrafted templates for token i. Flags are emitted only when
/// true; numeric features (length, position, uppercase proportion and its
/// product with length) are always emitted.
inline FeatureVector handcrafted_features(std::span<const Token> sentence, std::size_t i) {
  if (i >= sentence.size()) {
    throw Error(ErrorKind::IndexOutOfRange,
                "position " + std::to_string(i) + " in sentence of " + std::to_string(sentence.size()));
  }
  const Token& tok = sentence[i];
  const auto s = detail::word_shape(tok.text);
  FeatureVector fv;
  detail::add_context(fv, "hc:", s);
  fv.add("hc:prefix2=" + s.prefix2, 1.0);
  fv.add("hc:suffix2=" + s.suffix2, 1.0);
  const double len = static_cast<double>(s.length);
  const double prop = s.length == 0 ? 0.0 : static_cast<double>(s.uppercase) / len;
  fv.add("hc:len", len);
  fv.add("hc:position", static_cast<double>(i));
  fv.add("hc:upper_prop", prop);
  fv.add("hc:upper_prop_x_len", prop * len);
  if (is_emoji(tok.text)) fv.add("hc:is_emoji", 1.0);
  if (tok.text.find('-') != std::string::npos) fv.add("hc:hyphen", 1.0);
  if (tok.pos) fv.add("hc:pos=" + *tok.pos, 1.0);
  if (i == 0) fv.add("hc:bos", 1.0);
  if (i + 1 == sentence.size()) fv.add("hc:eos", 1.0);
  if (i > 0) detail::add_context(fv, "prev:", detail::word_shape(sentence[i - 1].text));
  if (i + 1 < sentence.size()) detail::add_context(fv, "next:", detail::word_shape(sentence[i + 1].text));
  return fv;
}

/// Embedding models a feature configuration may draw on. Non-owning.
struct FeatureModels {
  const EmbeddingModel* word = nullptr;       // raw word components
  const EmbeddingModel* gmm_input = nullptr;  // vectors the GMM was fitted on
  const GmmModel* gmm = nullptr;
  const EmbeddingModel* sentence = nullptr;   // sentence mean vector

  void check(const FeatureConfig& config) const {
    if (config.ft_word && word == nullptr) throw Error(ErrorKind::ModelMissing, "word embedding model required");
    if (config.ft_cluster && (gmm == nullptr || gmm_input == nullptr)) {
      throw Error(ErrorKind::ModelMissing, "GMM and its input embedding model required");
    }
    if (config.ft_cluster && gmm->dim != gmm_input->dim()) {
      throw Error(ErrorKind::DimensionMismatch, "GMM dimension differs from its embedding model");
    }
    if (config.ft_sentence && sentence == nullptr) {
      throw Error(ErrorKind::ModelMissing, "sentence embedding model required");
    }
  }
};

inline std::vector<double> to_double(std::span<const float> v) { return {v.begin(), v.end()}; }

/// Names prefix + "0" .. prefix + (n-1), from a per-thread cache.
inline const std::vector<std::string>& indexed_names(std::string_view prefix, std::size_t n) {
  thread_local std::unordered_map<std::string, std::vector<std::string>> tables;
  auto& table = tables[std::string(prefix)];
  while (table.size() < n) table.push_back(std::string(prefix) + std::to_string(table.size()));
  return table;
}

/// Extracts features for whole sentences. Cluster posteriors are memoized
/// per word, so an extractor is cheap to reuse but must not be shared
/// between threads.
class FeatureExtractor {
 public:
  FeatureExtractor(FeatureModels models, FeatureConfig config) : models_(models), config_(config) {
    config_.validate();
    models_.check(config_);
    if (config_.ft_cluster) scorer_.emplace(*models_.gmm);
  }

  const FeatureConfig& config() const { return config_; }

  std::vector<double> cluster_posterior(const std::string& word) {
    auto it = cluster_cache_.find(word);
    if (it != cluster_cache_.end()) return it->second;
    const auto x = to_double(models_.gmm_input->word_vector(word));
    std::vector<double> p(models_.gmm->components);
    scorer_->joint_log_densities(x, p);
    const double norm = log_sum_exp(p);
    for (auto& v : p) v = std::exp(v - norm);
    return cluster_cache_.emplace(word, std::move(p)).first->second;
  }

  /// Embedding-derived features for token i; `sentence_mean` is the
  /// precomputed sentence vector when that family is enabled.
  FeatureVector embedding_features(std::span<const Token> sentence, std::size_t i,
                                   std::span<const double> sentence_mean) {
    if (i >= sentence.size()) throw Error(ErrorKind::IndexOutOfRange, "position " + std::to_string(i));
    FeatureVector fv;
    const auto& word = sentence[i].text;
    if (config_.ft_word) {
      const auto v = models_.word->word_vector(word);
      const auto& names = indexed_names("ft_wo_", v.size());
      for (std::size_t k = 0; k < v.size(); ++k) fv.add(names[k], v[k]);
    }
    if (config_.ft_cluster) {
      const auto p = cluster_posterior(word);
      const auto& names = indexed_names("ft_wo_c", p.size());
      for (std::size_t k = 0; k < p.size(); ++k) fv.add(names[k], p[k]);
    }
    if (config_.ft_sentence) {
      const auto& names = indexed_names("ft_sen_", sentence_mean.size());
      for (std::size_t k = 0; k < sentence_mean.size(); ++k) fv.add(names[k], sentence_mean[k]);
    }
    return fv;
  }

  std::vector<double> sentence_mean(std::span<const Token> sentence) const {
    if (!config_.ft_sentence) return {};
    std::vector<std::string> words;
    words.reserve(sentence.size());
    for (const auto& t : sentence) words.push_back(t.text);
    return sentence_vector(*models_.sentence, words);
  }

  std::vector<FeatureVector> extract(std::span<const Token> sentence) {
    if (sentence.empty()) throw Error(ErrorKind::EmptySentence, "cannot extract features of an empty sentence");
    const auto mean = sentence_mean(sentence);
    std::vector<FeatureVector> out(sentence.size());
    for (std::size_t i = 0; i < sentence.size(); ++i) {
      if (config_.handcrafted) out[i] = handcrafted_features(sentence, i);
      if (config_.ft_word || config_.ft_cluster || config_.ft_sentence) {
        out[i].append(embedding_features(sentence, i, mean));
      }
    }
    return out;
  }

 private:
  FeatureModels models_;
  FeatureConfig config_;
  std::optional<GmmScorer> scorer_;
  std::unordered_map<std::string, std::vector<double>> cluster_cache_;
};

inline FeatureVector embedding_features(const FeatureModels& models, std::span<const Token> sentence, std::size_t i,
                                        const FeatureConfig& config) {
  FeatureConfig embedding_only = config;
  embedding_only.handcrafted = false;
  if (!(embedding_only.ft_word || embedding_only.ft_cluster || embedding_only.ft_sentence)) {
    if (i >= sentence.size()) throw Error(ErrorKind::IndexOutOfRange, "position " + std::to_string(i));
    return {};
  }
  FeatureExtractor fx(models, embedding_only);
  return fx.embedding_features(sentence, i, fx.sentence_mean(sentence));
}

inline std::vector<FeatureVector> assemble_features(std::span<const Token> sentence, const FeatureModels& models,
                                                    const FeatureConfig& config) {
  return FeatureExtractor(models, config).extract(sentence);
}

}  // namespace tweetner
