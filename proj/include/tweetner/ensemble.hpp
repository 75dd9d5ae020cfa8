#pragma once

// Majority vote over whole label sequences from independently trained
// pipelines that differ only in the seeds of their embedding models.

#include <algorithm>
#include <cstdint>
#include <exception>
#include <set>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "tweetner/error.hpp"
#include "tweetner/pipeline.hpp"

namespace tweetner {

struct EnsembleSpec {
  std::vector<std::uint64_t> seeds;  // one per pipeline, distinct
  PipelineConfig config;

  std::size_t size() const { return seeds.size(); }

  void validate() const {
    if (seeds.empty()) throw Error(ErrorKind::InvalidParams, "an ensemble needs at least one model");
    if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) {
      throw Error(ErrorKind::InvalidParams, "ensemble seeds must be distinct");
    }
  }

  /// Seeds master, master+1, ..., master+n-1.
  static EnsembleSpec consecutive(std::size_t n, std::uint64_t master, PipelineConfig config = {}) {
    EnsembleSpec spec;
    for (std::size_t i = 0; i < n; ++i) spec.seeds.push_back(master + i);
    spec.config = std::move(config);
    return spec;
  }
};

/// The most frequent sequence. Ties go to the tied sequence first produced
/// by the lowest model index.
inline std::vector<std::string> vote(std::span<const std::vector<std::string>> predictions) {
  if (predictions.empty()) throw Error(ErrorKind::InvalidParams, "no predictions to vote on");
  for (const auto& p : predictions) {
    if (p.size() != predictions.front().size()) throw Error(ErrorKind::LengthMismatch, "predictions differ in length");
  }
  std::size_t best = 0, best_count = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    std::size_t count = 0;
    for (const auto& p : predictions) count += p == predictions[i] ? 1 : 0;
    if (count > best_count) best = i, best_count = count;
  }
  return predictions[best];
}

/// Trains the pipelines on up to `threads` workers. Each pipeline is
/// itself single-threaded, so the result does not depend on `threads`.
inline std::vector<Pipeline> train_ensemble(const std::vector<LabeledSentence>& labeled, const TokenizedCorpus& corpus,
                                            const EnsembleSpec& spec, const std::vector<std::string>& extra_words = {},
                                            unsigned threads = 1) {
  spec.validate();
  std::vector<Pipeline> out(spec.size());
  std::vector<std::exception_ptr> errors(spec.size());
  auto train_one = [&](std::size_t i) {
    try {
      out[i] = train_pipeline(labeled, corpus, spec.config, spec.seeds[i], extra_words, 1);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(spec.size())));
  if (threads == 1) {
    for (std::size_t i = 0; i < spec.size(); ++i) train_one(i);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t i = t; i < spec.size(); i += threads) train_one(i);
      });
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

inline std::vector<std::vector<std::string>> ensemble_tag(std::span<const Pipeline> pipelines,
                                                          const std::vector<std::vector<Token>>& sentences,
                                                          unsigned threads = 1) {
  if (pipelines.empty()) throw Error(ErrorKind::InvalidParams, "empty ensemble");
  std::vector<std::vector<std::vector<std::string>>> per_model;
  per_model.reserve(pipelines.size());
  for (const auto& p : pipelines) per_model.push_back(p.tag(sentences, threads));
  std::vector<std::vector<std::string>> out(sentences.size());
  std::vector<std::vector<std::string>> candidates(pipelines.size());
  for (std::size_t s = 0; s < sentences.size(); ++s) {
    for (std::size_t m = 0; m < pipelines.size(); ++m) candidates[m] = per_model[m][s];
    out[s] = vote(candidates);
  }
  return out;
}

}  // namespace tweetner
