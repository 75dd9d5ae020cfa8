#pragma once

// Chunk-level and tag-level scoring of IOB predictions, and the
// cross-validated regularization search.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "tweetner/crf.hpp"
#include "tweetner/error.hpp"
#include "tweetner/rng.hpp"

namespace tweetner {

struct Chunk {
  std::string type;
  std::size_t start = 0;  // inclusive
  std::size_t end = 0;    // exclusive

  friend auto operator<=>(const Chunk&, const Chunk&) = default;
};

using LabelSequence = std::vector<std::string>;

/// Maximal typed spans. A chunk opens at B-t, or at I-t when the previous
/// token is not part of a t chunk, and extends over the following I-t.
/// Anything that is not B-/I- acts as O.
inline std::vector<Chunk> extract_chunks(std::span<const std::string> labels) {
  std::vector<Chunk> out;
  bool open = false;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const std::string_view tag = labels[i];
    const bool begin = tag.starts_with("B-") && tag.size() > 2;
    const bool inside = tag.starts_with("I-") && tag.size() > 2;
    if (!begin && !inside) {
      open = false;
      continue;
    }
    const std::string_view type = tag.substr(2);
    if (inside && open && out.back().type == type) {
      out.back().end = i + 1;
      continue;
    }
    out.push_back({std::string(type), i, i + 1});
    open = true;
  }
  return out;
}

struct Scores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;  // gold count
};

inline double f1_score(double precision, double recall) {
  return precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
}

/// Zero whenever a denominator is zero.
inline Scores make_scores(std::size_t true_pos, std::size_t predicted, std::size_t gold) {
  Scores s;
  s.precision = predicted == 0 ? 0.0 : static_cast<double>(true_pos) / static_cast<double>(predicted);
  s.recall = gold == 0 ? 0.0 : static_cast<double>(true_pos) / static_cast<double>(gold);
  s.f1 = f1_score(s.precision, s.recall);
  s.support = gold;
  return s;
}

struct ChunkReport {
  std::map<std::string, Scores> per_type;
  Scores micro;
};

namespace detail {

inline void check_shapes(std::span<const LabelSequence> gold, std::span<const LabelSequence> pred) {
  if (gold.size() != pred.size()) {
    throw Error(ErrorKind::ShapeMismatch, std::to_string(gold.size()) + " gold vs " + std::to_string(pred.size()) +
                                              " predicted sentences");
  }
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i].size() != pred[i].size()) {
      throw Error(ErrorKind::ShapeMismatch, "sentence " + std::to_string(i) + " differs in length");
    }
  }
}

}  // namespace detail

inline ChunkReport chunk_prf(std::span<const LabelSequence> gold, std::span<const LabelSequence> pred) {
  detail::check_shapes(gold, pred);
  struct Counts {
    std::size_t tp = 0, predicted = 0, gold = 0;
  };
  std::map<std::string, Counts> counts;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    const auto g = extract_chunks(gold[s]);
    const auto p = extract_chunks(pred[s]);
    const std::set<Chunk> gold_set(g.begin(), g.end());
    for (const auto& c : g) ++counts[c.type].gold;
    for (const auto& c : p) {
      auto& k = counts[c.type];
      ++k.predicted;
      if (gold_set.contains(c)) ++k.tp;
    }
  }
  ChunkReport report;
  Counts total;
  for (const auto& [type, k] : counts) {
    report.per_type[type] = make_scores(k.tp, k.predicted, k.gold);
    total.tp += k.tp;
    total.predicted += k.predicted;
    total.gold += k.gold;
  }
  report.micro = make_scores(total.tp, total.predicted, total.gold);
  return report;
}

struct TagScores {
  std::string tag;
  Scores scores;
};

/// Token-level precision/recall/F1 for every tag other than "O" that occurs
/// in gold or predictions, ordered by entity type and then B before I.
inline std::vector<TagScores> per_tag_report(std::span<const LabelSequence> gold, std::span<const LabelSequence> pred) {
  detail::check_shapes(gold, pred);
  struct Counts {
    std::size_t tp = 0, predicted = 0, gold = 0;
  };
  auto key = [](const std::string& tag) {
    return tag.size() > 2 ? std::make_pair(tag.substr(2), tag.substr(0, 1)) : std::make_pair(tag, std::string());
  };
  std::map<std::pair<std::string, std::string>, std::pair<std::string, Counts>> counts;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    for (std::size_t i = 0; i < gold[s].size(); ++i) {
      const auto& g = gold[s][i];
      const auto& p = pred[s][i];
      if (g != "O") {
        auto& slot = counts[key(g)];
        slot.first = g;
        ++slot.second.gold;
        if (p == g) ++slot.second.tp;
      }
      if (p != "O") {
        auto& slot = counts[key(p)];
        slot.first = p;
        ++slot.second.predicted;
      }
    }
  }
  std::vector<TagScores> out;
  for (const auto& [k, entry] : counts) {
    const auto& c = entry.second;
    out.push_back({entry.first, make_scores(c.tp, c.predicted, c.gold)});
  }
  return out;
}

/// Fraction of sentences predicted exactly.
inline double sequence_accuracy(std::span<const LabelSequence> gold, std::span<const LabelSequence> pred) {
  detail::check_shapes(gold, pred);
  if (gold.empty()) return 0.0;
  std::size_t exact = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) exact += gold[i] == pred[i] ? 1 : 0;
  return static_cast<double>(exact) / static_cast<double>(gold.size());
}

struct GridCell {
  double c1 = 0.0;
  double c2 = 0.0;
  double score = 0.0;  // cross-validated sequence accuracy
};

struct GridSearchResult {
  double best_c1 = 0.0;
  double best_c2 = 0.0;
  std::vector<GridCell> table;  // c1-major, in candidate order
};

/// Fold of each of n items: a seeded shuffle dealt round-robin into k folds.
inline std::vector<std::size_t> assign_folds(std::size_t n, std::size_t folds, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.uniform_int(i)]);
  std::vector<std::size_t> fold(n);
  for (std::size_t i = 0; i < n; ++i) fold[order[i]] = i % folds;
  return fold;
}

/// k-fold cross-validated sequence accuracy of every (c1, c2) pair, pooled
/// over all held-out sentences. Ties prefer the smaller c1, then the
/// smaller c2.
inline GridSearchResult grid_search(std::span<const FeatureSequence> data, std::span<const double> c1_candidates,
                                    std::span<const double> c2_candidates, std::size_t folds, std::uint64_t seed,
                                    TrainConfig base = {}) {
  if (c1_candidates.empty() || c2_candidates.empty()) throw Error(ErrorKind::InvalidParams, "empty candidate list");
  if (folds < 2) throw Error(ErrorKind::InvalidParams, "need at least two folds");
  if (data.size() < folds) throw Error(ErrorKind::EmptyDataset, "fewer sentences than folds");
  const auto fold_of = assign_folds(data.size(), folds, seed);

  std::vector<CrfProblem> train(folds);
  std::vector<std::vector<std::size_t>> held_out(folds);
  for (std::size_t f = 0; f < folds; ++f) {
    std::vector<FeatureSequence> part;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (fold_of[i] == f) held_out[f].push_back(i);
      else part.push_back(data[i]);
    }
    train[f] = make_problem(part);
  }

  GridSearchResult result;
  for (double c1 : c1_candidates) {
    for (double c2 : c2_candidates) {
      TrainConfig config = base;
      config.c1 = c1;
      config.c2 = c2;
      std::size_t exact = 0;
      for (std::size_t f = 0; f < folds; ++f) {
        const CrfModel model = fit_crf(train[f], config).model;
        for (auto i : held_out[f]) {
          if (tag(model, data[i].features) == data[i].labels) ++exact;
        }
      }
      result.table.push_back({c1, c2, static_cast<double>(exact) / static_cast<double>(data.size())});
    }
  }
  const GridCell* best = &result.table.front();
  for (const auto& cell : result.table) {
    const auto rank = [](const GridCell& c) { return std::make_tuple(-c.score, c.c1, c.c2); };
    if (rank(cell) < rank(*best)) best = &cell;
  }
  result.best_c1 = best->c1;
  result.best_c2 = best->c2;
  return result;
}

}  // namespace tweetner
