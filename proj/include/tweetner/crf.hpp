#pragma once

// Linear-chain conditional random field.
//
// score(x, y) = sum_i [ sum_f v_i(f) W[f, y_i] + T[y_{i-1}, y_i] (i > 0) ]
//               + S[y_0] + E[y_{n-1}]
//
// W are state weights over (observation feature, label), T label
// transitions, S and E the sentence start and end transitions. All
// inference runs in log space.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <exception>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <vector>

#include "tweetner/binary_io.hpp"
#include "tweetner/error.hpp"
#include "tweetner/features.hpp"
#include "tweetner/lbfgs.hpp"
#include "tweetner/matrix.hpp"

namespace tweetner {

/// Observation features of a sentence as sparse (id, value) rows, plus the
/// label ids when the sentence is labeled.
struct CompiledSequence {
  std::vector<std::uint32_t> offsets{0};
  std::vector<std::uint32_t> ids;
  std::vector<double> values;
  std::vector<std::uint32_t> labels;

  std::size_t size() const { return offsets.size() - 1; }

  void add_position() { offsets.push_back(static_cast<std::uint32_t>(ids.size())); }
  void add_feature(std::uint32_t id, double value) {
    ids.push_back(id);
    values.push_back(value);
  }
};

/// Index arithmetic of the flat weight vector [W | T | S | E].
struct CrfLayout {
  std::size_t features = 0;
  std::size_t labels = 0;

  std::size_t state(std::size_t f, std::size_t y) const { return f * labels + y; }
  std::size_t transition(std::size_t a, std::size_t b) const { return features * labels + a * labels + b; }
  std::size_t start(std::size_t y) const { return features * labels + labels * labels + y; }
  std::size_t end(std::size_t y) const { return features * labels + labels * labels + labels + y; }
  std::size_t size() const { return features * labels + labels * labels + 2 * labels; }
};

class CrfModel {
 public:
  CrfModel() = default;
  CrfModel(std::vector<std::string> labels, std::vector<std::string> features)
      : labels_(std::move(labels)), features_(std::move(features)) {
    if (labels_.empty()) throw Error(ErrorKind::InvalidParams, "a CRF needs at least one label");
    if (std::find(labels_.begin(), labels_.end(), "O") == labels_.end()) {
      throw Error(ErrorKind::InvalidParams, "label set must contain \"O\"");
    }
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      if (!label_index_.emplace(labels_[i], static_cast<std::uint32_t>(i)).second) {
        throw Error(ErrorKind::InvalidParams, "duplicate label '" + labels_[i] + "'");
      }
    }
    for (std::size_t i = 0; i < features_.size(); ++i) {
      if (!feature_index_.emplace(features_[i], static_cast<std::uint32_t>(i)).second) {
        throw Error(ErrorKind::InvalidParams, "duplicate feature '" + features_[i] + "'");
      }
    }
    weights_.assign(layout().size(), 0.0);
  }

  CrfLayout layout() const { return {features_.size(), labels_.size()}; }
  std::size_t num_labels() const { return labels_.size(); }
  std::size_t num_features() const { return features_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::vector<std::string>& features() const { return features_; }

  std::optional<std::uint32_t> find_label(std::string_view label) const {
    const auto it = label_index_.find(std::string(label));
    if (it == label_index_.end()) return std::nullopt;
    return it->second;
  }
  std::optional<std::uint32_t> find_feature(std::string_view name) const {
    const auto it = feature_index_.find(std::string(name));
    if (it == feature_index_.end()) return std::nullopt;
    return it->second;
  }

  std::span<double> weights() { return weights_; }
  std::span<const double> weights() const { return weights_; }
  void set_weights(std::vector<double> w) {
    if (w.size() != weights_.size()) throw Error(ErrorKind::LengthMismatch, "weight vector size");
    weights_ = std::move(w);
  }

  double& state(std::size_t f, std::size_t y) { return weights_[layout().state(f, y)]; }
  double& transition(std::size_t a, std::size_t b) { return weights_[layout().transition(a, b)]; }
  double& start(std::size_t y) { return weights_[layout().start(y)]; }
  double& end(std::size_t y) { return weights_[layout().end(y)]; }
  double state(std::size_t f, std::size_t y) const { return weights_[layout().state(f, y)]; }
  double transition(std::size_t a, std::size_t b) const { return weights_[layout().transition(a, b)]; }
  double start(std::size_t y) const { return weights_[layout().start(y)]; }
  double end(std::size_t y) const { return weights_[layout().end(y)]; }

  /// Weight of (feature, label); zero for features the model never saw.
  double state_weight(std::string_view feature, std::string_view label) const {
    const auto y = label_id(label);
    const auto f = find_feature(feature);
    return f ? state(*f, y) : 0.0;
  }

  std::uint32_t label_id(std::string_view label) const {
    const auto id = find_label(label);
    if (!id) throw Error(ErrorKind::UnknownLabel, "'" + std::string(label) + "'");
    return *id;
  }

  std::vector<std::uint32_t> label_ids(std::span<const std::string> labels) const {
    std::vector<std::uint32_t> out;
    out.reserve(labels.size());
    for (const auto& l : labels) out.push_back(label_id(l));
    return out;
  }

  std::vector<std::string> label_names(std::span<const std::uint32_t> ids) const {
    std::vector<std::string> out;
    out.reserve(ids.size());
    for (auto id : ids) out.push_back(labels_.at(id));
    return out;
  }

  /// Features the model does not know are dropped.
  CompiledSequence compile(std::span<const FeatureVector> features) const {
    CompiledSequence seq;
    for (const auto& fv : features) {
      for (const auto& [name, value] : fv) {
        if (const auto id = find_feature(name)) seq.add_feature(*id, value);
      }
      seq.add_position();
    }
    return seq;
  }

  double c1 = 0.0;
  double c2 = 0.0;
  std::map<std::string, std::string> metadata;

  friend bool operator==(const CrfModel& a, const CrfModel& b) {
    return a.labels_ == b.labels_ && a.features_ == b.features_ && a.weights_ == b.weights_ && a.c1 == b.c1 &&
           a.c2 == b.c2 && a.metadata == b.metadata;
  }

 private:
  std::vector<std::string> labels_;
  std::vector<std::string> features_;
  std::unordered_map<std::string, std::uint32_t> label_index_;
  std::unordered_map<std::string, std::uint32_t> feature_index_;
  std::vector<double> weights_;
};

namespace crf_detail {

inline void check_sequence(const CrfLayout& lay, const CompiledSequence& seq) {
  if (seq.size() == 0) throw Error(ErrorKind::LengthMismatch, "empty sequence");
  if (!seq.labels.empty() && seq.labels.size() != seq.size()) {
    throw Error(ErrorKind::LengthMismatch, "label count differs from sequence length");
  }
  for (auto y : seq.labels)
    if (y >= lay.labels) throw Error(ErrorKind::UnknownLabel, "label id " + std::to_string(y));
}

/// n x L matrix of per-position label scores, start/end folded in.
inline DenseMatrix<double> node_scores(const CrfLayout& lay, std::span<const double> w, const CompiledSequence& seq) {
  const std::size_t n = seq.size(), L = lay.labels;
  DenseMatrix<double> node(n, L);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = node.row(i);
    for (std::uint32_t k = seq.offsets[i]; k < seq.offsets[i + 1]; ++k) {
      const double v = seq.values[k];
      const double* wf = w.data() + lay.state(seq.ids[k], 0);
      for (std::size_t y = 0; y < L; ++y) row[y] += v * wf[y];
    }
  }
  for (std::size_t y = 0; y < L; ++y) {
    node(0, y) += w[lay.start(y)];
    node(n - 1, y) += w[lay.end(y)];
  }
  return node;
}

inline double path_score(const CrfLayout& lay, std::span<const double> w, const DenseMatrix<double>& node,
                         std::span<const std::uint32_t> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    s += node(i, y[i]);
    if (i > 0) s += w[lay.transition(y[i - 1], y[i])];
  }
  return s;
}

struct Lattice {
  DenseMatrix<double> node, alpha, beta;
  double log_z = 0.0;
};

inline Lattice forward_backward(const CrfLayout& lay, std::span<const double> w, const CompiledSequence& seq) {
  const std::size_t n = seq.size(), L = lay.labels;
  Lattice lat{node_scores(lay, w, seq), DenseMatrix<double>(n, L), DenseMatrix<double>(n, L), 0.0};
  std::vector<double> buf(L);
  for (std::size_t y = 0; y < L; ++y) lat.alpha(0, y) = lat.node(0, y);
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t b = 0; b < L; ++b) {
      for (std::size_t a = 0; a < L; ++a) buf[a] = lat.alpha(i - 1, a) + w[lay.transition(a, b)];
      lat.alpha(i, b) = lat.node(i, b) + log_sum_exp(buf);
    }
  }
  for (std::size_t i = n - 1; i-- > 0;) {
    for (std::size_t a = 0; a < L; ++a) {
      for (std::size_t b = 0; b < L; ++b) buf[b] = w[lay.transition(a, b)] + lat.node(i + 1, b) + lat.beta(i + 1, b);
      lat.beta(i, a) = log_sum_exp(buf);
    }
  }
  lat.log_z = log_sum_exp(lat.alpha.row(n - 1));
  return lat;
}

}  // namespace crf_detail

inline double sequence_score(const CrfModel& model, const CompiledSequence& seq, std::span<const std::uint32_t> y) {
  const auto lay = model.layout();
  crf_detail::check_sequence(lay, seq);
  if (y.size() != seq.size()) throw Error(ErrorKind::LengthMismatch, "label sequence length");
  for (auto l : y)
    if (l >= lay.labels) throw Error(ErrorKind::UnknownLabel, "label id " + std::to_string(l));
  return crf_detail::path_score(lay, model.weights(), crf_detail::node_scores(lay, model.weights(), seq), y);
}

inline double sequence_score(const CrfModel& model, std::span<const FeatureVector> features,
                             std::span<const std::string> labels) {
  if (features.size() != labels.size()) throw Error(ErrorKind::LengthMismatch, "features and labels differ in length");
  return sequence_score(model, model.compile(features), model.label_ids(labels));
}

inline double log_partition(const CrfModel& model, const CompiledSequence& seq) {
  crf_detail::check_sequence(model.layout(), seq);
  return crf_detail::forward_backward(model.layout(), model.weights(), seq).log_z;
}

inline double log_partition(const CrfModel& model, std::span<const FeatureVector> features) {
  return log_partition(model, model.compile(features));
}

inline double sequence_log_prob(const CrfModel& model, const CompiledSequence& seq, std::span<const std::uint32_t> y) {
  return sequence_score(model, seq, y) - log_partition(model, seq);
}

inline double sequence_log_prob(const CrfModel& model, std::span<const FeatureVector> features,
                                std::span<const std::string> labels) {
  const auto seq = model.compile(features);
  return sequence_log_prob(model, seq, model.label_ids(labels));
}

struct Marginals {
  DenseMatrix<double> node;             // n x L, P(y_i = y)
  std::vector<DenseMatrix<double>> edge;  // n-1 matrices, P(y_{i-1} = a, y_i = b)
  double log_z = 0.0;
};

inline Marginals marginals(const CrfModel& model, const CompiledSequence& seq) {
  const auto lay = model.layout();
  crf_detail::check_sequence(lay, seq);
  const auto w = model.weights();
  const auto lat = crf_detail::forward_backward(lay, w, seq);
  const std::size_t n = seq.size(), L = lay.labels;
  Marginals m{DenseMatrix<double>(n, L), {}, lat.log_z};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t y = 0; y < L; ++y) m.node(i, y) = std::exp(lat.alpha(i, y) + lat.beta(i, y) - lat.log_z);
  for (std::size_t i = 1; i < n; ++i) {
    DenseMatrix<double> e(L, L);
    for (std::size_t a = 0; a < L; ++a)
      for (std::size_t b = 0; b < L; ++b)
        e(a, b) = std::exp(lat.alpha(i - 1, a) + w[lay.transition(a, b)] + lat.node(i, b) + lat.beta(i, b) - lat.log_z);
    m.edge.push_back(std::move(e));
  }
  return m;
}

struct ViterbiResult {
  std::vector<std::uint32_t> path;
  double score = 0.0;
};

/// Highest-scoring label sequence. Among equally scored paths the
/// lexicographically smallest label-id sequence wins.
inline ViterbiResult viterbi(const CrfModel& model, const CompiledSequence& seq) {
  const auto lay = model.layout();
  crf_detail::check_sequence(lay, seq);
  const auto w = model.weights();
  const std::size_t n = seq.size(), L = lay.labels;
  const auto node = crf_detail::node_scores(lay, w, seq);
  // best(i, y): best score of positions i..n-1 given y_i = y.
  DenseMatrix<double> best(n, L);
  for (std::size_t y = 0; y < L; ++y) best(n - 1, y) = node(n - 1, y);
  for (std::size_t i = n - 1; i-- > 0;) {
    for (std::size_t a = 0; a < L; ++a) {
      double m = -std::numeric_limits<double>::infinity();
      for (std::size_t b = 0; b < L; ++b) m = std::max(m, w[lay.transition(a, b)] + best(i + 1, b));
      best(i, a) = node(i, a) + m;
    }
  }
  ViterbiResult r;
  r.path.resize(n);
  auto argmax = [L](auto&& value) {
    std::uint32_t arg = 0;
    double top = value(0);
    for (std::uint32_t y = 1; y < L; ++y) {
      const double v = value(y);
      if (v > top) top = v, arg = y;
    }
    return arg;
  };
  r.path[0] = argmax([&](std::size_t y) { return best(0, y); });
  for (std::size_t i = 1; i < n; ++i) {
    const auto prev = r.path[i - 1];
    r.path[i] = argmax([&](std::size_t y) { return w[lay.transition(prev, y)] + best(i, y); });
  }
  r.score = crf_detail::path_score(lay, w, node, r.path);
  return r;
}

inline std::vector<std::string> tag(const CrfModel& model, std::span<const FeatureVector> features) {
  return model.label_names(viterbi(model, model.compile(features)).path);
}

struct CrfObjective {
  double value = 0.0;         // -sum log p + c1 |w|_1 + c2 |w|^2
  double smooth_value = 0.0;  // without the L1 term
  std::vector<double> gradient;  // of the smooth part
};

namespace crf_detail {

// Adds sum_s (log Z_s - score_s) to the return value and
// E[counts] - empirical counts into grad, for sequences [begin, end).
inline double accumulate_nll(const CrfLayout& lay, std::span<const double> w, std::span<const CompiledSequence> data,
                             std::span<double> grad) {
  const std::size_t L = lay.labels;
  double nll = 0.0;
  std::vector<double> pnode(L);
  for (const auto& seq : data) {
    check_sequence(lay, seq);
    if (seq.labels.empty()) throw Error(ErrorKind::LengthMismatch, "training sequence without labels");
    const std::size_t n = seq.size();
    const auto lat = forward_backward(lay, w, seq);
    nll += lat.log_z - path_score(lay, w, lat.node, seq.labels);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t y = 0; y < L; ++y) pnode[y] = std::exp(lat.alpha(i, y) + lat.beta(i, y) - lat.log_z);
      const auto gold = seq.labels[i];
      for (std::uint32_t k = seq.offsets[i]; k < seq.offsets[i + 1]; ++k) {
        const double v = seq.values[k];
        double* gf = grad.data() + lay.state(seq.ids[k], 0);
        for (std::size_t y = 0; y < L; ++y) gf[y] += v * pnode[y];
        gf[gold] -= v;
      }
      if (i == 0) {
        for (std::size_t y = 0; y < L; ++y) grad[lay.start(y)] += pnode[y];
        grad[lay.start(gold)] -= 1.0;
      }
      if (i + 1 == n) {
        for (std::size_t y = 0; y < L; ++y) grad[lay.end(y)] += pnode[y];
        grad[lay.end(gold)] -= 1.0;
      }
      if (i > 0) {
        for (std::size_t a = 0; a < L; ++a) {
          const double fa = lat.alpha(i - 1, a) - lat.log_z;
          for (std::size_t b = 0; b < L; ++b) {
            grad[lay.transition(a, b)] +=
                std::exp(fa + w[lay.transition(a, b)] + lat.node(i, b) + lat.beta(i, b));
          }
        }
        grad[lay.transition(seq.labels[i - 1], gold)] -= 1.0;
      }
    }
  }
  return nll;
}

// Unregularized NLL and gradient, split over `threads` contiguous blocks
// of sequences and summed in block order.
inline double nll(const CrfLayout& lay, std::span<const double> w, std::span<const CompiledSequence> data,
                  std::span<double> grad, unsigned threads) {
  std::fill(grad.begin(), grad.end(), 0.0);
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, data.size()))));
  if (threads == 1) return accumulate_nll(lay, w, data, grad);
  std::vector<std::vector<double>> partial(threads, std::vector<double>(grad.size(), 0.0));
  std::vector<double> values(threads, 0.0);
  std::vector<std::exception_ptr> errors(threads);
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        const std::size_t b = data.size() * t / threads, e = data.size() * (t + 1) / threads;
        try {
          values[t] = accumulate_nll(lay, w, data.subspan(b, e - b), partial[t]);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  double total = 0.0;
  for (unsigned t = 0; t < threads; ++t) {
    total += values[t];
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += partial[t][i];
  }
  return total;
}

}  // namespace crf_detail

/// Elastic-net regularized negative log-likelihood of `data` at the model's
/// weights, with c1/c2 taken from the model.
inline CrfObjective nll_and_gradient(const CrfModel& model, std::span<const CompiledSequence> data,
                                     unsigned threads = 1) {
  if (data.empty()) throw Error(ErrorKind::EmptyDataset, "no training sequences");
  const auto lay = model.layout();
  const auto w = model.weights();
  CrfObjective obj;
  obj.gradient.assign(w.size(), 0.0);
  double value = crf_detail::nll(lay, w, data, obj.gradient, threads);
  double l1 = 0.0, l2 = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    l1 += std::abs(w[i]);
    l2 += w[i] * w[i];
    obj.gradient[i] += 2.0 * model.c2 * w[i];
  }
  obj.smooth_value = value + model.c2 * l2;
  obj.value = obj.smooth_value + model.c1 * l1;
  return obj;
}

struct TrainConfig {
  double c1 = 1e-4;
  double c2 = 0.3;
  std::size_t max_iterations = 100;
  double tol = 1e-7;
  std::size_t window = 5;
  std::size_t memory = 6;
  unsigned threads = 1;

  void validate() const {
    if (!(c1 >= 0.0) || !(c2 >= 0.0)) throw Error(ErrorKind::InvalidParams, "c1 and c2 must be non-negative");
    if (max_iterations < 1) throw Error(ErrorKind::InvalidParams, "max_iterations must be >= 1");
  }
};

/// Training data in compiled form: label and feature tables plus sequences.
struct CrfProblem {
  std::vector<std::string> labels;
  std::vector<std::string> features;
  std::vector<CompiledSequence> sequences;
};

/// Interns features and labels sentence by sentence. Labels are numbered in
/// order of first appearance; "O" is appended when the data never uses it.
class CrfProblemBuilder {
 public:
  void add(std::span<const FeatureVector> features, std::span<const std::string> labels) {
    if (features.empty()) throw Error(ErrorKind::LengthMismatch, "empty training sequence");
    if (features.size() != labels.size()) throw Error(ErrorKind::LengthMismatch, "features and labels differ in length");
    CompiledSequence seq;
    for (std::size_t i = 0; i < features.size(); ++i) {
      for (const auto& [name, value] : features[i]) seq.add_feature(intern(feature_index_, problem_.features, name), value);
      seq.add_position();
      seq.labels.push_back(intern(label_index_, problem_.labels, labels[i]));
    }
    problem_.sequences.push_back(std::move(seq));
  }

  CrfProblem finish() && {
    if (!label_index_.contains("O")) problem_.labels.push_back("O");
    return std::move(problem_);
  }

 private:
  static std::uint32_t intern(std::unordered_map<std::string, std::uint32_t>& index, std::vector<std::string>& names,
                              const std::string& name) {
    const auto [it, inserted] = index.emplace(name, static_cast<std::uint32_t>(names.size()));
    if (inserted) names.push_back(name);
    return it->second;
  }

  CrfProblem problem_;
  std::unordered_map<std::string, std::uint32_t> feature_index_;
  std::unordered_map<std::string, std::uint32_t> label_index_;
};

struct CrfFit {
  CrfModel model;
  std::vector<double> trace;  // objective after each accepted step
  std::size_t iterations = 0;
  StopReason reason = StopReason::MaxIterations;
};

/// Minimizes the elastic-net objective from zero weights: OWL-QN when
/// c1 > 0, L-BFGS otherwise.
inline CrfFit fit_crf(const CrfProblem& problem, const TrainConfig& config) {
  config.validate();
  if (problem.sequences.empty()) throw Error(ErrorKind::EmptyDataset, "no training sequences");
  CrfFit fit{CrfModel(problem.labels, problem.features), {}, 0, StopReason::MaxIterations};
  fit.model.c1 = config.c1;
  fit.model.c2 = config.c2;
  const auto lay = fit.model.layout();
  const std::span<const CompiledSequence> data = problem.sequences;

  SmoothObjective objective = [&](std::span<const double> w, std::span<double> grad) {
    double value = crf_detail::nll(lay, w, data, grad, config.threads);
    for (std::size_t i = 0; i < w.size(); ++i) {
      value += config.c2 * w[i] * w[i];
      grad[i] += 2.0 * config.c2 * w[i];
    }
    return value;
  };
  QuasiNewtonOptions opt;
  opt.l1 = config.c1;
  opt.max_iterations = config.max_iterations;
  opt.memory = config.memory;
  opt.tol = config.tol;
  opt.window = config.window;
  auto result = minimize_quasi_newton(objective, std::vector<double>(lay.size(), 0.0), opt);
  for (double v : result.x) {
    if (!std::isfinite(v)) throw Error(ErrorKind::NonFiniteObjective, "training produced non-finite weights");
  }
  fit.model.set_weights(std::move(result.x));
  fit.trace = std::move(result.trace);
  fit.iterations = result.iterations;
  fit.reason = result.reason;
  return fit;
}

/// One labeled training sentence in feature form.
struct FeatureSequence {
  std::vector<FeatureVector> features;
  std::vector<std::string> labels;
};

inline CrfProblem make_problem(std::span<const FeatureSequence> dataset) {
  CrfProblemBuilder builder;
  for (const auto& s : dataset) builder.add(s.features, s.labels);
  return std::move(builder).finish();
}

inline CrfModel train_crf(std::span<const FeatureSequence> dataset, const TrainConfig& config) {
  if (dataset.empty()) throw Error(ErrorKind::EmptyDataset, "no training sequences");
  return fit_crf(make_problem(dataset), config).model;
}

struct WeightEntry {
  double weight = 0.0;
  std::string label;
  std::string feature;
};

enum class WeightOrder { Highest, Lowest };

/// Names used for non-state weights in reports.
inline std::string transition_feature_name(std::string_view from) { return "label[-1]=" + std::string(from); }
inline constexpr std::string_view kStartFeature = "label[-1]=<s>";
inline constexpr std::string_view kEndFeature = "label[+1]=</s>";

/// The k most extreme weights. Equal weights keep their storage order
/// (state weights by feature then label, transitions, start, end).
inline std::vector<WeightEntry> top_weights(const CrfModel& model, std::size_t k, WeightOrder order) {
  if (k < 1) throw Error(ErrorKind::InvalidParams, "k must be >= 1");
  const auto lay = model.layout();
  const auto w = model.weights();
  std::vector<std::size_t> idx(w.size());
  std::iota(idx.begin(), idx.end(), 0);
  if (order == WeightOrder::Highest) {
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return w[a] > w[b]; });
  } else {
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return w[a] < w[b]; });
  }
  idx.resize(std::min(k, idx.size()));
  const std::size_t L = lay.labels;
  std::vector<WeightEntry> out;
  for (auto i : idx) {
    WeightEntry e{w[i], {}, {}};
    if (i < lay.transition(0, 0)) {
      e.feature = model.features()[i / L];
      e.label = model.labels()[i % L];
    } else if (i < lay.start(0)) {
      const auto j = i - lay.transition(0, 0);
      e.feature = transition_feature_name(model.labels()[j / L]);
      e.label = model.labels()[j % L];
    } else if (i < lay.end(0)) {
      e.feature = kStartFeature;
      e.label = model.labels()[i - lay.start(0)];
    } else {
      e.feature = kEndFeature;
      e.label = model.labels()[i - lay.end(0)];
    }
    out.push_back(std::move(e));
  }
  return out;
}

inline std::size_t count_zero_weights(const CrfModel& model) {
  const auto w = model.weights();
  return static_cast<std::size_t>(std::count(w.begin(), w.end(), 0.0));
}

inline constexpr std::uint32_t kCrfFormatVersion = 1;

inline void save_crf(const CrfModel& m, std::ostream& out) {
  binary::Writer w(out);
  w.magic("CRF1");
  w.put<std::uint32_t>(kCrfFormatVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(m.num_labels()));
  for (const auto& l : m.labels()) w.str(l);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(m.num_features()));
  for (const auto& f : m.features()) w.str(f);
  w.put<std::uint64_t>(m.weights().size());
  w.array<double>(m.weights());
  w.put<double>(m.c1);
  w.put<double>(m.c2);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(m.metadata.size()));
  for (const auto& [k, v] : m.metadata) {
    w.str(k);
    w.str(v);
  }
  w.finish();
}

inline CrfModel load_crf(std::istream& in) {
  binary::Reader r(in);
  r.expect_magic("CRF1");
  const auto version = r.get<std::uint32_t>();
  if (version != kCrfFormatVersion) throw Error(ErrorKind::VersionMismatch, "CRF format version " + std::to_string(version));
  auto read_table = [&] {
    const auto n = r.get<std::uint32_t>();
    r.require(std::size_t{n} * 4);
    std::vector<std::string> names(n);
    for (auto& s : names) s = r.str();
    return names;
  };
  auto labels = read_table();
  auto features = read_table();
  CrfModel m;
  try {
    m = CrfModel(std::move(labels), std::move(features));
  } catch (const Error& e) {
    throw Error(ErrorKind::CorruptFile, e.what());
  }
  const auto count = r.get<std::uint64_t>();
  if (count != m.weights().size()) throw Error(ErrorKind::CorruptFile, "weight count does not match tables");
  r.require(count * sizeof(double));
  r.array<double>(m.weights());
  m.c1 = r.get<double>();
  m.c2 = r.get<double>();
  const auto meta = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < meta; ++i) {
    auto k = r.str();
    m.metadata[k] = r.str();
  }
  r.expect_end();
  return m;
}

inline void save_crf(const CrfModel& m, const std::string& path) {
  auto out = binary::open_out(path);
  save_crf(m, out);
}

inline CrfModel load_crf(const std::string& path) {
  auto in = binary::open_in(path);
  return load_crf(in);
}

}  // namespace tweetner
