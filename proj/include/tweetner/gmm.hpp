#pragma once

// Diagonal-covariance Gaussian mixture fitted by EM. Word vectors are
// clustered with it and each word's vector of component posteriors becomes
// a feature family.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "tweetner/binary_io.hpp"
#include "tweetner/error.hpp"
#include "tweetner/matrix.hpp"
#include "tweetner/rng.hpp"

namespace tweetner {

using Points = DenseMatrix<double>;

inline double log_sum_exp(std::span<const double> xs) {
  double hi = -std::numeric_limits<double>::infinity();
  for (double x : xs) hi = std::max(hi, x);
  if (!std::isfinite(hi)) return hi;
  double sum = 0.0;
  for (double x : xs) sum += std::exp(x - hi);
  return hi + std::log(sum);
}

struct GmmModel {
  std::size_t components = 0;
  std::size_t dim = 0;
  std::vector<double> weights;  // K
  DenseMatrix<double> means;    // K x d
  DenseMatrix<double> variances;  // K x d

  friend bool operator==(const GmmModel&, const GmmModel&) = default;
};

/// Per-component constants for evaluating log densities of a fixed model.
class GmmScorer {
 public:
  explicit GmmScorer(const GmmModel& m) : m_(m), offset_(m.components), inv_var_(m.components, m.dim) {
    constexpr double log_two_pi = 1.8378770664093454835606594728112;
    for (std::size_t k = 0; k < m.components; ++k) {
      double acc = 0.0;
      for (std::size_t j = 0; j < m.dim; ++j) {
        acc += log_two_pi + std::log(m.variances(k, j));
        inv_var_(k, j) = 1.0 / m.variances(k, j);
      }
      offset_[k] = std::log(m.weights[k]) - 0.5 * acc;
    }
  }

  /// log(pi_k) + log N(x; mu_k, diag sigma2_k) for every component.
  void joint_log_densities(std::span<const double> x, std::span<double> out) const {
    if (x.size() != m_.dim) {
      throw Error(ErrorKind::DimensionMismatch,
                  "vector of dimension " + std::to_string(x.size()) + ", model expects " + std::to_string(m_.dim));
    }
    for (std::size_t k = 0; k < m_.components; ++k) {
      const auto mu = m_.means.row(k);
      const auto iv = inv_var_.row(k);
      double acc = 0.0;
      for (std::size_t j = 0; j < m_.dim; ++j) {
        const double diff = x[j] - mu[j];
        acc += diff * diff * iv[j];
      }
      out[k] = offset_[k] - 0.5 * acc;
    }
  }

 private:
  const GmmModel& m_;
  std::vector<double> offset_;
  DenseMatrix<double> inv_var_;
};

/// Responsibilities of each component for x, normalized in log space.
inline std::vector<double> posterior(const GmmModel& model, std::span<const double> x) {
  std::vector<double> logp(model.components);
  GmmScorer(model).joint_log_densities(x, logp);
  const double norm = log_sum_exp(logp);
  for (auto& v : logp) v = std::exp(v - norm);
  return logp;
}

inline double log_likelihood(const GmmModel& model, const Points& points) {
  if (points.cols() != model.dim) throw Error(ErrorKind::DimensionMismatch, "points do not match model dimension");
  std::vector<double> logp(model.components);
  const GmmScorer scorer(model);
  double total = 0.0;
  for (std::size_t i = 0; i < points.rows(); ++i) {
    scorer.joint_log_densities(points.row(i), logp);
    total += log_sum_exp(logp);
  }
  return total;
}

struct GmmOptions {
  std::size_t components = 100;
  std::size_t max_iter = 200;
  double tol = 1e-5;  // relative log-likelihood improvement
  double variance_floor = 1e-6;
};

struct GmmFit {
  GmmModel model;
  double log_likelihood = 0.0;
  std::vector<double> trace;  // log-likelihood before the first M step and after each one
  std::size_t iterations = 0;
  bool converged = false;
};

namespace detail {

// k-means++ seeding: first center uniform, then proportional to squared
// distance from the nearest chosen center.
inline DenseMatrix<double> kmeans_plus_plus(const Points& x, std::size_t k, Rng& rng) {
  const std::size_t n = x.rows(), d = x.cols();
  DenseMatrix<double> centers(k, d);
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  std::size_t pick = rng.uniform_int(n);
  for (std::size_t c = 0; c < k; ++c) {
    std::copy(x.row(pick).begin(), x.row(pick).end(), centers.row(c).begin());
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double dist = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        const double diff = x(i, j) - centers(c, j);
        dist += diff * diff;
      }
      nearest[i] = std::min(nearest[i], dist);
      total += nearest[i];
    }
    if (c + 1 == k) break;
    if (total <= 0.0) {
      pick = rng.uniform_int(n);
      continue;
    }
    double target = rng.uniform() * total;
    pick = n - 1;
    for (std::size_t i = 0; i < n; ++i) {
      target -= nearest[i];
      if (target < 0.0) {
        pick = i;
        break;
      }
    }
  }
  return centers;
}

}  // namespace detail

/// EM with k-means++ means, global per-dimension variance and uniform
/// weights as the starting point. Stops when the relative log-likelihood
/// change drops below tol or after max_iter M steps. Points are visited in
/// index order so results are reproducible for a fixed seed.
inline GmmFit fit_gmm(const Points& x, const GmmOptions& opt, std::uint64_t seed) {
  const std::size_t n = x.rows(), d = x.cols(), k = opt.components;
  if (k == 0 || d == 0) throw Error(ErrorKind::InvalidParams, "need at least one component and one dimension");
  if (n < k) {
    throw Error(ErrorKind::TooFewPoints, std::to_string(n) + " points for " + std::to_string(k) + " components");
  }
  if (!(opt.variance_floor > 0.0)) throw Error(ErrorKind::InvalidParams, "variance floor must be positive");

  Rng rng(seed);
  GmmFit fit;
  GmmModel& m = fit.model;
  m.components = k;
  m.dim = d;
  m.weights.assign(k, 1.0 / static_cast<double>(k));
  m.means = detail::kmeans_plus_plus(x, k, rng);
  m.variances = DenseMatrix<double>(k, d);
  {
    std::vector<double> mean(d, 0.0), var(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) mean[j] += x(i, j);
    for (auto& v : mean) v /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) var[j] += (x(i, j) - mean[j]) * (x(i, j) - mean[j]);
    for (std::size_t c = 0; c < k; ++c)
      for (std::size_t j = 0; j < d; ++j)
        m.variances(c, j) = std::max(opt.variance_floor, var[j] / static_cast<double>(n));
  }

  DenseMatrix<double> resp(n, k);
  auto e_step = [&] {
    const GmmScorer scorer(m);
    double ll = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      auto r = resp.row(i);
      scorer.joint_log_densities(x.row(i), r);
      const double norm = log_sum_exp(r);
      ll += norm;
      for (auto& v : r) v = std::exp(v - norm);
    }
    return ll;
  };

  double ll = e_step();
  fit.trace.push_back(ll);
  std::vector<double> nk(k);
  for (std::size_t it = 0; it < opt.max_iter; ++it) {
    std::fill(nk.begin(), nk.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = 0; c < k; ++c) nk[c] += resp(i, c);
    for (std::size_t c = 0; c < k; ++c) {
      if (!(nk[c] > 0.0)) continue;  // empty component keeps its parameters at zero weight
      auto mu = m.means.row(c);
      auto var = m.variances.row(c);
      std::fill(mu.begin(), mu.end(), 0.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) mu[j] += resp(i, c) * x(i, j);
      for (auto& v : mu) v /= nk[c];
      std::fill(var.begin(), var.end(), 0.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) {
          const double diff = x(i, j) - mu[j];
          var[j] += resp(i, c) * diff * diff;
        }
      for (auto& v : var) v = std::max(opt.variance_floor, v / nk[c]);
    }
    double total = 0.0;
    for (double v : nk) total += v;
    for (std::size_t c = 0; c < k; ++c) m.weights[c] = nk[c] / total;

    const double next = e_step();
    fit.trace.push_back(next);
    ++fit.iterations;
    const double change = std::abs(next - ll) / std::max(std::abs(next), std::numeric_limits<double>::min());
    ll = next;
    if (change < opt.tol) {
      fit.converged = true;
      break;
    }
  }
  fit.log_likelihood = ll;
  return fit;
}

/// Hard assignment: index of the most probable component (lowest on ties).
inline std::size_t assign(const GmmModel& model, std::span<const double> x) {
  const auto p = posterior(model, x);
  return static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
}

inline void save_gmm(const GmmModel& m, std::ostream& out) {
  binary::Writer w(out);
  w.magic("GMM1");
  w.put<std::uint32_t>(static_cast<std::uint32_t>(m.components));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(m.dim));
  w.array<double>(m.weights);
  w.array<double>(m.means.data());
  w.array<double>(m.variances.data());
  w.finish();
}

inline GmmModel load_gmm(std::istream& in) {
  binary::Reader r(in);
  r.expect_magic("GMM1");
  GmmModel m;
  m.components = r.get<std::uint32_t>();
  m.dim = r.get<std::uint32_t>();
  if (m.components == 0 || m.dim == 0) throw Error(ErrorKind::CorruptFile, "empty mixture");
  r.require(m.components * (1 + 2 * m.dim) * sizeof(double));
  m.weights.resize(m.components);
  m.means = DenseMatrix<double>(m.components, m.dim);
  m.variances = DenseMatrix<double>(m.components, m.dim);
  r.array<double>(m.weights);
  r.array<double>(m.means.data());
  r.array<double>(m.variances.data());
  r.expect_end();
  for (double v : m.variances.data()) {
    if (!(v > 0.0)) throw Error(ErrorKind::CorruptFile, "non-positive variance");
  }
  return m;
}

inline void save_gmm(const GmmModel& m, const std::string& path) {
  auto out = binary::open_out(path);
  save_gmm(m, out);
}

inline GmmModel load_gmm(const std::string& path) {
  auto in = binary::open_in(path);
  return load_gmm(in);
}

}  // namespace tweetner
