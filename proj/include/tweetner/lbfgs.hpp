#pragma once

// Limited-memory quasi-Newton minimization of
//
//     F(x) = f(x) + l1 * ||x||_1
//
// with f smooth. When l1 > 0 the orthant-wise variant (OWL-QN) is used:
// directions come from the pseudo-gradient of F, are restricted to its
// descent orthant, and every trial point is projected back onto the orthant
// of the current iterate, which is what produces exact zeros. With l1 == 0
// this is plain L-BFGS with a backtracking Armijo line search.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <functional>
#include <numeric>
#include <span>
#include <string_view>
#include <vector>

#include "tweetner/error.hpp"

namespace tweetner {

struct QuasiNewtonOptions {
  double l1 = 0.0;
  std::size_t max_iterations = 100;
  std::size_t memory = 6;
  double tol = 1e-7;           // relative decrease over `window` iterations
  std::size_t window = 5;
  std::size_t max_backtracks = 40;
  double armijo = 1e-4;
};

enum class StopReason { MaxIterations, Converged, ZeroGradient, LineSearchFailed };

inline std::string_view to_string(StopReason r) {
  switch (r) {
    case StopReason::MaxIterations: return "max-iterations";
    case StopReason::Converged: return "converged";
    case StopReason::ZeroGradient: return "zero-gradient";
    case StopReason::LineSearchFailed: return "line-search-failed";
  }
  return "?";
}

struct QuasiNewtonResult {
  std::vector<double> x;
  double value = 0.0;          // F at x
  std::vector<double> trace;   // F at x0 and after every accepted step
  std::size_t iterations = 0;
  StopReason reason = StopReason::MaxIterations;
};

/// f(x, grad) returns the smooth part and writes its gradient.
using SmoothObjective = std::function<double(std::span<const double>, std::span<double>)>;

namespace detail {

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double l1_norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += std::abs(v);
  return s;
}

inline void pseudo_gradient(std::span<const double> x, std::span<const double> g, double l1, std::span<double> pg) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (l1 == 0.0) {
      pg[i] = g[i];
    } else if (x[i] > 0.0) {
      pg[i] = g[i] + l1;
    } else if (x[i] < 0.0) {
      pg[i] = g[i] - l1;
    } else if (g[i] + l1 < 0.0) {
      pg[i] = g[i] + l1;
    } else if (g[i] - l1 > 0.0) {
      pg[i] = g[i] - l1;
    } else {
      pg[i] = 0.0;
    }
  }
}

struct Correction {
  std::vector<double> s, y;
  double rho;
};

// Two-loop recursion: d = -H * pg.
inline void lbfgs_direction(const std::deque<Correction>& history, std::span<const double> pg, std::span<double> d) {
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = -pg[i];
  std::vector<double> alpha(history.size());
  for (std::size_t k = history.size(); k-- > 0;) {
    const auto& c = history[k];
    alpha[k] = c.rho * dot(c.s, d);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] -= alpha[k] * c.y[i];
  }
  if (!history.empty()) {
    const auto& last = history.back();
    const double gamma = dot(last.s, last.y) / dot(last.y, last.y);
    for (auto& v : d) v *= gamma;
  }
  for (std::size_t k = 0; k < history.size(); ++k) {
    const auto& c = history[k];
    const double beta = c.rho * dot(c.y, d);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += (alpha[k] - beta) * c.s[i];
  }
}

}  // namespace detail

inline QuasiNewtonResult minimize_quasi_newton(const SmoothObjective& f, std::vector<double> x0,
                                               const QuasiNewtonOptions& opt) {
  const std::size_t n = x0.size();
  const double l1 = opt.l1;
  QuasiNewtonResult res;
  res.x = std::move(x0);
  std::vector<double> g(n), pg(n), d(n), x_new(n), g_new(n), orthant(n);

  auto total = [&](double smooth, std::span<const double> x) { return smooth + (l1 > 0.0 ? l1 * detail::l1_norm(x) : 0.0); };
  double fx = total(f(res.x, g), res.x);
  if (!std::isfinite(fx)) throw Error(ErrorKind::NonFiniteObjective, "objective is not finite at the starting point");
  res.trace.push_back(fx);
  res.value = fx;

  std::deque<detail::Correction> history;
  for (std::size_t iter = 0; iter < opt.max_iterations; ++iter) {
    detail::pseudo_gradient(res.x, g, l1, pg);
    if (std::all_of(pg.begin(), pg.end(), [](double v) { return v == 0.0; })) {
      res.reason = StopReason::ZeroGradient;
      return res;
    }
    detail::lbfgs_direction(history, pg, d);
    if (l1 > 0.0) {
      for (std::size_t i = 0; i < n; ++i)
        if (d[i] * pg[i] >= 0.0) d[i] = 0.0;
    }
    double slope = detail::dot(pg, d);
    if (!(slope < 0.0)) {
      // Curvature pairs no longer describe a descent direction: restart.
      history.clear();
      for (std::size_t i = 0; i < n; ++i) d[i] = -pg[i];
      slope = detail::dot(pg, d);
    }
    for (std::size_t i = 0; i < n; ++i) orthant[i] = res.x[i] != 0.0 ? (res.x[i] > 0 ? 1.0 : -1.0) : (pg[i] < 0 ? 1.0 : -1.0);

    double step = history.empty() ? 1.0 / std::sqrt(detail::dot(d, d)) : 1.0;
    bool accepted = false;
    double f_new = 0.0;
    for (std::size_t bt = 0; bt < opt.max_backtracks; ++bt, step *= 0.5) {
      for (std::size_t i = 0; i < n; ++i) {
        x_new[i] = res.x[i] + step * d[i];
        if (l1 > 0.0 && x_new[i] * orthant[i] <= 0.0) x_new[i] = 0.0;
      }
      f_new = total(f(x_new, g_new), x_new);
      if (!std::isfinite(f_new)) continue;
      double decrease = 0.0;
      for (std::size_t i = 0; i < n; ++i) decrease += pg[i] * (x_new[i] - res.x[i]);
      if (f_new <= fx + opt.armijo * decrease) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      res.reason = StopReason::LineSearchFailed;
      return res;
    }

    detail::Correction c{std::vector<double>(n), std::vector<double>(n), 0.0};
    for (std::size_t i = 0; i < n; ++i) {
      c.s[i] = x_new[i] - res.x[i];
      c.y[i] = g_new[i] - g[i];
    }
    const double sy = detail::dot(c.s, c.y);
    if (sy > 1e-12 * detail::dot(c.y, c.y)) {
      c.rho = 1.0 / sy;
      history.push_back(std::move(c));
      if (history.size() > opt.memory) history.pop_front();
    }
    res.x.swap(x_new);
    g.swap(g_new);
    fx = f_new;
    res.value = fx;
    res.trace.push_back(fx);
    ++res.iterations;

    if (res.trace.size() > opt.window) {
      const double before = res.trace[res.trace.size() - 1 - opt.window];
      if ((before - fx) / std::max(std::abs(fx), 1e-300) < opt.tol) {
        res.reason = StopReason::Converged;
        return res;
      }
    }
  }
  res.reason = StopReason::MaxIterations;
  return res;
}

}  // namespace tweetner
