#pragma once

#include "hmatch/emulation/emulator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace hmatch {

enum class ThetaMode { fixed, grouped };

struct CorrelationFitOptions {
  double fixed_theta = 2.0;
  int max_groups = 5;
  int grid_size = 15;
  double grid_lo = 0.2;
  double grid_hi = 20.0;
  int max_sweeps = 8;
  /// Likelihood evaluations are O(n^3); larger training sets are subsampled
  /// to this size (deterministically) for the grid search.
  int likelihood_cap = 300;
  std::uint64_t seed = 0x5eedULL;
};

struct CorrelationFit {
  Vec theta;                // one per active input
  std::vector<int> group;   // group index per active input
  std::vector<double> group_theta;
  bool hit_grid_boundary = false;
};

namespace detail {

inline double grouped_loglik(const Mat& Xa, const Vec& e, double sigma_u2, double sigma_w2,
                             const std::vector<int>& group, const std::vector<double>& gtheta) {
  const int n = static_cast<int>(Xa.rows());
  Mat cov(n, n);
  for (int i = 0; i < n; ++i) {
    cov(i, i) = sigma_u2 + sigma_w2;
    for (int j = i + 1; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < Xa.cols(); ++k) {
        const double d = (Xa(i, k) - Xa(j, k)) / gtheta[static_cast<std::size_t>(group[static_cast<std::size_t>(k)])];
        s += d * d;
      }
      const double c = sigma_u2 * std::exp(-s);
      cov(i, j) = c;
      cov(j, i) = c;
    }
  }
  Eigen::LLT<Mat> llt(cov);
  if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
  double logdet = 0.0;
  for (int i = 0; i < n; ++i) logdet += std::log(llt.matrixL()(i, i));
  logdet *= 2.0;
  const Vec w = llt.solve(e);
  return -0.5 * (logdet + e.dot(w));
}

}  // namespace detail

/// Chooses Gaussian correlation lengths for the active inputs of one output.
/// fixed: a single common length for every active input.  grouped: actives
/// are banded into at most max_groups groups by the magnitude of their linear
/// mean-function coefficient, and a common length per group is picked by
/// maximising the residual Gaussian likelihood over a log-spaced grid via
/// coordinate ascent.
inline CorrelationFit fit_correlation_lengths(const TrainingSet& ts, const Vec& residuals,
                                              const std::vector<int>& active,
                                              const std::vector<double>& linear_strength,
                                              double sigma_u2, double sigma_w2, ThetaMode mode,
                                              const CorrelationFitOptions& opt = {}) {
  const int a = static_cast<int>(active.size());
  if (a == 0) throw ValidationError("correlation fit needs at least one active input");

  CorrelationFit fit;
  fit.group.assign(static_cast<std::size_t>(a), 0);

  if (mode == ThetaMode::fixed) {
    fit.theta = Vec::Constant(a, opt.fixed_theta);
    fit.group_theta = {opt.fixed_theta};
    return fit;
  }

  // Band actives into groups of nearly equal size ordered by |linear coef|,
  // strongest inputs in group 0.
  const int n_groups = std::min(opt.max_groups, a);
  std::vector<int> order(static_cast<std::size_t>(a));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int lhs, int rhs) {
    return linear_strength[static_cast<std::size_t>(lhs)] >
           linear_strength[static_cast<std::size_t>(rhs)];
  });
  for (int rank = 0; rank < a; ++rank)
    fit.group[static_cast<std::size_t>(order[static_cast<std::size_t>(rank)])] =
        std::min(n_groups - 1, rank * n_groups / a);

  // Deterministic subsample for the likelihood search.
  const int n = ts.n();
  std::vector<int> rows(static_cast<std::size_t>(n));
  std::iota(rows.begin(), rows.end(), 0);
  if (n > opt.likelihood_cap) {
    auto rng = make_rng(opt.seed, 41);
    std::shuffle(rows.begin(), rows.end(), rng);
    rows.resize(static_cast<std::size_t>(opt.likelihood_cap));
    std::sort(rows.begin(), rows.end());
  }
  Mat Xa(static_cast<Eigen::Index>(rows.size()), a);
  Vec e(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    e[static_cast<Eigen::Index>(r)] = residuals[rows[r]];
    for (int k = 0; k < a; ++k) Xa(static_cast<Eigen::Index>(r), k) = ts.X(rows[r], active[static_cast<std::size_t>(k)]);
  }

  std::vector<double> grid(static_cast<std::size_t>(opt.grid_size));
  for (int g = 0; g < opt.grid_size; ++g)
    grid[static_cast<std::size_t>(g)] =
        opt.grid_lo * std::pow(opt.grid_hi / opt.grid_lo,
                               static_cast<double>(g) / (opt.grid_size - 1));

  fit.group_theta.assign(static_cast<std::size_t>(n_groups), opt.fixed_theta);
  double best = detail::grouped_loglik(Xa, e, sigma_u2, sigma_w2, fit.group, fit.group_theta);

  for (int sweep = 0; sweep < opt.max_sweeps; ++sweep) {
    bool changed = false;
    for (int g = 0; g < n_groups; ++g) {
      double best_theta = fit.group_theta[static_cast<std::size_t>(g)];
      for (double cand : grid) {
        if (cand == best_theta) continue;
        auto trial = fit.group_theta;
        trial[static_cast<std::size_t>(g)] = cand;
        const double ll = detail::grouped_loglik(Xa, e, sigma_u2, sigma_w2, fit.group, trial);
        if (ll > best) {
          best = ll;
          best_theta = cand;
        }
      }
      if (best_theta != fit.group_theta[static_cast<std::size_t>(g)]) {
        fit.group_theta[static_cast<std::size_t>(g)] = best_theta;
        changed = true;
      }
    }
    if (!changed) break;
  }

  for (double t : fit.group_theta)
    if (t == grid.front() || t == grid.back()) fit.hit_grid_boundary = true;

  fit.theta.resize(a);
  for (int k = 0; k < a; ++k)
    fit.theta[k] = fit.group_theta[static_cast<std::size_t>(fit.group[static_cast<std::size_t>(k)])];
  return fit;
}

}  // namespace hmatch
