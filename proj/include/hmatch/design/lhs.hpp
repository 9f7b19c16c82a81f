#pragma once

#include "hmatch/common.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <vector>

namespace hmatch {

struct LhsOptions {
  /// Candidate hypercubes scored by the maximin criterion.
  int candidates = 100;
  /// Place points at cell centres instead of jittering within cells.
  bool centered = false;
};

namespace detail {

inline Mat lhs_candidate(int n, int dim, std::mt19937_64& rng, bool centered) {
  Mat X(n, dim);
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int k = 0; k < dim; ++k) {
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (int i = 0; i < n; ++i) {
      const double u = centered ? 0.5 : unit(rng);
      X(i, k) = -1.0 + 2.0 * (perm[static_cast<std::size_t>(i)] + u) / n;
    }
  }
  return X;
}

/// Greedy maximin subset: keeps the `n` rows of `pts` that stay far apart,
/// seeded at the row farthest from the centroid.
inline Mat greedy_maximin_subset(const Mat& pts, int n) {
  const int m = static_cast<int>(pts.rows());
  if (m <= n) return pts;
  const Vec centroid = pts.colwise().mean().transpose();
  Eigen::Index seed_row = 0;
  (pts.rowwise() - centroid.transpose()).rowwise().squaredNorm().maxCoeff(&seed_row);

  Mat out(n, pts.cols());
  out.row(0) = pts.row(seed_row);
  Vec min_d2 = (pts.rowwise() - pts.row(seed_row)).rowwise().squaredNorm();
  for (int k = 1; k < n; ++k) {
    Eigen::Index next = 0;
    min_d2.maxCoeff(&next);
    out.row(k) = pts.row(next);
    min_d2 = min_d2.cwiseMin((pts.rowwise() - pts.row(next)).rowwise().squaredNorm());
  }
  return out;
}

inline double min_pairwise_sq_distance(const Mat& X) {
  const int n = static_cast<int>(X.rows());
  if (n < 2) return std::numeric_limits<double>::infinity();
  const Vec sq = X.rowwise().squaredNorm();
  Mat d2 = (-2.0 * X * X.transpose()).colwise() + sq;
  d2.rowwise() += sq.transpose();
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) best = std::min(best, d2(i, j));
  return std::max(best, 0.0);
}

}  // namespace detail

/// Maximin Latin hypercube on [-1,1]^dim: each column is a stratified
/// permutation (one point per 1/n cell), and the best of `candidates` designs
/// by minimum pairwise Euclidean distance is kept.
inline Mat maximin_lhs(int n, int dim, std::uint64_t seed, const LhsOptions& opt = {}) {
  if (n < 1) throw ValidationError("lhs: n must be positive");
  if (dim < 1) throw ValidationError("lhs: dim must be positive");
  auto rng = make_rng(seed, 17);
  Mat best;
  double best_score = -1.0;
  const int candidates = std::max(1, opt.candidates);
  for (int c = 0; c < candidates; ++c) {
    Mat X = detail::lhs_candidate(n, dim, rng, opt.centered);
    const double score = detail::min_pairwise_sq_distance(X);
    if (score > best_score) {
      best_score = score;
      best = std::move(X);
    }
  }
  return best;
}

}  // namespace hmatch
