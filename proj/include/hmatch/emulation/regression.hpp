#pragma once

#include "hmatch/common.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

namespace hmatch {

/// Design points (rows, scaled to [-1,1]) with one simulator output per row.
struct TrainingSet {
  Mat X;
  Vec y;

  int n() const { return static_cast<int>(X.rows()); }
  int dim() const { return static_cast<int>(X.cols()); }
};

/// One polynomial regressor: intercept (i=j=-1), linear x_i (j=-1), or
/// second-order x_i*x_j (i<=j, i==j for squares).
struct BasisTerm {
  int i = -1;
  int j = -1;

  friend bool operator==(const BasisTerm&, const BasisTerm&) = default;
};

inline double eval_basis_term(const BasisTerm& t, const Vec& x) {
  if (t.i < 0) return 1.0;
  if (t.j < 0) return x[t.i];
  return x[t.i] * x[t.j];
}

inline Mat build_design_matrix(const Mat& X, const std::vector<BasisTerm>& basis) {
  Mat G(X.rows(), static_cast<Eigen::Index>(basis.size()));
  for (Eigen::Index r = 0; r < X.rows(); ++r) {
    for (std::size_t c = 0; c < basis.size(); ++c) {
      const BasisTerm& t = basis[c];
      if (t.i < 0)
        G(r, static_cast<Eigen::Index>(c)) = 1.0;
      else if (t.j < 0)
        G(r, static_cast<Eigen::Index>(c)) = X(r, t.i);
      else
        G(r, static_cast<Eigen::Index>(c)) = X(r, t.i) * X(r, t.j);
    }
  }
  return G;
}

struct StepwiseOptions {
  int max_actives = 12;
  /// Family-wise inclusion level per selection stage (Bonferroni over the
  /// candidates in play), so pure noise keeps no term ~95% of the time.
  double alpha = 0.05;
  bool second_order = true;
  /// Hard cap on basis size; 0 means min(n/10, 2 + 3*max_actives).
  int max_terms = 0;
};

struct MeanFit {
  std::vector<BasisTerm> basis;  // intercept first
  Vec beta;
  std::vector<int> active;  // ascending input indices used by the basis
  double resid_var = 0.0;   // RSS / (n - p)
  Mat gram_inv;             // (G'G)^{-1} for the fitted basis
  /// |beta| of the linear term of each active input (order matches active).
  std::vector<double> linear_strength;
};

namespace detail {

/// Incremental forward selection state over an orthonormalised basis.
struct ForwardSelector {
  const Mat& X;
  Mat Q;        // n x p, orthonormal columns spanning the current basis
  Vec resid;    // y - projection onto Q
  double rss;
  int n;

  ForwardSelector(const Mat& X_, const Vec& y) : X(X_), n(static_cast<int>(X_.rows())) {
    Q.resize(n, 0);
    resid = y;
    rss = resid.squaredNorm();
  }

  /// Component of column c orthogonal to the current basis (re-orthogonalised).
  Vec orthogonalise(const Vec& c) const {
    Vec r = c;
    if (Q.cols() > 0) {
      r -= Q * (Q.transpose() * r);
      r -= Q * (Q.transpose() * r);
    }
    return r;
  }

  /// RSS reduction if column c were added; 0 for collinear columns.
  double gain(const Vec& c) const {
    const Vec r = orthogonalise(c);
    const double nrm2 = r.squaredNorm();
    if (nrm2 <= 1e-12 * std::max(1.0, c.squaredNorm())) return 0.0;
    const double proj = r.dot(resid);
    return proj * proj / nrm2;
  }

  void add(const Vec& c) {
    Vec r = orthogonalise(c);
    const double nrm = r.norm();
    r /= nrm;
    Q.conservativeResize(Eigen::NoChange, Q.cols() + 1);
    Q.col(Q.cols() - 1) = r;
    const double proj = r.dot(resid);
    resid -= proj * r;
    rss -= proj * proj;
    rss = std::max(rss, 0.0);
  }

  int p() const { return static_cast<int>(Q.cols()); }
};

inline Vec term_column(const Mat& X, const BasisTerm& t) {
  if (t.i < 0) return Vec::Ones(X.rows());
  if (t.j < 0) return X.col(t.i);
  return X.col(t.i).cwiseProduct(X.col(t.j));
}

/// Greedy forward pass over `candidates`; accepted terms are appended to
/// basis.  A candidate enters only if its F statistic clears the
/// Bonferroni-adjusted chi-square threshold and the BIC improves.
inline void forward_stage(ForwardSelector& sel, const std::vector<BasisTerm>& candidates,
                          std::vector<BasisTerm>& basis, const StepwiseOptions& opt,
                          int max_new_terms, int term_cap) {
  if (candidates.empty() || max_new_terms <= 0) return;
  const double level = 1.0 - opt.alpha / static_cast<double>(candidates.size());
  const double f_crit = boost::math::quantile(boost::math::chi_squared_distribution<double>(1.0), level);
  std::vector<bool> used(candidates.size(), false);
  const int n = sel.n;

  for (int added = 0; added < max_new_terms; ++added) {
    if (sel.p() >= term_cap || sel.p() >= n - 2) break;
    int best = -1;
    double best_gain = 0.0;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      if (used[c]) continue;
      const double g = sel.gain(term_column(sel.X, candidates[c]));
      if (g > best_gain) {
        best_gain = g;
        best = static_cast<int>(c);
      }
    }
    if (best < 0) break;
    const double rss_new = std::max(sel.rss - best_gain, 1e-300);
    const int p_new = sel.p() + 1;
    const double sigma2 = rss_new / std::max(1, n - p_new);
    const double f_stat = best_gain / std::max(sigma2, 1e-300);
    const double delta_bic = n * std::log(rss_new / sel.rss) + std::log(static_cast<double>(n));
    if (f_stat < f_crit || delta_bic >= 0.0) break;
    used[static_cast<std::size_t>(best)] = true;
    sel.add(term_column(sel.X, candidates[static_cast<std::size_t>(best)]));
    basis.push_back(candidates[static_cast<std::size_t>(best)]);
  }
}

}  // namespace detail

/// Stepwise active-input selection and mean-function fit: forward selection
/// over linear terms first (identifying the active inputs, capped), then over
/// squares and cross products of the actives.
inline MeanFit fit_mean_and_actives(const TrainingSet& ts, const StepwiseOptions& opt = {}) {
  const int n = ts.n();
  const int d = ts.dim();
  if (n < 20) throw ValidationError("mean fit needs at least 20 runs, got " + std::to_string(n));
  if (ts.y.size() != n) throw ValidationError("training y length does not match X rows");

  const int term_cap =
      opt.max_terms > 0 ? opt.max_terms : std::min(n / 10, 2 + 3 * opt.max_actives);

  detail::ForwardSelector sel(ts.X, ts.y);
  std::vector<BasisTerm> basis;
  basis.push_back(BasisTerm{});  // intercept
  sel.add(detail::term_column(ts.X, basis[0]));

  std::vector<BasisTerm> linear_candidates;
  linear_candidates.reserve(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) linear_candidates.push_back(BasisTerm{i, -1});
  detail::forward_stage(sel, linear_candidates, basis, opt, opt.max_actives, term_cap);

  std::vector<int> active;
  for (const auto& t : basis)
    if (t.i >= 0) active.push_back(t.i);
  std::sort(active.begin(), active.end());

  if (opt.second_order && !active.empty()) {
    std::vector<BasisTerm> quad;
    for (std::size_t a = 0; a < active.size(); ++a)
      for (std::size_t b = a; b < active.size(); ++b)
        quad.push_back(BasisTerm{active[a], active[b]});
    detail::forward_stage(sel, quad, basis, opt, term_cap - sel.p(), term_cap);
  }

  MeanFit fit;
  fit.basis = basis;
  fit.active = active;

  const Mat G = build_design_matrix(ts.X, basis);
  const Eigen::ColPivHouseholderQR<Mat> qr(G);
  if (qr.rank() < G.cols())
    throw FitError("mean basis became rank deficient after selection");
  fit.beta = qr.solve(ts.y);
  const double rss = (ts.y - G * fit.beta).squaredNorm();
  const int p = static_cast<int>(G.cols());
  fit.resid_var = rss / std::max(1, n - p);
  fit.gram_inv = (G.transpose() * G).inverse();

  fit.linear_strength.assign(fit.active.size(), 0.0);
  for (std::size_t c = 0; c < basis.size(); ++c) {
    const BasisTerm& t = basis[c];
    if (t.i >= 0 && t.j < 0) {
      const auto it = std::lower_bound(fit.active.begin(), fit.active.end(), t.i);
      fit.linear_strength[static_cast<std::size_t>(it - fit.active.begin())] =
          std::abs(fit.beta[static_cast<Eigen::Index>(c)]);
    }
  }
  return fit;
}

}  // namespace hmatch
