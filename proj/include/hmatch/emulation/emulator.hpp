#pragma once

#include "hmatch/emulation/regression.hpp"

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace hmatch {

enum class ResidualModel {
  uncorrelated,  // pure linear-model emulator; no residual interpolation
  correlated,    // Gaussian-correlated residual over the active inputs
};

/// Fully specified emulator for one output: polynomial mean over the active
/// inputs, a Gaussian-correlated residual with one correlation length per
/// active input, and an uncorrelated nugget carrying the inactive directions.
struct EmulatorSpec {
  std::string output_id;
  std::vector<BasisTerm> basis;  // empty -> zero prior mean
  Vec beta;
  std::vector<int> active;
  Vec theta;  // size = active.size() when residual is correlated
  double sigma_u2 = 0.0;
  double sigma_w2 = 0.0;
  ResidualModel residual = ResidualModel::correlated;

  double prior_variance() const { return sigma_u2 + sigma_w2; }

  double mean_at(const Vec& x) const {
    double m = 0.0;
    for (std::size_t c = 0; c < basis.size(); ++c)
      m += beta[static_cast<Eigen::Index>(c)] * eval_basis_term(basis[c], x);
    return m;
  }

  /// Gaussian correlation over the active coordinates.
  double correlation(const Vec& a, const Vec& b) const {
    double s = 0.0;
    for (std::size_t k = 0; k < active.size(); ++k) {
      const double d = (a[active[k]] - b[active[k]]) / theta[static_cast<Eigen::Index>(k)];
      s += d * d;
    }
    return std::exp(-s);
  }

  void validate(int dim) const {
    if (sigma_u2 < 0 || sigma_w2 < 0) throw ValidationError("negative emulator variance component");
    if (beta.size() != static_cast<Eigen::Index>(basis.size()))
      throw ValidationError("emulator beta length does not match basis");
    for (int a : active)
      if (a < 0 || a >= dim) throw ValidationError("active input index out of range");
    for (const auto& t : basis) {
      if (t.i >= dim || t.j >= dim) throw ValidationError("basis term index out of range");
    }
    if (residual == ResidualModel::correlated) {
      if (theta.size() != static_cast<Eigen::Index>(active.size()))
        throw ValidationError("theta length does not match active set");
      for (Eigen::Index k = 0; k < theta.size(); ++k)
        if (!(theta[k] > 0)) throw ValidationError("correlation lengths must be positive");
    }
  }
};

struct Prediction {
  double mean = 0.0;
  double variance = 0.0;
};

/// Adjusts the prior emulator by the training data (Bayes linear update) and
/// caches the factorisation so predictions cost O(n^2) each.
class Emulator {
 public:
  Emulator(EmulatorSpec spec, TrainingSet train)
      : spec_(std::move(spec)), train_(std::move(train)) {
    spec_.validate(train_.dim());
    const int n = train_.n();
    if (n < 1) throw ValidationError("emulator needs at least one training run");

    Vec prior_mean(n);
    for (int i = 0; i < n; ++i) prior_mean[i] = spec_.mean_at(train_.X.row(i).transpose());

    if (spec_.residual == ResidualModel::uncorrelated) {
      if (!spec_.basis.empty()) {
        const Mat G = build_design_matrix(train_.X, spec_.basis);
        gram_inv_ = (G.transpose() * G).inverse();
        if (!gram_inv_.allFinite())
          throw FitError("linear emulator design matrix is singular");
      }
      return;
    }

    Mat cov(n, n);
    for (int i = 0; i < n; ++i) {
      cov(i, i) = spec_.sigma_u2 + spec_.sigma_w2;
      for (int j = i + 1; j < n; ++j) {
        const double c =
            spec_.sigma_u2 *
            spec_.correlation(train_.X.row(i).transpose(), train_.X.row(j).transpose());
        cov(i, j) = c;
        cov(j, i) = c;
      }
    }
    llt_.compute(cov);
    if (llt_.info() != Eigen::Success)
      throw FitError(
          "training covariance is not positive definite; widen the nugget or "
          "drop duplicate design points");
    alpha_ = llt_.solve(train_.y - prior_mean);
  }

  const EmulatorSpec& spec() const { return spec_; }
  const TrainingSet& training() const { return train_; }

  Prediction predict(const Vec& x) const {
    if (x.size() != train_.dim())
      throw ValidationError("prediction point dimension mismatch");
    Prediction out;
    const double m = spec_.mean_at(x);
    if (spec_.residual == ResidualModel::uncorrelated) {
      out.mean = m;
      double infl = 0.0;
      if (gram_inv_.size() > 0) {
        Vec g(static_cast<Eigen::Index>(spec_.basis.size()));
        for (std::size_t c = 0; c < spec_.basis.size(); ++c)
          g[static_cast<Eigen::Index>(c)] = eval_basis_term(spec_.basis[c], x);
        infl = g.dot(gram_inv_ * g);
      }
      out.variance = spec_.prior_variance() * (1.0 + infl);
      return out;
    }

    const int n = train_.n();
    Vec c(n);
    for (int i = 0; i < n; ++i) {
      const Vec xi = train_.X.row(i).transpose();
      double cov = spec_.sigma_u2 * spec_.correlation(x, xi);
      if (spec_.sigma_w2 > 0 && (x.array() == xi.array()).all()) cov += spec_.sigma_w2;
      c[i] = cov;
    }
    const Vec w = llt_.solve(c);
    out.mean = m + c.dot(alpha_);
    out.variance = std::max(spec_.prior_variance() - c.dot(w), 0.0);
    return out;
  }

  /// predict() over every row of `points`, organised as matrix products.
  void predict_batch(const Mat& points, Vec& means, Vec& vars) const {
    const int m = static_cast<int>(points.rows());
    if (points.cols() != train_.dim())
      throw ValidationError("prediction point dimension mismatch");
    means.resize(m);
    vars.resize(m);
    if (m == 0) return;

    Vec mean_fn(m);
    if (spec_.basis.empty()) {
      mean_fn.setZero();
    } else {
      const Mat G = build_design_matrix(points, spec_.basis);
      mean_fn = G * spec_.beta;
      if (spec_.residual == ResidualModel::uncorrelated) {
        means = mean_fn;
        if (gram_inv_.size() > 0) {
          const Vec quad = ((G * gram_inv_).cwiseProduct(G)).rowwise().sum();
          vars = spec_.prior_variance() * (quad.array() + 1.0);
        } else {
          vars.setConstant(spec_.prior_variance());
        }
        return;
      }
    }
    if (spec_.residual == ResidualModel::uncorrelated) {
      means = mean_fn;
      vars.setConstant(spec_.prior_variance());
      return;
    }

    const int n = train_.n();
    const int a = static_cast<int>(spec_.active.size());
    Mat P(m, a), T(n, a);
    for (int k = 0; k < a; ++k) {
      const double th = spec_.theta[k];
      P.col(k) = points.col(spec_.active[static_cast<std::size_t>(k)]) / th;
      T.col(k) = train_.X.col(spec_.active[static_cast<std::size_t>(k)]) / th;
    }
    const Vec p_sq = P.rowwise().squaredNorm();
    const Vec t_sq = T.rowwise().squaredNorm();
    const int chunk = std::max(1, static_cast<int>(4'000'000 / std::max(1, n)));
    for (int lo = 0; lo < m; lo += chunk) {
      const int rows = std::min(chunk, m - lo);
      Mat d2 = (-2.0 * P.middleRows(lo, rows) * T.transpose()).colwise() + p_sq.segment(lo, rows);
      d2.rowwise() += t_sq.transpose();
      Mat C = spec_.sigma_u2 * (-d2.cwiseMax(0.0)).array().exp().matrix();
      if (spec_.sigma_w2 > 0) {
        // Exact coincidence with a training point carries the nugget too.
        for (int i = 0; i < rows; ++i)
          for (int j = 0; j < n; ++j)
            if (d2(i, j) <= 1e-12 &&
                (points.row(lo + i).array() == train_.X.row(j).array()).all())
              C(i, j) += spec_.sigma_w2;
      }
      const Mat W = llt_.solve(C.transpose());
      means.segment(lo, rows) = mean_fn.segment(lo, rows) + C * alpha_;
      vars.segment(lo, rows) =
          (spec_.prior_variance() - (C.cwiseProduct(W.transpose())).rowwise().sum().array())
              .cwiseMax(0.0);
    }
  }

 private:
  EmulatorSpec spec_;
  TrainingSet train_;
  Eigen::LLT<Mat> llt_;
  Vec alpha_;
  Mat gram_inv_;
};

/// Bayes linear adjustment of the emulator prior by the training runs,
/// evaluated at each row of `points`; returns adjusted means and variances.
inline std::pair<Vec, Vec> bl_update(const EmulatorSpec& spec, const TrainingSet& train,
                                     const Mat& points) {
  const Emulator em(spec, train);
  const int m = static_cast<int>(points.rows());
  Vec mean(m), var(m);
  for (int i = 0; i < m; ++i) {
    const Prediction p = em.predict(points.row(i).transpose());
    mean[i] = p.mean;
    var[i] = p.variance;
  }
  return {mean, var};
}

}  // namespace hmatch
