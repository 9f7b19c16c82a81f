#pragma once

#include "hmatch/matching/targets.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace hmatch {

/// Labelled run collection: rows of inputs with (optionally) their outputs.
struct SampleSet {
  std::string label;
  Mat X;
  Mat Y;  // may be 0 x 0 when outputs are not needed
};

namespace detail {

inline Mat covariance(const Mat& X, const std::vector<int>& idx) {
  const Eigen::Index n = X.rows();
  if (n < 2) throw ValidationError("covariance needs at least 2 points");
  Mat S(static_cast<Eigen::Index>(idx.size()), static_cast<Eigen::Index>(idx.size()));
  Mat C(n, static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const Vec col = X.col(idx[k]);
    C.col(static_cast<Eigen::Index>(k)) = col.array() - col.mean();
  }
  S = (C.transpose() * C) / static_cast<double>(n - 1);
  return S;
}

inline double column_variance(const Vec& col) {
  if (col.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const double m = col.mean();
  return (col.array() - m).square().sum() / static_cast<double>(col.size() - 1);
}

}  // namespace detail

/// How much of sample u's dispersion over the selected inputs survives in v:
/// 1 - det(Cov_v)/det(Cov_u).  0 for identical samples, 1 when v collapses.
inline double variance_resolution(const Mat& u, const Mat& v, const std::vector<int>& inputs) {
  if (inputs.empty()) throw ValidationError("variance_resolution: no inputs selected");
  const Mat Su = detail::covariance(u, inputs);
  const Mat Sv = detail::covariance(v, inputs);
  const double det_u = Su.determinant();
  std::string degenerate;
  for (std::size_t k = 0; k < inputs.size(); ++k)
    if (Su(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) < 1e-12)
      degenerate += (degenerate.empty() ? "" : ", ") + std::to_string(inputs[k]);
  // A constant column leaves a residue of rounding noise in the determinant,
  // so the diagonal scan has to gate alongside the determinant sign.
  if (!(det_u > 0) || !degenerate.empty())
    throw ValidationError("variance_resolution: reference covariance singular" +
                          (degenerate.empty() ? std::string()
                                              : " (no spread in inputs " + degenerate + ")"));
  return 1.0 - Sv.determinant() / det_u;
}

/// Squared sample correlation between every input pair; diagonal pinned to 0.
/// Inputs without spread produce NaN rows/columns.
inline Mat joint_constraint_matrix(const Mat& X) {
  const Eigen::Index d = X.cols();
  if (X.rows() < 3) throw ValidationError("joint_constraint_matrix needs at least 3 points");
  Vec var(d);
  Mat C(X.rows(), d);
  for (Eigen::Index j = 0; j < d; ++j) {
    C.col(j) = X.col(j).array() - X.col(j).mean();
    var[j] = C.col(j).squaredNorm() / static_cast<double>(X.rows() - 1);
  }
  Mat R = Mat::Zero(d, d);
  for (Eigen::Index a = 0; a < d; ++a) {
    for (Eigen::Index b = a + 1; b < d; ++b) {
      double r2 = std::numeric_limits<double>::quiet_NaN();
      if (var[a] > 1e-14 && var[b] > 1e-14) {
        const double cov = C.col(a).dot(C.col(b)) / static_cast<double>(X.rows() - 1);
        r2 = (cov * cov) / (var[a] * var[b]);
      }
      R(a, b) = R(b, a) = r2;
    }
  }
  return R;
}

struct InformativenessReport {
  Mat value;                            // inputs x outputs
  std::vector<std::vector<char>> low_confidence;  // same shape, 1 = < min_pass runs
  std::vector<int> pass_counts;         // per output
};

/// For each (input, output): how much conditioning wave-1 runs on passing the
/// output's target (true-run I <= cutoff) shrinks that input's variance.
inline InformativenessReport input_output_informativeness(
    const SampleSet& wave1, const std::vector<ObservationTarget>& targets, double cutoff = 3.0,
    int min_pass = 10) {
  const Eigen::Index d = wave1.X.cols();
  const Eigen::Index q = static_cast<Eigen::Index>(targets.size());
  if (wave1.Y.cols() != q)
    throw ValidationError("informativeness: output columns must match targets");
  if (wave1.X.rows() < 2) throw ValidationError("informativeness: too few runs");
  InformativenessReport rep;
  rep.value.setConstant(d, q, std::numeric_limits<double>::quiet_NaN());
  rep.low_confidence.assign(static_cast<std::size_t>(d),
                            std::vector<char>(static_cast<std::size_t>(q), 0));
  rep.pass_counts.assign(static_cast<std::size_t>(q), 0);

  Vec base_var(d);
  for (Eigen::Index i = 0; i < d; ++i) base_var[i] = detail::column_variance(wave1.X.col(i));

  for (Eigen::Index j = 0; j < q; ++j) {
    std::vector<int> pass;
    for (Eigen::Index r = 0; r < wave1.X.rows(); ++r)
      if (implausibility(wave1.Y(r, j), 0.0, targets[static_cast<std::size_t>(j)]) <= cutoff)
        pass.push_back(static_cast<int>(r));
    rep.pass_counts[static_cast<std::size_t>(j)] = static_cast<int>(pass.size());
    const bool low = static_cast<int>(pass.size()) < min_pass;
    for (Eigen::Index i = 0; i < d; ++i) {
      rep.low_confidence[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = low ? 1 : 0;
      if (pass.size() >= 2 && base_var[i] > 1e-14) {
        Vec sub(static_cast<Eigen::Index>(pass.size()));
        for (std::size_t r = 0; r < pass.size(); ++r)
          sub[static_cast<Eigen::Index>(r)] = wave1.X(pass[r], i);
        rep.value(i, j) = 1.0 - detail::column_variance(sub) / base_var[i];
      }
    }
  }
  return rep;
}

struct QuantileSummary {
  double min = 0, q25 = 0, median = 0, q75 = 0, max = 0;
};

inline QuantileSummary quantile_summary(Vec v) {
  if (v.size() == 0) throw ValidationError("quantile_summary: empty vector");
  std::vector<double> s(v.begin(), v.end());
  std::sort(s.begin(), s.end());
  auto at = [&](double p) {
    const double pos = p * (static_cast<double>(s.size()) - 1.0);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, s.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return s[lo] * (1.0 - frac) + s[hi] * frac;
  };
  return {s.front(), at(0.25), at(0.5), at(0.75), s.back()};
}

struct SignSplit {
  SampleSet positive;
  SampleSet negative;
  bool one_sided = false;  // set when either side is empty
  std::vector<QuantileSummary> positive_summary;  // per output column
  std::vector<QuantileSummary> negative_summary;
};

/// Partitions runs by the sign of one output (>= 0 counts as positive).
inline SignSplit sign_split(const SampleSet& s, int output) {
  if (output < 0 || output >= s.Y.cols())
    throw ValidationError("sign_split: output column out of range");
  SignSplit out;
  std::vector<int> pos, neg;
  for (Eigen::Index r = 0; r < s.Y.rows(); ++r)
    (s.Y(r, output) >= 0.0 ? pos : neg).push_back(static_cast<int>(r));
  auto take = [&](const std::vector<int>& rows, const std::string& label) {
    SampleSet part;
    part.label = s.label.empty() ? label : s.label + ":" + label;
    part.X.resize(static_cast<Eigen::Index>(rows.size()), s.X.cols());
    part.Y.resize(static_cast<Eigen::Index>(rows.size()), s.Y.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      part.X.row(static_cast<Eigen::Index>(r)) = s.X.row(rows[r]);
      part.Y.row(static_cast<Eigen::Index>(r)) = s.Y.row(rows[r]);
    }
    return part;
  };
  out.positive = take(pos, "positive");
  out.negative = take(neg, "negative");
  out.one_sided = pos.empty() || neg.empty();
  for (Eigen::Index j = 0; j < s.Y.cols(); ++j) {
    if (!pos.empty()) out.positive_summary.push_back(quantile_summary(out.positive.Y.col(j)));
    if (!neg.empty()) out.negative_summary.push_back(quantile_summary(out.negative.Y.col(j)));
  }
  return out;
}

/// Fraction of each wave's (converged) runs whose true-run implausibility per
/// output is <= cutoff.  Rows: waves in order.  Columns: targets.
inline Mat pass_proportions(const std::vector<SampleSet>& waves,
                            const std::vector<ObservationTarget>& targets, double cutoff = 3.0) {
  if (waves.empty()) throw ValidationError("pass_proportions: no wave archives");
  Mat P(static_cast<Eigen::Index>(waves.size()), static_cast<Eigen::Index>(targets.size()));
  for (std::size_t w = 0; w < waves.size(); ++w) {
    const Mat& Y = waves[w].Y;
    if (Y.cols() != static_cast<Eigen::Index>(targets.size()))
      throw ValidationError("pass_proportions: output columns must match targets");
    for (std::size_t j = 0; j < targets.size(); ++j) {
      int pass = 0;
      for (Eigen::Index r = 0; r < Y.rows(); ++r)
        if (implausibility(Y(r, static_cast<Eigen::Index>(j)), 0.0, targets[j]) <= cutoff)
          ++pass;
      P(static_cast<Eigen::Index>(w), static_cast<Eigen::Index>(j)) =
          Y.rows() > 0 ? static_cast<double>(pass) / static_cast<double>(Y.rows()) : 0.0;
    }
  }
  return P;
}

/// 2-d binned density of one input pair with highest-density-region labels.
struct PairDensity {
  int input_a = 0, input_b = 0;
  double lo = -1.0, hi = 1.0;
  Mat counts;  // bins x bins, row = input_a bin
  Mat hdr;     // 0 outside, 1 inside 0.9 mass set, 2 inside 0.5 mass set
};

inline PairDensity pair_density(const Mat& X, int input_a, int input_b, int bins = 20,
                                double lo = -1.0, double hi = 1.0) {
  if (bins < 1) throw ValidationError("pair_density: bins must be positive");
  if (input_a < 0 || input_b < 0 || input_a >= X.cols() || input_b >= X.cols())
    throw ValidationError("pair_density: input index out of range");
  PairDensity out;
  out.input_a = input_a;
  out.input_b = input_b;
  out.lo = lo;
  out.hi = hi;
  out.counts = Mat::Zero(bins, bins);
  const double scale = bins / (hi - lo);
  long total = 0;
  for (Eigen::Index r = 0; r < X.rows(); ++r) {
    const double a = X(r, input_a), b = X(r, input_b);
    if (a < lo || a > hi || b < lo || b > hi) continue;
    const int ia = std::min(bins - 1, static_cast<int>((a - lo) * scale));
    const int ib = std::min(bins - 1, static_cast<int>((b - lo) * scale));
    out.counts(ia, ib) += 1.0;
    ++total;
  }
  // Highest-density sets: fill bins from densest down until each mass level.
  std::vector<std::pair<double, std::pair<int, int>>> order;
  order.reserve(static_cast<std::size_t>(bins) * bins);
  for (int i = 0; i < bins; ++i)
    for (int j = 0; j < bins; ++j)
      if (out.counts(i, j) > 0) order.push_back({out.counts(i, j), {i, j}});
  std::sort(order.begin(), order.end(),
            [](const auto& x, const auto& y) { return x.first > y.first; });
  out.hdr = Mat::Zero(bins, bins);
  double acc = 0.0;
  for (const auto& [count, ij] : order) {
    const double before = acc;
    acc += count;
    double level = 0.0;
    if (before < 0.5 * total)
      level = 2.0;
    else if (before < 0.9 * total)
      level = 1.0;
    if (level > 0.0) out.hdr(ij.first, ij.second) = level;
  }
  return out;
}

}  // namespace hmatch
