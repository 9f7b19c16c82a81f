#pragma once

#include "hmatch/design/region.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace hmatch {

struct McmcOptions {
  /// Proposal scale adaptation targets this acceptance-rate band, then the
  /// scale is frozen before any retained draw is generated.
  double accept_lo = 0.2;
  double accept_hi = 0.4;
  int adapt_batch = 200;
  int max_adapt_batches = 60;
  double initial_step = 0.25;  // fraction of box half-width
  int burn_in = 1000;
  /// Pilot draws used to choose the thinning interval.  The retained draws
  /// feed uniformity-sensitive consumers (membership estimates, refills), so
  /// thinning keeps going until the pilot's residual lag-1 autocorrelation is
  /// indistinguishable from estimator noise.
  int pilot = 4096;
  double max_lag1_autocorr = 0.05;
  int max_thin = 256;
  /// Chains beyond this add start-position diversity but little else, and the
  /// per-chain adapt/burn/pilot overhead is paid in full by each one.
  int max_chains = 16;
};

namespace detail {

/// Lag-1 autocorrelation, worst case over coordinates, of every `thin`-th row.
inline double thinned_lag1(const Mat& chain, int thin) {
  const int m = static_cast<int>(chain.rows()) / thin;
  if (m < 4) return 0.0;
  double worst = 0.0;
  for (int k = 0; k < chain.cols(); ++k) {
    double mean = 0.0;
    for (int i = 0; i < m; ++i) mean += chain(i * thin, k);
    mean /= m;
    double num = 0.0, den = 0.0;
    for (int i = 0; i < m; ++i) {
      const double a = chain(i * thin, k) - mean;
      den += a * a;
      if (i + 1 < m) num += a * (chain((i + 1) * thin, k) - mean);
    }
    if (den <= 1e-300) continue;  // flat coordinate
    worst = std::max(worst, std::abs(num / den));
  }
  return worst;
}

}  // namespace detail

/// Gaussian random-walk Metropolis sampler for the uniform distribution on a
/// region.  Proposals landing outside the region are rejected, so the
/// stationary distribution is exactly uniform on it.  Chains are adapted to a
/// 20-40% acceptance rate, frozen, burnt in, and thinned until the worst
/// per-coordinate lag-1 autocorrelation of the retained draws is small.
inline Mat mcmc_uniform(const Region& region, int n, std::uint64_t seed, const Mat& starts,
                        const McmcOptions& opt = {}) {
  const int dim = region.dim();
  if (n < 0) throw ValidationError("mcmc: n must be non-negative");
  if (starts.rows() < 1) throw ValidationError("mcmc: at least one start point required");
  if (starts.cols() != dim) throw ValidationError("mcmc: start dimension mismatch");
  for (int s = 0; s < starts.rows(); ++s) {
    if (!region.contains(starts.row(s).transpose()))
      throw ValidationError("mcmc: start point " + std::to_string(s) + " is outside the region");
  }
  Mat out(n, dim);
  if (n == 0) return out;

  const int n_chains =
      std::min({static_cast<int>(starts.rows()), std::max(1, n), std::max(1, opt.max_chains)});
  const Vec half = 0.5 * (region.hi() - region.lo());

  int written = 0;
  for (int chain_id = 0; chain_id < n_chains; ++chain_id) {
    const int quota = (n - written) / (n_chains - chain_id);
    if (quota == 0) continue;
    auto rng = make_rng(seed, 1000 + static_cast<std::uint64_t>(chain_id));
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    // Stride across the supplied starts so a capped chain count still spreads
    // over the whole start set (members can arrive thousands of rows deep).
    const Eigen::Index start_row =
        static_cast<Eigen::Index>(chain_id) * starts.rows() / n_chains;
    Vec x = starts.row(start_row).transpose();
    double scale = opt.initial_step;

    auto step = [&](Vec& state) -> bool {
      Vec prop(dim);
      for (int k = 0; k < dim; ++k) prop[k] = state[k] + scale * half[k] * gauss(rng);
      if (region.contains(prop)) {
        state = prop;
        return true;
      }
      return false;
    };

    // Adapt the proposal scale, then freeze it.
    for (int batch = 0; batch < opt.max_adapt_batches; ++batch) {
      int accepted = 0;
      for (int i = 0; i < opt.adapt_batch; ++i) accepted += step(x) ? 1 : 0;
      const double rate = static_cast<double>(accepted) / opt.adapt_batch;
      if (rate < opt.accept_lo)
        scale *= 0.7;
      else if (rate > opt.accept_hi)
        scale *= 1.4;
      else
        break;
      scale = std::clamp(scale, 1e-6, 4.0);
    }

    for (int i = 0; i < opt.burn_in; ++i) step(x);

    // Choose thinning from a pilot segment.
    Mat pilot(opt.pilot, dim);
    for (int i = 0; i < opt.pilot; ++i) {
      step(x);
      pilot.row(i) = x.transpose();
    }
    int thin = 1;
    while (thin < opt.max_thin && detail::thinned_lag1(pilot, thin) > opt.max_lag1_autocorr)
      thin *= 2;

    for (int kept = 0; kept < quota; ++kept) {
      for (int t = 0; t < thin; ++t) step(x);
      out.row(written + kept) = x.transpose();
    }
    written += quota;
  }
  return out;
}

}  // namespace hmatch
