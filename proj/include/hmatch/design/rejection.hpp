#pragma once

#include "hmatch/design/lhs.hpp"
#include "hmatch/design/region.hpp"

#include <vector>

namespace hmatch {

struct RejectionOptions {
  /// Below this acceptance rate the sampler gives up (switch to MCMC).
  double min_acceptance = 0.01;
  /// Points probed before the acceptance floor is enforced.
  int min_probe = 4000;
  /// Size of each candidate hypercube; 0 means max(n, 1000).
  int batch = 0;
  LhsOptions lhs;
};

struct RejectionSample {
  Mat points;          // may hold fewer than requested when starved
  double acceptance = 0.0;
  long probed = 0;
  bool starved = false;
};

/// Draws successive maximin Latin hypercubes over the region's bounding box
/// and keeps the members, until n points are accumulated or the acceptance
/// rate falls below the floor.
inline RejectionSample rejection_sample(const Region& region, int n, std::uint64_t seed,
                                        const RejectionOptions& opt = {}) {
  if (n < 0) throw ValidationError("rejection: n must be non-negative");
  const int dim = region.dim();
  RejectionSample out;
  out.points.resize(n, dim);
  int kept = 0;
  long probed = 0;
  const int later_batch = opt.batch > 0 ? opt.batch : std::max(n, 1000);
  const Vec half = 0.5 * (region.hi() - region.lo());
  const Vec mid = 0.5 * (region.hi() + region.lo());

  for (std::uint64_t round = 0; kept < n; ++round) {
    // The first cube has exactly n points so that a fully accepting region
    // (wave 1) returns the plain maximin Latin hypercube unchanged.
    const int batch = round == 0 ? n : later_batch;
    Mat cand = maximin_lhs(batch, dim, split_seed(seed, round), opt.lhs);
    for (int i = 0; i < batch; ++i)
      cand.row(i) = (mid + half.cwiseProduct(cand.row(i).transpose())).transpose();
    const std::vector<char> member = region.contains_batch(cand);
    for (int i = 0; i < batch && kept < n; ++i) {
      ++probed;
      if (member[static_cast<std::size_t>(i)]) out.points.row(kept++) = cand.row(i);
    }
    out.acceptance = probed > 0 ? static_cast<double>(kept) / probed : 0.0;
    if (kept < n && probed >= opt.min_probe && out.acceptance < opt.min_acceptance) {
      out.starved = true;
      break;
    }
  }
  out.probed = probed;
  out.points.conservativeResize(kept, dim);
  out.acceptance = probed > 0 ? static_cast<double>(kept) / probed : 0.0;
  return out;
}

/// rejection_sample that insists on n points.
inline Mat rejection_design(const Region& region, int n, std::uint64_t seed,
                            const RejectionOptions& opt = {}) {
  const RejectionSample s = rejection_sample(region, n, seed, opt);
  if (s.starved)
    throw AcceptanceTooLow("rejection sampling acceptance " + std::to_string(s.acceptance) +
                           " fell below " + std::to_string(opt.min_acceptance) + " after " +
                           std::to_string(s.probed) + " probes");
  return s.points;
}

}  // namespace hmatch
