#pragma once

#include "hmatch/common.hpp"
#include "hmatch/crosstalk/tables.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace hmatch {

/// One experimental observation: value z with model-discrepancy and
/// measurement-error standard deviations, and the dataset it belongs to.
/// When built from an acceptance window, z is the window midpoint and the
/// combined 3-sigma band reproduces the window edges.
struct ObservationTarget {
  std::string id;
  double z = 0.0;
  double sigma_md = 0.0;  // model discrepancy sd
  double sigma_me = 0.0;  // measurement error sd
  char dataset = 'A';
  std::optional<std::array<double, 2>> window;  // [log_lo, log_hi] at cutoff 3

  double combined_var() const { return sigma_md * sigma_md + sigma_me * sigma_me; }

  void validate() const {
    if (sigma_md < 0 || sigma_me < 0)
      throw ValidationError("target " + id + ": negative uncertainty");
    if (!std::isfinite(z)) throw ValidationError("target " + id + ": non-finite z");
    if (window) {
      const double lo = (*window)[0], hi = (*window)[1];
      if (!(hi > lo)) throw ValidationError("target " + id + ": empty window");
      const double mid = 0.5 * (lo + hi);
      const double width = hi - lo;
      if (std::abs(z - mid) > 1e-3)
        throw ValidationError("target " + id + ": z is not the window midpoint");
      if (std::abs(6.0 * std::sqrt(combined_var()) - width) > 1e-3)
        throw ValidationError("target " + id + ": 6 sigma does not match window width");
    }
  }
};

/// Builds a target from its implausibility-3 acceptance window, splitting the
/// combined uncertainty equally between model discrepancy and measurement
/// error.
inline ObservationTarget target_from_window(std::string id, char dataset, double log_lo,
                                            double log_hi) {
  ObservationTarget t;
  t.id = std::move(id);
  t.dataset = dataset;
  t.z = 0.5 * (log_lo + log_hi);
  const double sigma = (log_hi - log_lo) / 6.0;
  t.sigma_md = t.sigma_me = sigma / std::sqrt(2.0);
  t.window = {log_lo, log_hi};
  t.validate();
  return t;
}

/// The 32 crosstalk observation targets, in output-table order.
inline std::vector<ObservationTarget> crosstalk_targets() {
  std::vector<ObservationTarget> targets;
  targets.reserve(crosstalk::kNumOutputs);
  for (const auto& def : crosstalk::kOutputTable)
    targets.push_back(
        target_from_window(std::string(def.id), def.dataset, def.log_lo, def.log_hi));
  return targets;
}

/// |E_D[f(x)] - z| / sqrt(Var_D[f(x)] + sigma_md^2 + sigma_me^2).
/// Pass variance = 0 for the implausibility of an actual simulator run.
inline double implausibility(double mean, double variance, const ObservationTarget& target) {
  const double total = variance + target.combined_var();
  if (!(total > 0.0))
    throw ValidationError("target " + target.id +
                          ": implausibility undefined with zero total variance");
  return std::abs(mean - target.z) / std::sqrt(total);
}

struct CombinedImplausibility {
  double i_max = 0.0;
  std::optional<double> i_2max;
  std::optional<double> i_3max;
};

/// Maximum, second maximum and third maximum implausibility over outputs.
inline CombinedImplausibility combined_implausibility(const std::vector<double>& values) {
  if (values.empty()) throw ValidationError("combined implausibility of no outputs");
  CombinedImplausibility c;
  double top[3] = {-1.0, -1.0, -1.0};
  for (double v : values) {
    if (v > top[0]) {
      top[2] = top[1];
      top[1] = top[0];
      top[0] = v;
    } else if (v > top[1]) {
      top[2] = top[1];
      top[1] = v;
    } else if (v > top[2]) {
      top[2] = v;
    }
  }
  c.i_max = top[0];
  if (values.size() >= 2) c.i_2max = top[1];
  if (values.size() >= 3) c.i_3max = top[2];
  return c;
}

/// Which combined measures a wave cuts on, and where.
struct Cutoffs {
  std::optional<double> i_max;
  std::optional<double> i_2max;
  std::optional<double> i_3max;

  bool any() const { return i_max || i_2max || i_3max; }
};

inline bool passes(const CombinedImplausibility& c, const Cutoffs& cut) {
  if (!cut.any()) throw ValidationError("wave cutoffs are all unset");
  if (cut.i_max && c.i_max > *cut.i_max) return false;
  if (cut.i_2max && c.i_2max && *c.i_2max > *cut.i_2max) return false;
  if (cut.i_3max && c.i_3max && *c.i_3max > *cut.i_3max) return false;
  return true;
}

}  // namespace hmatch
