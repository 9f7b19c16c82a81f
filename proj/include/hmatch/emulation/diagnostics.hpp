#pragma once

#include "hmatch/emulation/emulator.hpp"
#include "hmatch/matching/targets.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace hmatch {

struct DiagnosticOptions {
  double u_flag = 3.0;             // |standardised error| beyond this is a conflict
  double max_flag_fraction = 0.10; // tolerated fraction of flagged points
  double cutoff = 3.0;             // per-output implausibility cutoff
  double max_false_discard = 0.05; // tolerated fraction of unsafe discards
};

/// Integer allowance for a fractional tolerance on a small sample: a handful
/// of holdout points cannot resolve a 5-10% rate, so a count-of-one (or, for
/// the softer flag check, count-of-two) excursion is not treated as evidence.
inline int count_allowance(double fraction, int n, int floor_count) {
  return std::max(floor_count, static_cast<int>(std::floor(fraction * n + 1e-9)));
}

/// Held-out validation of one emulator: standardised prediction errors, and
/// when a target is supplied, the implausibility-consistency check (a run the
/// simulator itself finds acceptable must not be discarded by the emulator).
struct DiagnosticReport {
  int holdout = 0;
  std::vector<double> u;          // standardised errors per holdout point
  double max_abs_u = 0.0;
  double flag_fraction = 0.0;     // fraction with |u| > u_flag
  int eligible = 0;               // holdout runs with true-run I <= cutoff
  int false_discards = 0;         // of those, runs the emulator would discard
  std::vector<int> false_discard_rows;
  bool pass = true;
};

inline DiagnosticReport diagnose(const Emulator& emulator, const Mat& X_holdout,
                                 const Vec& y_holdout, const ObservationTarget* target = nullptr,
                                 const DiagnosticOptions& opt = {}) {
  const int m = static_cast<int>(X_holdout.rows());
  if (y_holdout.size() != m) throw ValidationError("holdout X/y size mismatch");
  DiagnosticReport report;
  report.holdout = m;
  report.u.resize(static_cast<std::size_t>(m));

  int flagged = 0;
  for (int i = 0; i < m; ++i) {
    const Vec x = X_holdout.row(i).transpose();
    const Prediction p = emulator.predict(x);
    const double sd = std::sqrt(std::max(p.variance, 1e-300));
    const double u = (y_holdout[i] - p.mean) / sd;
    report.u[static_cast<std::size_t>(i)] = u;
    report.max_abs_u = std::max(report.max_abs_u, std::abs(u));
    if (std::abs(u) > opt.u_flag) ++flagged;

    if (target) {
      const double true_i = implausibility(y_holdout[i], 0.0, *target);
      if (true_i <= opt.cutoff) {
        ++report.eligible;
        const double emu_i = implausibility(p.mean, p.variance, *target);
        if (emu_i > opt.cutoff) {
          ++report.false_discards;
          report.false_discard_rows.push_back(i);
        }
      }
    }
  }
  report.flag_fraction = m > 0 ? static_cast<double>(flagged) / m : 0.0;

  report.pass = flagged <= count_allowance(opt.max_flag_fraction, m, 2);
  if (target && report.eligible > 0 &&
      report.false_discards > count_allowance(opt.max_false_discard, report.eligible, 1))
    report.pass = false;
  return report;
}

}  // namespace hmatch
