#pragma once

#include "hmatch/emulation/emulator.hpp"
#include "hmatch/matching/targets.hpp"

#include <memory>
#include <vector>

namespace hmatch {

/// One wave's emulator-based acceptance test: implausibility of every listed
/// output against its target, combined and compared with the wave cutoffs.
struct WaveTest {
  std::vector<std::shared_ptr<const Emulator>> emulators;
  std::vector<ObservationTarget> targets;  // parallel to emulators
  Cutoffs cutoffs;

  bool accepts(const Vec& x) const {
    std::vector<double> imp;
    imp.reserve(emulators.size());
    for (std::size_t k = 0; k < emulators.size(); ++k) {
      const Prediction p = emulators[k]->predict(x);
      imp.push_back(implausibility(p.mean, p.variance, targets[k]));
    }
    return passes(combined_implausibility(imp), cutoffs);
  }

  /// accepts() over every row of `points`, letting the emulators batch their
  /// linear algebra.  Returns one 0/1 flag per row.
  std::vector<char> accepts_batch(const Mat& points) const {
    const int m = static_cast<int>(points.rows());
    Mat imp(m, static_cast<Eigen::Index>(emulators.size()));
    Vec means, vars;
    for (std::size_t k = 0; k < emulators.size(); ++k) {
      emulators[k]->predict_batch(points, means, vars);
      for (int i = 0; i < m; ++i)
        imp(i, static_cast<Eigen::Index>(k)) = implausibility(means[i], vars[i], targets[k]);
    }
    std::vector<char> out(static_cast<std::size_t>(m), 0);
    std::vector<double> row(emulators.size());
    for (int i = 0; i < m; ++i) {
      for (std::size_t k = 0; k < emulators.size(); ++k)
        row[k] = imp(i, static_cast<Eigen::Index>(k));
      out[static_cast<std::size_t>(i)] = passes(combined_implausibility(row), cutoffs) ? 1 : 0;
    }
    return out;
  }
};

/// Current non-implausible set: the initial box intersected with every
/// completed wave's acceptance test.  Membership is deterministic.
class Region {
 public:
  static Region box(int dim) { return Region(dim); }

  Region() : Region(0) {}
  explicit Region(int dim)
      : lo_(Vec::Constant(std::max(dim, 0), -1.0)), hi_(Vec::Constant(std::max(dim, 0), 1.0)) {}

  int dim() const { return static_cast<int>(lo_.size()); }
  const Vec& lo() const { return lo_; }
  const Vec& hi() const { return hi_; }

  void add_wave(WaveTest test) { waves_.push_back(std::move(test)); }
  const std::vector<WaveTest>& waves() const { return waves_; }

  bool in_box(const Vec& x) const {
    if (x.size() != lo_.size()) throw ValidationError("region: point dimension mismatch");
    return (x.array() >= lo_.array()).all() && (x.array() <= hi_.array()).all();
  }

  bool contains(const Vec& x) const {
    if (!in_box(x)) return false;
    for (const auto& w : waves_)
      if (!w.accepts(x)) return false;
    return true;
  }

  /// contains() over every row of `points`.  Rows already rejected by one wave
  /// are dropped before the next wave's batch, so later (larger) emulators only
  /// see survivors.
  std::vector<char> contains_batch(const Mat& points) const {
    const int m = static_cast<int>(points.rows());
    std::vector<char> out(static_cast<std::size_t>(m), 0);
    std::vector<int> alive;
    alive.reserve(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
      const Vec x = points.row(i).transpose();
      if (in_box(x)) alive.push_back(i);
    }
    for (const auto& w : waves_) {
      if (alive.empty()) break;
      Mat sub(static_cast<Eigen::Index>(alive.size()), points.cols());
      for (std::size_t r = 0; r < alive.size(); ++r) sub.row(static_cast<Eigen::Index>(r)) = points.row(alive[r]);
      const std::vector<char> ok = w.accepts_batch(sub);
      std::vector<int> next;
      next.reserve(alive.size());
      for (std::size_t r = 0; r < alive.size(); ++r)
        if (ok[r]) next.push_back(alive[r]);
      alive.swap(next);
    }
    for (int i : alive) out[static_cast<std::size_t>(i)] = 1;
    return out;
  }

 private:
  Vec lo_, hi_;
  std::vector<WaveTest> waves_;
};

}  // namespace hmatch
