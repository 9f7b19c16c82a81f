#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <mutex>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace hmatch {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Input validation failure (bad manifest, point outside bounds, ...).
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Emulator fitting failure (rank deficiency that cannot be repaired,
/// non-positive-definite training covariance, ...).
struct FitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A sampler or wave found the target region empty (or effectively so).
struct EmptyRegionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Rejection sampling acceptance rate fell below the configured floor.
struct AcceptanceTooLow : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Filesystem / serialization failure.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// splitmix64 step; used to derive decorrelated per-subsystem seeds from one
/// campaign seed so that adding a consumer never perturbs the others.
inline std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  return std::mt19937_64(split_seed(seed, stream));
}

/// Runs fn(i) for i in [0, n) on `workers` threads.  Results must be written
/// to index i of a preallocated buffer so output order is deterministic.
template <class Fn>
void parallel_for(int n, int workers, Fn&& fn) {
  if (n <= 0) return;
  workers = std::max(1, std::min(workers, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mutex;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      try {
        for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace hmatch
