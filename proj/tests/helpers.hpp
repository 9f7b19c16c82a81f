#pragma once

// Shared test utilities: temp directories, subprocess capture, and the
// frozen reference values used across suites.

#include "hmatch/common.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace testutil {

/// Temp directory that cleans up after itself.
struct TempDir {
  std::filesystem::path path;

  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path = std::filesystem::temp_directory_path() /
           (tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string str() const { return path.string(); }
};

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr interleaved
};

/// Runs a shell command, capturing combined stdout/stderr and the exit code.
inline RunResult run(const std::string& command) {
  RunResult res;
  FILE* pipe = ::popen((command + " 2>&1").c_str(), "r");
  if (!pipe) return res;
  char buf[4096];
  std::size_t got;
  while ((got = std::fread(buf, 1, sizeof(buf), pipe)) > 0) res.output.append(buf, got);
  const int status = ::pclose(pipe);
  if (WIFEXITED(status)) res.exit_code = WEXITSTATUS(status);
  return res;
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

/// Roots of 0.1x + cos x = -0.3 on [0, 11*pi/3], found by scanning 4096
/// brackets and bisecting each sign change to 1e-14.  Used by the campaign
/// tests as ground truth; test_toy_roots proves there are exactly two and
/// freezes their values.
inline std::vector<double> toy_band_center_roots() {
  auto g = [](double x) { return 0.1 * x + std::cos(x) + 0.3; };
  const double lo = 0.0, hi = 11.0 * 3.14159265358979323846 / 3.0;
  const int cells = 4096;
  std::vector<double> roots;
  double prev_x = lo, prev_g = g(lo);
  for (int i = 1; i <= cells; ++i) {
    const double x = lo + (hi - lo) * i / cells;
    const double gx = g(x);
    if ((prev_g < 0) != (gx < 0)) {
      double a = prev_x, b = x;
      for (int it = 0; it < 200 && b - a > 1e-14; ++it) {
        const double mid = 0.5 * (a + b);
        ((g(a) < 0) != (g(mid) < 0) ? b : a) = mid;
      }
      roots.push_back(0.5 * (a + b));
    }
    prev_x = x;
    prev_g = gx;
  }
  return roots;
}

inline constexpr double kToyRoot1 = 2.1067681334734174;
inline constexpr double kToyRoot2 = 3.9447052170847794;

}  // namespace testutil
