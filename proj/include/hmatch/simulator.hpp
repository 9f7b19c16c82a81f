#pragma once

#include "hmatch/common.hpp"
#include "hmatch/crosstalk/outputs.hpp"
#include "hmatch/toy.hpp"

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace hmatch {

struct SimulationBatch {
  Mat outputs;                  // rows parallel to the input batch
  std::vector<char> converged;  // 1 when the run reached a usable result
};

/// A deterministic forward model over scaled inputs in [-1,1]^input_dim.
class Simulator {
 public:
  virtual ~Simulator() = default;
  virtual int input_dim() const = 0;
  virtual int output_dim() const = 0;
  virtual std::vector<std::string> output_names() const = 0;
  virtual SimulationBatch evaluate(const Mat& points, int workers) const = 0;
};

/// Helper for simulators evaluated one point at a time.
class PointwiseSimulator : public Simulator {
 public:
  struct Result {
    Vec outputs;
    bool converged = true;
  };

  SimulationBatch evaluate(const Mat& points, int workers) const final {
    const int n = static_cast<int>(points.rows());
    if (points.cols() != input_dim())
      throw ValidationError("simulator input dimension mismatch");
    SimulationBatch batch;
    batch.outputs.resize(n, output_dim());
    batch.converged.assign(static_cast<std::size_t>(n), 0);
    parallel_for(n, workers, [&](int i) {
      const Result r = evaluate_one(points.row(i).transpose());
      batch.outputs.row(i) = r.outputs.transpose();
      batch.converged[static_cast<std::size_t>(i)] = r.converged ? 1 : 0;
    });
    return batch;
  }

 protected:
  virtual Result evaluate_one(const Vec& x) const = 0;
};

/// The 18-equation hormonal crosstalk model reduced to its 32 experimental
/// comparisons.
class CrosstalkSimulator : public PointwiseSimulator {
 public:
  explicit CrosstalkSimulator(crosstalk::SolverOptions options = {}) : options_(options) {}

  int input_dim() const override { return crosstalk::kNumInputs; }
  int output_dim() const override { return crosstalk::kNumOutputs; }
  std::vector<std::string> output_names() const override {
    std::vector<std::string> names;
    names.reserve(crosstalk::kNumOutputs);
    for (const auto& def : crosstalk::kOutputTable) names.emplace_back(def.id);
    return names;
  }

 protected:
  Result evaluate_one(const Vec& x) const override {
    const crosstalk::OutputVector out = crosstalk::compute_outputs(x, options_);
    Result r;
    r.outputs = out.values;
    r.converged = out.converged;
    return r;
  }

 private:
  crosstalk::SolverOptions options_;
};

/// f(x) = 0.1x + cos(x) on [0, 11*pi/3], driven in scaled coordinates.
class Toy1dSimulator : public PointwiseSimulator {
 public:
  int input_dim() const override { return 1; }
  int output_dim() const override { return 1; }
  std::vector<std::string> output_names() const override { return {"toy"}; }

 protected:
  Result evaluate_one(const Vec& x) const override {
    Result r;
    r.outputs = Vec::Constant(1, toy_1d(toy_to_natural(x[0])));
    return r;
  }
};

/// Adapter for an external simulator process.  The batch is written to a
/// temporary file as newline-delimited points (coordinates separated by
/// spaces); the command reads them on stdin and must reply with one line per
/// point carrying output_dim values, optionally followed by a 0/1
/// convergence flag.  Non-finite outputs also mark a run as non-converged.
class ExternalCommandSimulator : public Simulator {
 public:
  ExternalCommandSimulator(std::string command, int input_dim,
                           std::vector<std::string> output_names)
      : command_(std::move(command)), input_dim_(input_dim), names_(std::move(output_names)) {
    if (input_dim_ < 1) throw ValidationError("external simulator: input_dim must be positive");
    if (names_.empty()) throw ValidationError("external simulator: output names required");
  }

  int input_dim() const override { return input_dim_; }
  int output_dim() const override { return static_cast<int>(names_.size()); }
  std::vector<std::string> output_names() const override { return names_; }

  SimulationBatch evaluate(const Mat& points, int /*workers*/) const override {
    namespace fs = std::filesystem;
    const int n = static_cast<int>(points.rows());
    if (points.cols() != input_dim_)
      throw ValidationError("external simulator input dimension mismatch");

    static std::atomic<unsigned> counter{0};
    const fs::path tmp = fs::temp_directory_path() /
                         ("hmatch-sim-" + std::to_string(::getpid()) + "-" +
                          std::to_string(counter.fetch_add(1)) + ".txt");
    {
      std::ofstream out(tmp);
      if (!out) throw IoError("cannot write simulator input: " + tmp.string());
      for (int i = 0; i < n; ++i) {
        for (int k = 0; k < input_dim_; ++k) {
          if (k) out << ' ';
          char buf[32];
          std::snprintf(buf, sizeof(buf), "%.17g", points(i, k));
          out << buf;
        }
        out << '\n';
      }
    }

    const std::string cmd = command_ + " < '" + tmp.string() + "'";
    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (!pipe) {
      fs::remove(tmp);
      throw IoError("cannot launch simulator command: " + command_);
    }
    std::string text;
    char buf[4096];
    std::size_t got;
    while ((got = std::fread(buf, 1, sizeof(buf), pipe)) > 0) text.append(buf, got);
    const int status = ::pclose(pipe);
    fs::remove(tmp);
    if (status != 0)
      throw IoError("simulator command failed with status " + std::to_string(status));

    SimulationBatch batch;
    batch.outputs.resize(n, output_dim());
    batch.converged.assign(static_cast<std::size_t>(n), 0);
    std::istringstream lines(text);
    std::string line;
    int row = 0;
    while (std::getline(lines, line)) {
      if (line.empty()) continue;
      if (row >= n) throw IoError("simulator command produced too many lines");
      std::istringstream fields(line);
      double v;
      std::vector<double> vals;
      while (fields >> v) vals.push_back(v);
      const std::size_t q = static_cast<std::size_t>(output_dim());
      if (vals.size() != q && vals.size() != q + 1)
        throw IoError("simulator line " + std::to_string(row + 1) + " has " +
                      std::to_string(vals.size()) + " fields, expected " + std::to_string(q) +
                      " (+ optional flag)");
      bool ok = vals.size() == q ? true : vals[q] != 0.0;
      for (std::size_t k = 0; k < q; ++k) {
        batch.outputs(row, static_cast<Eigen::Index>(k)) = vals[k];
        if (!std::isfinite(vals[k])) ok = false;
      }
      batch.converged[static_cast<std::size_t>(row)] = ok ? 1 : 0;
      ++row;
    }
    if (row != n)
      throw IoError("simulator command produced " + std::to_string(row) + " lines, expected " +
                    std::to_string(n));
    return batch;
  }

 private:
  std::string command_;
  int input_dim_;
  std::vector<std::string> names_;
};

}  // namespace hmatch
