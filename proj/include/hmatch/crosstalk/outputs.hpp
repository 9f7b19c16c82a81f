#pragma once

#include "hmatch/crosstalk/steady_state.hpp"

#include <array>
#include <cmath>
#include <string>
#include <vector>

namespace hmatch::crosstalk {

/// The distinct (mutant, feeding) conditions needed by the output table.
inline std::vector<ExperimentSpec> distinct_experiments() {
  std::vector<ExperimentSpec> configs;
  auto add = [&](const ExperimentSpec& e) {
    for (const auto& c : configs)
      if (c == e) return;
    configs.push_back(e);
  };
  for (const auto& def : kOutputTable) {
    add(def.num);
    if (def.is_ratio) add(def.ref);
  }
  return configs;
}

struct OutputVector {
  Eigen::Matrix<double, kNumOutputs, 1> values = Eigen::Matrix<double, kNumOutputs, 1>::Zero();
  bool converged = false;
  /// Condition that failed to reach steady state, when converged is false.
  std::string failed_experiment;
};

inline std::string experiment_label(const ExperimentSpec& e) {
  std::string label;
  switch (e.mutant) {
    case Mutant::wild_type: label = "wt"; break;
    case Mutant::pls: label = "pls"; break;
    case Mutant::plsox: label = "PLSox"; break;
    case Mutant::etr1: label = "etr1"; break;
    case Mutant::pls_etr1: label = "plsetr1"; break;
  }
  if (e.feeding.auxin) label += "_fa";
  if (e.feeding.cytokinin) label += "_fc";
  if (e.feeding.ethylene) label += "_fe";
  return label;
}

/// Steady-state concentrations under every needed condition for one wild-type
/// base parameter set, assembled into the 32 log-scale experimental outputs.
/// Natural-log ratios are taken against the output's reference condition;
/// non-ratio outputs are logged concentrations.
inline OutputVector compute_outputs_from_base(const RateConstants& base,
                                              const SolverOptions& options = {}) {
  static const std::vector<ExperimentSpec> configs = distinct_experiments();

  OutputVector out;
  std::array<StateVec, 16> states;  // indexed as configs
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const RateConstants rc = apply_mutant(base, configs[i].mutant);
    const SteadyStateResult ss = solve_steady_state(rc, configs[i].feeding, options);
    if (!ss.converged) {
      out.converged = false;
      out.failed_experiment = experiment_label(configs[i]);
      out.values.setConstant(std::numeric_limits<double>::quiet_NaN());
      return out;
    }
    states[i] = ss.state;
  }

  auto state_of = [&](const ExperimentSpec& e) -> const StateVec& {
    for (std::size_t i = 0; i < configs.size(); ++i)
      if (configs[i] == e) return states[i];
    throw std::logic_error("experiment not precomputed");
  };

  for (int k = 0; k < kNumOutputs; ++k) {
    const OutputDef& def = kOutputTable[static_cast<std::size_t>(k)];
    const double num = measured_chemical(state_of(def.num), def.chem, base.lambda);
    if (!(num > 0.0) || !std::isfinite(num)) {
      out.converged = false;
      out.failed_experiment = experiment_label(def.num);
      out.values.setConstant(std::numeric_limits<double>::quiet_NaN());
      return out;
    }
    double v = std::log(num);
    if (def.is_ratio) {
      const double ref = measured_chemical(state_of(def.ref), def.chem, base.lambda);
      if (!(ref > 0.0) || !std::isfinite(ref)) {
        out.converged = false;
        out.failed_experiment = experiment_label(def.ref);
        out.values.setConstant(std::numeric_limits<double>::quiet_NaN());
        return out;
      }
      v -= std::log(ref);
    }
    out.values[k] = v;
  }
  out.converged = true;
  return out;
}

inline OutputVector compute_outputs(const Vec& x, const SolverOptions& options = {}) {
  return compute_outputs_from_base(base_rate_constants(x), options);
}

}  // namespace hmatch::crosstalk
