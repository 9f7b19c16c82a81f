#pragma once

#include "hmatch/design/mcmc.hpp"
#include "hmatch/design/rejection.hpp"
#include "hmatch/emulation/correlation.hpp"
#include "hmatch/emulation/diagnostics.hpp"
#include "hmatch/matching/targets.hpp"
#include "hmatch/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace hmatch {

/// How the residual process of each output emulator is treated in a wave.
///   linear         - regression mean, uncorrelated residual
///   fixed_theta    - regression mean, Gaussian residual with theta fixed
///   grouped_theta  - regression mean, grouped maximum-likelihood theta
///   pinned         - no fitting; spec supplied verbatim (verification runs)
enum class Strategy { linear, fixed_theta, grouped_theta, pinned };

inline std::string strategy_name(Strategy s) {
  switch (s) {
    case Strategy::linear: return "linear";
    case Strategy::fixed_theta: return "fixed_theta";
    case Strategy::grouped_theta: return "grouped_theta";
    case Strategy::pinned: return "pinned";
  }
  throw ValidationError("unknown strategy");
}

inline Strategy strategy_from_name(const std::string& s) {
  if (s == "linear") return Strategy::linear;
  if (s == "fixed_theta") return Strategy::fixed_theta;
  if (s == "grouped_theta") return Strategy::grouped_theta;
  if (s == "pinned") return Strategy::pinned;
  throw ValidationError("unknown strategy '" + s + "'");
}

/// Residual process used verbatim by Strategy::pinned.
struct PinnedResidual {
  double sigma_u2 = 1.0;
  double sigma_w2 = 0.0;
  double theta = 1.0;
  bool fit_mean = false;  // when true a regression mean is still fitted
};

struct WaveConfig {
  int index = 1;
  std::string datasets;  // dataset letters matched this wave ("AB"); empty = all
  int runs = 500;
  int holdout = 200;
  Strategy strategy = Strategy::linear;
  std::optional<PinnedResidual> pinned;
  Cutoffs cutoffs;
  /// Train on this wave's runs plus every earlier wave's (paper-style toy refocus).
  bool cumulative_training = false;
  /// Fresh membership sample size used for the retained-fraction estimate.
  int membership_sample = 10000;
  /// Residual variance share assigned to the nugget for correlated strategies.
  double nugget_share = 0.05;
  StepwiseOptions stepwise;
  CorrelationFitOptions correlation;
  DiagnosticOptions diagnostics;
  LhsOptions lhs;
  RejectionOptions rejection;
  McmcOptions mcmc;
};

/// Fate of one output's emulator in a wave.
struct OutputReport {
  int output = -1;
  std::string name;
  bool fitted = false;
  bool accepted = false;
  std::string note;  // why a fit was skipped or rejected
  DiagnosticReport diag;
  std::optional<CorrelationFit> correlation;
};

struct LedgerRow {
  int wave = 0;
  int designed = 0;
  int converged = 0;
  int train_n = 0;
  int holdout_n = 0;
  int emulated = 0;   // outputs whose emulator passed diagnostics
  int deferred = 0;   // outputs skipped or failed this wave
  std::string design_method;
  double fraction_of_previous = std::numeric_limits<double>::quiet_NaN();
  double cumulative = std::numeric_limits<double>::quiet_NaN();
  /// Converged runs meeting every declared target at true-run I <= 3.
  double acceptable_fraction = std::numeric_limits<double>::quiet_NaN();
  int safety_eligible = 0;
  int safety_false_discards = 0;
  double safety_rate = 0.0;
  /// max over outputs of median emulator variance / observation variance
  /// across the retained sample; < 1 means emulation is no longer limiting.
  double variance_ratio = std::numeric_limits<double>::quiet_NaN();
};

struct WaveResult {
  WaveConfig config;
  Mat design;                  // runs + holdout rows actually evaluated
  SimulationBatch batch;       // parallel to design rows
  std::vector<int> train_rows;
  std::vector<int> holdout_rows;
  WaveTest test;               // accepted emulators with wave cutoffs
  std::vector<OutputReport> reports;
  Mat retained;                // fresh members of the region after this wave
  LedgerRow ledger;
};

/// Rolling campaign state threaded through successive waves.
struct CampaignState {
  Region region;
  Mat members;           // known members of the current region (sampler seeds)
  double cumulative = 1.0;
  Mat train_X;           // converged runs of all completed waves
  Mat train_Y;
  Mat archive_X;         // runs acceptable at true-run I <= 3
  Mat archive_Y;
  std::vector<LedgerRow> ledger;
};

namespace detail {

inline Mat drop_duplicate_rows(const Mat& pts) {
  std::set<std::vector<double>> seen;
  Mat out(pts.rows(), pts.cols());
  Eigen::Index kept = 0;
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    std::vector<double> key(pts.row(i).begin(), pts.row(i).end());
    if (seen.insert(std::move(key)).second) out.row(kept++) = pts.row(i);
  }
  out.conservativeResize(kept, pts.cols());
  return out;
}

inline Mat stack_rows(const Mat& a, const Mat& b) {
  if (a.rows() == 0) return b;
  if (b.rows() == 0) return a;
  if (a.cols() != b.cols()) throw ValidationError("stack_rows: column mismatch");
  Mat out(a.rows() + b.rows(), a.cols());
  out.topRows(a.rows()) = a;
  out.bottomRows(b.rows()) = b;
  return out;
}

/// Draws n points from the region: rejection from the bounding box first,
/// falling back to a Markov chain seeded at known members once the acceptance
/// rate starves.  With `spread`, region members are oversampled and a greedy
/// maximin subset is kept, so the result is space-filling over the region
/// rather than plain uniform.  `method` reports which route produced the
/// points.
inline Mat draw_from_region(const Region& region, int n, std::uint64_t seed, const Mat& members,
                            const LhsOptions& lhs, const RejectionOptions& rej_in,
                            const McmcOptions& mcmc, bool spread, std::string* method) {
  RejectionOptions rej = rej_in;
  rej.lhs = lhs;
  // Wave 1 keeps the raw maximin hypercube; oversampling only helps once the
  // region has holes for the design to avoid.
  const bool oversample = spread && !region.waves().empty();
  const int want = oversample ? 4 * n : n;
  const RejectionSample rs = rejection_sample(region, want, split_seed(seed, 1), rej);
  if (static_cast<int>(rs.points.rows()) >= n) {
    if (method) *method = region.waves().empty() ? "lhs" : "rejection";
    return oversample ? greedy_maximin_subset(rs.points, n) : rs.points;
  }
  Mat starts = stack_rows(members, rs.points);
  if (starts.rows() == 0)
    throw EmptyRegionError("sampler starved at acceptance " + std::to_string(rs.acceptance) +
                           " with no known member to seed a chain");
  if (method) *method = "mcmc";
  const int chain_n = spread ? 2 * n : n;
  Mat pts = mcmc_uniform(region, chain_n, split_seed(seed, 2), starts, mcmc);
  pts = drop_duplicate_rows(stack_rows(pts, rs.points));
  for (int extra = 0; pts.rows() < n && extra < 16; ++extra) {
    Mat more = mcmc_uniform(region, n, split_seed(seed, 3 + static_cast<std::uint64_t>(extra)),
                            stack_rows(starts, pts), mcmc);
    pts = drop_duplicate_rows(stack_rows(pts, more));
  }
  if (pts.rows() > n) pts = spread ? greedy_maximin_subset(pts, n) : Mat(pts.topRows(n));
  if (pts.rows() < std::max(1, n / 2))
    throw EmptyRegionError("chain sampler could not produce enough distinct points");
  return pts;
}

inline double true_run_i_max(const Vec& y, const std::vector<int>& outputs,
                             const std::vector<ObservationTarget>& targets) {
  double worst = 0.0;
  for (std::size_t k = 0; k < outputs.size(); ++k)
    worst = std::max(worst, implausibility(y[outputs[k]], 0.0, targets[k]));
  return worst;
}

}  // namespace detail

/// Runs one refocusing wave: design in the current region, simulate, emulate
/// each declared output, screen the emulators on held-out runs, then update
/// the region and its bookkeeping.  `targets` is parallel to the simulator's
/// output columns.
inline WaveResult run_wave(Simulator& sim, CampaignState& state, const WaveConfig& config,
                           const std::vector<ObservationTarget>& targets, int workers,
                           std::uint64_t seed) {
  const int dim = sim.input_dim();
  if (static_cast<int>(targets.size()) != sim.output_dim())
    throw ValidationError("one observation target per simulator output is required");
  if (state.region.dim() != dim) throw ValidationError("region dimension mismatch");
  if (config.runs <= 0) throw ValidationError("wave needs a positive run budget");
  if (!config.cutoffs.any()) throw ValidationError("wave needs at least one cutoff");
  if (config.strategy == Strategy::pinned && !config.pinned)
    throw ValidationError("pinned strategy needs a pinned residual spec");

  WaveResult res;
  res.config = config;
  res.ledger.wave = config.index;

  // Outputs in play this wave.
  std::vector<int> active_outputs;
  for (int j = 0; j < static_cast<int>(targets.size()); ++j) {
    if (config.datasets.empty() ||
        config.datasets.find(targets[static_cast<std::size_t>(j)].dataset) != std::string::npos)
      active_outputs.push_back(j);
  }
  if (active_outputs.empty()) throw ValidationError("no targets match the wave's datasets");

  // Design and simulate.
  const int n_design = config.runs + config.holdout;
  res.design = detail::draw_from_region(state.region, n_design, split_seed(seed, 11),
                                        state.members, config.lhs, config.rejection, config.mcmc,
                                        /*spread=*/true, &res.ledger.design_method);
  res.batch = sim.evaluate(res.design, workers);
  res.ledger.designed = static_cast<int>(res.design.rows());

  const int n_actual = static_cast<int>(res.design.rows());
  const int run_rows = std::min(config.runs, n_actual);
  for (int i = 0; i < n_actual; ++i) {
    if (!res.batch.converged[static_cast<std::size_t>(i)]) continue;
    ++res.ledger.converged;
    (i < run_rows ? res.train_rows : res.holdout_rows).push_back(i);
  }
  res.ledger.train_n = static_cast<int>(res.train_rows.size());
  res.ledger.holdout_n = static_cast<int>(res.holdout_rows.size());

  Mat X_train(res.train_rows.size(), dim);
  Mat Y_train(res.train_rows.size(), targets.size());
  for (std::size_t r = 0; r < res.train_rows.size(); ++r) {
    X_train.row(static_cast<Eigen::Index>(r)) = res.design.row(res.train_rows[r]);
    Y_train.row(static_cast<Eigen::Index>(r)) = res.batch.outputs.row(res.train_rows[r]);
  }
  if (config.cumulative_training) {
    X_train = detail::stack_rows(state.train_X, X_train);
    Y_train = detail::stack_rows(state.train_Y, Y_train);
  }
  const int n_train = static_cast<int>(X_train.rows());
  const bool needs_regression = config.strategy != Strategy::pinned ||
                                (config.pinned && config.pinned->fit_mean);
  if (n_train < 2 || (needs_regression && n_train < 20))
    throw FitError("only " + std::to_string(n_train) + " converged training runs; too few to fit");

  Mat X_hold(res.holdout_rows.size(), dim);
  Mat Y_hold(res.holdout_rows.size(), targets.size());
  for (std::size_t r = 0; r < res.holdout_rows.size(); ++r) {
    X_hold.row(static_cast<Eigen::Index>(r)) = res.design.row(res.holdout_rows[r]);
    Y_hold.row(static_cast<Eigen::Index>(r)) = res.batch.outputs.row(res.holdout_rows[r]);
  }

  // Fit and screen one emulator per active output.
  const std::vector<std::string> names = sim.output_names();
  std::vector<int> accepted_outputs;
  for (int j : active_outputs) {
    OutputReport rep;
    rep.output = j;
    rep.name = names[static_cast<std::size_t>(j)];
    TrainingSet ts{X_train, Y_train.col(j)};
    try {
      EmulatorSpec spec;
      spec.output_id = rep.name;
      if (config.strategy == Strategy::pinned) {
        const PinnedResidual& p = *config.pinned;
        if (p.fit_mean) {
          const MeanFit mf = fit_mean_and_actives(ts, config.stepwise);
          spec.basis = mf.basis;
          spec.beta = mf.beta;
          spec.active = mf.active;
        }
        if (spec.active.empty())
          for (int k = 0; k < dim; ++k) spec.active.push_back(k);
        spec.theta = Vec::Constant(static_cast<Eigen::Index>(spec.active.size()), p.theta);
        spec.sigma_u2 = p.sigma_u2;
        spec.sigma_w2 = p.sigma_w2;
        spec.residual = ResidualModel::correlated;
      } else {
        const MeanFit mf = fit_mean_and_actives(ts, config.stepwise);
        spec.basis = mf.basis;
        spec.beta = mf.beta;
        spec.active = mf.active;
        if (config.strategy == Strategy::linear || mf.active.empty()) {
          if (config.strategy != Strategy::linear)
            rep.note = "no active inputs; residual left uncorrelated";
          spec.residual = ResidualModel::uncorrelated;
          spec.sigma_u2 = mf.resid_var;
          spec.sigma_w2 = 0.0;
        } else {
          spec.residual = ResidualModel::correlated;
          spec.sigma_w2 = config.nugget_share * mf.resid_var;
          spec.sigma_u2 = (1.0 - config.nugget_share) * mf.resid_var;
          const Mat G = build_design_matrix(X_train, mf.basis);
          const Vec resid = ts.y - G * mf.beta;
          const ThetaMode mode = config.strategy == Strategy::fixed_theta ? ThetaMode::fixed
                                                                          : ThetaMode::grouped;
          CorrelationFitOptions copt = config.correlation;
          copt.seed = split_seed(seed, 1000 + static_cast<std::uint64_t>(j));
          const CorrelationFit cf = fit_correlation_lengths(
              ts, resid, mf.active, mf.linear_strength, spec.sigma_u2, spec.sigma_w2, mode, copt);
          spec.theta = cf.theta;
          rep.correlation = cf;
        }
      }
      auto em = std::make_shared<const Emulator>(spec, ts);
      rep.fitted = true;
      if (res.holdout_rows.empty()) {
        rep.accepted = true;
        if (rep.note.empty()) rep.note = "no holdout runs; accepted unscreened";
      } else {
        rep.diag = diagnose(*em, X_hold, Y_hold.col(j), &targets[static_cast<std::size_t>(j)],
                            config.diagnostics);
        rep.accepted = rep.diag.pass;
        if (!rep.accepted) rep.note = "failed holdout diagnostics";
      }
      if (rep.accepted) {
        res.test.emulators.push_back(std::move(em));
        res.test.targets.push_back(targets[static_cast<std::size_t>(j)]);
        accepted_outputs.push_back(j);
      }
    } catch (const FitError& e) {
      rep.note = e.what();
    }
    res.reports.push_back(std::move(rep));
  }
  res.test.cutoffs = config.cutoffs;
  res.ledger.emulated = static_cast<int>(accepted_outputs.size());
  res.ledger.deferred = static_cast<int>(active_outputs.size() - accepted_outputs.size());
  if (accepted_outputs.empty()) {
    std::string why = "every output emulator was deferred; the wave cannot cut the region";
    for (const OutputReport& rep : res.reports) {
      why += "\n  " + rep.name + ": " + (rep.note.empty() ? "failed" : rep.note);
      if (rep.fitted && !res.holdout_rows.empty()) {
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      " (max|u|=%.3g, flagged %.0f%%, false discards %d/%d)", rep.diag.max_abs_u,
                      100.0 * rep.diag.flag_fraction, rep.diag.false_discards, rep.diag.eligible);
        why += buf;
      }
    }
    throw FitError(why);
  }

  // Wave-level safety check: holdout runs the simulator itself accepts must
  // survive the emulator cutoffs.
  std::vector<ObservationTarget> accepted_targets;
  for (int j : accepted_outputs) accepted_targets.push_back(targets[static_cast<std::size_t>(j)]);
  for (std::size_t r = 0; r < res.holdout_rows.size(); ++r) {
    const Vec y = Y_hold.row(static_cast<Eigen::Index>(r)).transpose();
    if (detail::true_run_i_max(y, accepted_outputs, accepted_targets) >
        config.diagnostics.cutoff)
      continue;
    ++res.ledger.safety_eligible;
    if (!res.test.accepts(X_hold.row(static_cast<Eigen::Index>(r)).transpose()))
      ++res.ledger.safety_false_discards;
  }
  res.ledger.safety_rate = res.ledger.safety_eligible > 0
                               ? static_cast<double>(res.ledger.safety_false_discards) /
                                     res.ledger.safety_eligible
                               : 0.0;

  // Retained-fraction estimate on a fresh sample of the previous region.
  {
    LhsOptions plain;  // marginally uniform jittered cells, no maximin search
    plain.candidates = 1;
    std::string method;
    const Mat fresh =
        detail::draw_from_region(state.region, config.membership_sample, split_seed(seed, 12),
                                 state.members, plain, config.rejection, config.mcmc,
                                 /*spread=*/false, &method);
    const std::vector<char> keep = res.test.accepts_batch(fresh);
    int kept = 0;
    for (char c : keep) kept += c != 0;
    res.retained.resize(kept, dim);
    Eigen::Index w = 0;
    for (Eigen::Index i = 0; i < fresh.rows(); ++i)
      if (keep[static_cast<std::size_t>(i)]) res.retained.row(w++) = fresh.row(i);
    res.ledger.fraction_of_previous =
        fresh.rows() > 0 ? static_cast<double>(kept) / static_cast<double>(fresh.rows()) : 0.0;
  }
  res.ledger.cumulative = state.cumulative * res.ledger.fraction_of_previous;

  // Emulator-variance stop statistic over the retained sample.
  if (res.retained.rows() > 0) {
    const int cap = std::min<int>(static_cast<int>(res.retained.rows()), 2000);
    const Mat probe = res.retained.topRows(cap);
    double worst = 0.0;
    Vec means, vars;
    for (std::size_t k = 0; k < res.test.emulators.size(); ++k) {
      res.test.emulators[k]->predict_batch(probe, means, vars);
      std::vector<double> v(vars.begin(), vars.end());
      std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
      worst = std::max(worst, v[v.size() / 2] / res.test.targets[k].combined_var());
    }
    res.ledger.variance_ratio = worst;
  } else {
    res.ledger.variance_ratio = std::numeric_limits<double>::infinity();
  }

  // True-run acceptability of this wave's converged runs against every
  // declared target, and the archive of fully acceptable runs.
  {
    std::vector<ObservationTarget> declared;
    for (int j : active_outputs) declared.push_back(targets[static_cast<std::size_t>(j)]);
    int acceptable = 0;
    std::vector<int> rows;
    for (int i = 0; i < n_actual; ++i) {
      if (!res.batch.converged[static_cast<std::size_t>(i)]) continue;
      const Vec y = res.batch.outputs.row(i).transpose();
      if (detail::true_run_i_max(y, active_outputs, declared) <= config.diagnostics.cutoff) {
        ++acceptable;
        rows.push_back(i);
      }
    }
    res.ledger.acceptable_fraction =
        res.ledger.converged > 0 ? static_cast<double>(acceptable) / res.ledger.converged : 0.0;
    if (!rows.empty()) {
      Mat ax(rows.size(), dim), ay(rows.size(), targets.size());
      for (std::size_t r = 0; r < rows.size(); ++r) {
        ax.row(static_cast<Eigen::Index>(r)) = res.design.row(rows[r]);
        ay.row(static_cast<Eigen::Index>(r)) = res.batch.outputs.row(rows[r]);
      }
      state.archive_X = detail::stack_rows(state.archive_X, ax);
      state.archive_Y = detail::stack_rows(state.archive_Y, ay);
    }
  }

  // Advance the campaign state.
  state.region.add_wave(res.test);
  state.members = res.retained;
  state.cumulative = res.ledger.cumulative;
  {
    Mat wx(res.train_rows.size(), dim), wy(res.train_rows.size(), targets.size());
    for (std::size_t r = 0; r < res.train_rows.size(); ++r) {
      wx.row(static_cast<Eigen::Index>(r)) = res.design.row(res.train_rows[r]);
      wy.row(static_cast<Eigen::Index>(r)) = res.batch.outputs.row(res.train_rows[r]);
    }
    state.train_X = detail::stack_rows(state.train_X, wx);
    state.train_Y = detail::stack_rows(state.train_Y, wy);
  }
  state.ledger.push_back(res.ledger);
  return res;
}

}  // namespace hmatch
