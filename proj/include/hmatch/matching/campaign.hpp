#pragma once

#include "hmatch/matching/wave.hpp"

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace hmatch {

struct CampaignConfig {
  std::vector<WaveConfig> schedule;
  std::uint64_t seed = 0;
  int workers = 1;
  /// Stop early once every emulator's median variance over the retained
  /// sample falls below this multiple of the observation variance.  0 = off.
  double stop_var_ratio = 0.0;
};

struct CampaignResult {
  std::vector<WaveResult> waves;
  CampaignState state;
  std::string stop_reason;  // schedule-complete | region-empty | variance-resolved
  bool region_empty() const { return stop_reason == "region-empty"; }
};

/// Runs the scheduled waves in order, stopping early when the region dies or
/// when emulation stops being the limiting uncertainty.  `on_wave`, when set,
/// fires after each completed wave (artifact writing, progress logs).  Passing
/// a state with `completed_waves` > 0 resumes a campaign mid-schedule.
inline CampaignResult run_campaign(
    Simulator& sim, const std::vector<ObservationTarget>& targets, const CampaignConfig& config,
    const std::function<void(const WaveResult&, const CampaignState&)>& on_wave = {},
    CampaignState resume_state = {}, std::size_t completed_waves = 0) {
  if (config.schedule.empty()) throw ValidationError("campaign schedule is empty");
  if (completed_waves > config.schedule.size())
    throw ValidationError("resume state is ahead of the schedule");
  CampaignResult res;
  if (completed_waves == 0) {
    res.state.region = Region::box(sim.input_dim());
  } else {
    res.state = std::move(resume_state);
    if (!res.state.ledger.empty() && res.state.ledger.back().fraction_of_previous <= 0.0) {
      res.stop_reason = "region-empty";
      return res;
    }
  }
  res.stop_reason = "schedule-complete";
  for (std::size_t w = completed_waves; w < config.schedule.size(); ++w) {
    WaveConfig wc = config.schedule[w];
    wc.index = static_cast<int>(w) + 1;
    try {
      WaveResult wave = run_wave(sim, res.state, wc, targets, config.workers,
                                 split_seed(config.seed, 100 + w));
      if (on_wave) on_wave(wave, res.state);
      const LedgerRow& row = wave.ledger;
      res.waves.push_back(std::move(wave));
      if (row.fraction_of_previous <= 0.0) {
        res.stop_reason = "region-empty";
        break;
      }
      if (config.stop_var_ratio > 0.0 && row.variance_ratio < config.stop_var_ratio &&
          w + 1 < config.schedule.size()) {
        res.stop_reason = "variance-resolved";
        break;
      }
    } catch (const EmptyRegionError&) {
      res.stop_reason = "region-empty";
      break;
    }
  }
  return res;
}

}  // namespace hmatch
