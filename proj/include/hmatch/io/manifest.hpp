#pragma once

#include "hmatch/crosstalk/tables.hpp"
#include "hmatch/io/emulator_json.hpp"
#include "hmatch/matching/campaign.hpp"
#include "hmatch/toy.hpp"

#include <json.hpp>

#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace hmatch {

/// Adapter spec for driving an external simulator executable.
struct ExternalSimulatorSpec {
  std::string command;
  int inputs = 0;
  std::vector<std::string> outputs;
};

/// Everything a campaign needs, as read from one manifest file.  The raw text
/// is kept so the output directory can carry a verbatim provenance copy.
struct CampaignManifest {
  std::string simulator_id;  // crosstalk | toy1d | external
  std::optional<ExternalSimulatorSpec> external;
  std::uint64_t seed = 1;
  int workers = 1;
  std::string out_dir;
  double stop_var_ratio = 0.0;
  std::vector<ObservationTarget> targets;
  std::vector<WaveConfig> schedule;
  std::string raw;
};

inline ObservationTarget toy_target() {
  ObservationTarget t;
  t.id = "toy";
  t.z = -0.3;
  t.sigma_md = 0.0;
  t.sigma_me = 0.05;
  t.dataset = 'A';
  return t;
}

namespace io {

inline WaveConfig wave_config_from_json(const json& j) {
  WaveConfig w;
  w.datasets = j.value("datasets", std::string());
  if (!j.contains("runs")) throw ValidationError("wave config needs a run count");
  w.runs = j.at("runs").get<int>();
  w.holdout = j.value("holdout", w.holdout);
  w.strategy = strategy_from_name(j.value("strategy", std::string("linear")));
  if (j.contains("pinned")) {
    const json& p = j["pinned"];
    PinnedResidual pr;
    pr.sigma_u2 = p.value("sigma_u2", pr.sigma_u2);
    pr.sigma_w2 = p.value("sigma_w2", pr.sigma_w2);
    pr.theta = p.value("theta", pr.theta);
    pr.fit_mean = p.value("fit_mean", pr.fit_mean);
    w.pinned = pr;
  }
  if (!j.contains("cutoffs")) throw ValidationError("wave config needs cutoffs");
  {
    const json& c = j["cutoffs"];
    if (c.contains("i_max")) w.cutoffs.i_max = c["i_max"].get<double>();
    if (c.contains("i_2max")) w.cutoffs.i_2max = c["i_2max"].get<double>();
    if (c.contains("i_3max")) w.cutoffs.i_3max = c["i_3max"].get<double>();
    if (!w.cutoffs.any()) throw ValidationError("wave config: empty cutoffs");
  }
  w.cumulative_training = j.value("cumulative_training", w.cumulative_training);
  w.membership_sample = j.value("membership_sample", w.membership_sample);
  w.nugget_share = j.value("nugget_share", w.nugget_share);
  if (j.contains("lhs")) {
    w.lhs.candidates = j["lhs"].value("candidates", w.lhs.candidates);
    w.lhs.centered = j["lhs"].value("centered", w.lhs.centered);
  }
  if (j.contains("stepwise")) {
    const json& s = j["stepwise"];
    w.stepwise.max_actives = s.value("max_actives", w.stepwise.max_actives);
    w.stepwise.alpha = s.value("alpha", w.stepwise.alpha);
    w.stepwise.second_order = s.value("second_order", w.stepwise.second_order);
    w.stepwise.max_terms = s.value("max_terms", w.stepwise.max_terms);
  }
  if (j.contains("correlation")) {
    const json& c = j["correlation"];
    w.correlation.fixed_theta = c.value("fixed_theta", w.correlation.fixed_theta);
    w.correlation.max_groups = c.value("max_groups", w.correlation.max_groups);
    w.correlation.likelihood_cap = c.value("likelihood_cap", w.correlation.likelihood_cap);
  }
  if (j.contains("diagnostics")) {
    const json& d = j["diagnostics"];
    w.diagnostics.u_flag = d.value("u_flag", w.diagnostics.u_flag);
    w.diagnostics.max_flag_fraction = d.value("max_flag_fraction", w.diagnostics.max_flag_fraction);
    w.diagnostics.cutoff = d.value("cutoff", w.diagnostics.cutoff);
    w.diagnostics.max_false_discard = d.value("max_false_discard", w.diagnostics.max_false_discard);
  }
  if (j.contains("rejection")) {
    const json& r = j["rejection"];
    w.rejection.min_acceptance = r.value("min_acceptance", w.rejection.min_acceptance);
    w.rejection.min_probe = r.value("min_probe", w.rejection.min_probe);
    w.rejection.batch = r.value("batch", w.rejection.batch);
  }
  if (j.contains("mcmc")) {
    const json& m = j["mcmc"];
    w.mcmc.burn_in = m.value("burn_in", w.mcmc.burn_in);
    w.mcmc.pilot = m.value("pilot", w.mcmc.pilot);
    w.mcmc.initial_step = m.value("initial_step", w.mcmc.initial_step);
    w.mcmc.max_thin = m.value("max_thin", w.mcmc.max_thin);
  }
  return w;
}

inline std::vector<ObservationTarget> builtin_targets(const std::string& simulator_id) {
  if (simulator_id == "crosstalk") return crosstalk_targets();
  if (simulator_id == "toy1d") return {toy_target()};
  throw ValidationError("simulator '" + simulator_id + "' has no builtin targets");
}

inline ObservationTarget explicit_target_from_json(const json& j) {
  if (j.contains("window")) {
    const std::string ds = j.value("dataset", std::string("A"));
    return target_from_window(j.at("id").get<std::string>(), ds.empty() ? 'A' : ds[0],
                              j["window"][0].get<double>(), j["window"][1].get<double>());
  }
  return target_from_json(j);
}

}  // namespace io

inline CampaignManifest parse_manifest_text(const std::string& text) {
  io::json j;
  try {
    j = io::json::parse(text);
  } catch (const std::exception& e) {
    throw ValidationError(std::string("manifest is not valid JSON: ") + e.what());
  }
  CampaignManifest m;
  m.raw = text;
  try {
    const io::json& sim = j.at("simulator");
    if (sim.is_string()) {
      m.simulator_id = sim.get<std::string>();
      if (m.simulator_id != "crosstalk" && m.simulator_id != "toy1d")
        throw ValidationError("unknown simulator '" + m.simulator_id + "'");
    } else {
      m.simulator_id = "external";
      ExternalSimulatorSpec ext;
      ext.command = sim.at("command").get<std::string>();
      ext.inputs = sim.at("inputs").get<int>();
      ext.outputs = sim.at("outputs").get<std::vector<std::string>>();
      if (ext.inputs <= 0 || ext.outputs.empty())
        throw ValidationError("external simulator needs inputs > 0 and output names");
      m.external = std::move(ext);
    }
    m.seed = j.value("seed", static_cast<std::uint64_t>(1));
    m.workers = j.value("workers", 1);
    m.out_dir = j.value("out", std::string());
    m.stop_var_ratio = j.value("stop_var_ratio", 0.0);

    if (!j.contains("targets") || (j["targets"].is_string() && j["targets"] == "builtin")) {
      m.targets = io::builtin_targets(m.simulator_id);
    } else if (j["targets"].is_array()) {
      for (const auto& t : j["targets"]) m.targets.push_back(io::explicit_target_from_json(t));
    } else {
      throw ValidationError("manifest targets must be \"builtin\" or an array");
    }

    if (!j.contains("schedule") || !j["schedule"].is_array() || j["schedule"].empty())
      throw ValidationError("manifest needs a non-empty wave schedule");
    for (const auto& w : j["schedule"]) m.schedule.push_back(io::wave_config_from_json(w));
  } catch (const ValidationError&) {
    throw;
  } catch (const std::exception& e) {
    throw ValidationError(std::string("manifest field error: ") + e.what());
  }
  if (m.workers < 1) throw ValidationError("workers must be >= 1");
  for (const auto& t : m.targets) t.validate();
  return m;
}

inline CampaignManifest parse_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open manifest '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_manifest_text(ss.str());
}

inline std::unique_ptr<Simulator> make_simulator(const CampaignManifest& m) {
  if (m.simulator_id == "crosstalk") return std::make_unique<CrosstalkSimulator>();
  if (m.simulator_id == "toy1d") return std::make_unique<Toy1dSimulator>();
  if (m.simulator_id == "external" && m.external)
    return std::make_unique<ExternalCommandSimulator>(m.external->command, m.external->inputs,
                                                      m.external->outputs);
  throw ValidationError("manifest has no usable simulator");
}

/// Column labels for design/run CSVs.
inline std::vector<std::string> input_names(const CampaignManifest& m) {
  std::vector<std::string> names;
  if (m.simulator_id == "crosstalk") {
    for (const auto& row : crosstalk::kInputTable) names.emplace_back(row.name);
  } else if (m.simulator_id == "toy1d") {
    names.emplace_back("x");
  } else {
    for (int i = 0; i < m.external->inputs; ++i) names.push_back("x" + std::to_string(i + 1));
  }
  return names;
}

inline CampaignConfig to_campaign_config(const CampaignManifest& m) {
  CampaignConfig c;
  c.schedule = m.schedule;
  c.seed = m.seed;
  c.workers = m.workers;
  c.stop_var_ratio = m.stop_var_ratio;
  return c;
}

}  // namespace hmatch
