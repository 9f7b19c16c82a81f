#pragma once

#include "hmatch/csv.hpp"
#include "hmatch/io/manifest.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

namespace hmatch {
namespace io {

namespace fs = std::filesystem;

inline std::string wave_dir_name(int wave) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "wave_%02d", wave);
  return buf;
}

inline json ledger_row_to_json(const LedgerRow& r) {
  return json{{"wave", r.wave},
              {"designed", r.designed},
              {"converged", r.converged},
              {"train_n", r.train_n},
              {"holdout_n", r.holdout_n},
              {"emulated", r.emulated},
              {"deferred", r.deferred},
              {"design_method", r.design_method},
              {"fraction_of_previous", r.fraction_of_previous},
              {"cumulative", r.cumulative},
              {"acceptable_fraction", r.acceptable_fraction},
              {"safety_eligible", r.safety_eligible},
              {"safety_false_discards", r.safety_false_discards},
              {"safety_rate", r.safety_rate},
              {"variance_ratio", r.variance_ratio}};
}

inline LedgerRow ledger_row_from_json(const json& j) {
  LedgerRow r;
  r.wave = j.at("wave").get<int>();
  r.designed = j.at("designed").get<int>();
  r.converged = j.at("converged").get<int>();
  r.train_n = j.at("train_n").get<int>();
  r.holdout_n = j.at("holdout_n").get<int>();
  r.emulated = j.at("emulated").get<int>();
  r.deferred = j.at("deferred").get<int>();
  r.design_method = j.value("design_method", std::string());
  r.fraction_of_previous = j.at("fraction_of_previous").get<double>();
  r.cumulative = j.at("cumulative").get<double>();
  r.acceptable_fraction = j.at("acceptable_fraction").get<double>();
  r.safety_eligible = j.at("safety_eligible").get<int>();
  r.safety_false_discards = j.at("safety_false_discards").get<int>();
  r.safety_rate = j.at("safety_rate").get<double>();
  r.variance_ratio = j.at("variance_ratio").get<double>();
  return r;
}

inline void write_ledger_csv(const fs::path& path, const std::vector<LedgerRow>& rows) {
  CsvTable t;
  t.header = {"wave",
              "designed",
              "converged",
              "train_n",
              "holdout_n",
              "emulated",
              "deferred",
              "fraction_of_previous",
              "cumulative",
              "acceptable_fraction",
              "safety_eligible",
              "safety_false_discards",
              "safety_rate",
              "variance_ratio"};
  t.values.resize(static_cast<Eigen::Index>(rows.size()),
                  static_cast<Eigen::Index>(t.header.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const LedgerRow& r = rows[i];
    double vals[] = {static_cast<double>(r.wave),
                     static_cast<double>(r.designed),
                     static_cast<double>(r.converged),
                     static_cast<double>(r.train_n),
                     static_cast<double>(r.holdout_n),
                     static_cast<double>(r.emulated),
                     static_cast<double>(r.deferred),
                     r.fraction_of_previous,
                     r.cumulative,
                     r.acceptable_fraction,
                     static_cast<double>(r.safety_eligible),
                     static_cast<double>(r.safety_false_discards),
                     r.safety_rate,
                     r.variance_ratio};
    for (std::size_t j = 0; j < t.header.size(); ++j)
      t.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = vals[j];
  }
  write_csv(path, t);
}

inline void write_points_csv(const fs::path& path, const std::vector<std::string>& names,
                             const Mat& points) {
  CsvTable t;
  t.header = names;
  t.values = points;
  write_csv(path, t);
}

/// runs.csv: inputs, then outputs, then a 0/1 convergence flag.
inline void write_runs_csv(const fs::path& path, const std::vector<std::string>& in_names,
                           const std::vector<std::string>& out_names, const Mat& X,
                           const SimulationBatch& batch) {
  CsvTable t;
  t.header = in_names;
  t.header.insert(t.header.end(), out_names.begin(), out_names.end());
  t.header.push_back("converged");
  t.values.resize(X.rows(), X.cols() + batch.outputs.cols() + 1);
  t.values.leftCols(X.cols()) = X;
  t.values.middleCols(X.cols(), batch.outputs.cols()) = batch.outputs;
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    t.values(i, t.values.cols() - 1) = batch.converged[static_cast<std::size_t>(i)] ? 1.0 : 0.0;
  write_csv(path, t);
}

inline void write_wave_artifacts(const fs::path& out_dir, const WaveResult& wave,
                                 const std::vector<std::string>& in_names,
                                 const std::vector<std::string>& out_names) {
  const fs::path dir = out_dir / wave_dir_name(wave.config.index);
  fs::create_directories(dir);
  write_points_csv(dir / "design.csv", in_names, wave.design);
  write_runs_csv(dir / "runs.csv", in_names, out_names, wave.design, wave.batch);
  write_points_csv(dir / "retained.csv", in_names, wave.retained);
  atomic_write_text(dir / "emulators.json", wave_test_to_json(wave.test).dump(1));

  json reports = json::array();
  for (const OutputReport& r : wave.reports) {
    reports.push_back(json{{"output", r.output},
                           {"name", r.name},
                           {"fitted", r.fitted},
                           {"accepted", r.accepted},
                           {"note", r.note},
                           {"max_abs_u", r.diag.max_abs_u},
                           {"flag_fraction", r.diag.flag_fraction},
                           {"eligible", r.diag.eligible},
                           {"false_discards", r.diag.false_discards}});
  }
  // wave.json is written last: its presence marks the wave as resumable.
  const json marker{{"wave", wave.config.index},
                    {"complete", true},
                    {"ledger", ledger_row_to_json(wave.ledger)},
                    {"reports", reports}};
  atomic_write_text(dir / "wave.json", marker.dump(1));
}

inline void write_archive_csv(const fs::path& out_dir, const std::vector<std::string>& in_names,
                              const std::vector<std::string>& out_names,
                              const CampaignState& state) {
  CsvTable t;
  t.header = in_names;
  t.header.insert(t.header.end(), out_names.begin(), out_names.end());
  t.values.resize(state.archive_X.rows(),
                  static_cast<Eigen::Index>(in_names.size() + out_names.size()));
  if (state.archive_X.rows() > 0) {
    t.values.leftCols(state.archive_X.cols()) = state.archive_X;
    t.values.rightCols(state.archive_Y.cols()) = state.archive_Y;
  }
  write_csv(out_dir / "archive.csv", t);
}

/// Rebuilds campaign state from completed wave directories.  Returns how many
/// waves were loaded; the state is left ready for the next schedule entry.
inline std::size_t load_campaign_state(const fs::path& out_dir, const CampaignManifest& manifest,
                                       int input_dim, int output_dim, CampaignState& state) {
  state = CampaignState{};
  state.region = Region::box(input_dim);
  std::size_t completed = 0;
  for (std::size_t w = 0; w < manifest.schedule.size(); ++w) {
    const fs::path dir = out_dir / wave_dir_name(static_cast<int>(w) + 1);
    const fs::path marker = dir / "wave.json";
    if (!fs::exists(marker)) break;
    json mj;
    {
      std::ifstream in(marker);
      try {
        mj = json::parse(in);
      } catch (const std::exception& e) {
        throw IoError("corrupt wave marker " + marker.string() + ": " + e.what());
      }
    }
    if (!mj.value("complete", false)) break;

    json ej;
    {
      std::ifstream in(dir / "emulators.json");
      if (!in) throw IoError("missing emulators.json in " + dir.string());
      try {
        ej = json::parse(in);
      } catch (const std::exception& e) {
        throw IoError("corrupt emulators.json in " + dir.string() + ": " + e.what());
      }
    }
    state.region.add_wave(wave_test_from_json(ej));
    state.ledger.push_back(ledger_row_from_json(mj.at("ledger")));
    state.cumulative = state.ledger.back().cumulative;

    const CsvTable runs = read_csv(dir / "runs.csv");
    if (runs.values.cols() != input_dim + output_dim + 1)
      throw IoError("runs.csv column count mismatch in " + dir.string());
    const int train_n = state.ledger.back().train_n;
    int taken = 0;
    Mat wx(train_n, input_dim), wy(train_n, output_dim);
    const int run_rows =
        std::min<int>(static_cast<int>(runs.values.rows()), manifest.schedule[w].runs);
    for (int i = 0; i < static_cast<int>(runs.values.rows()) && taken < train_n; ++i) {
      if (runs.values(i, runs.values.cols() - 1) == 0.0) continue;
      if (i >= run_rows) break;  // holdout rows are not training data
      wx.row(taken) = runs.values.row(i).head(input_dim);
      wy.row(taken) = runs.values.row(i).segment(input_dim, output_dim);
      ++taken;
    }
    wx.conservativeResize(taken, input_dim);
    wy.conservativeResize(taken, output_dim);
    state.train_X = hmatch::detail::stack_rows(state.train_X, wx);
    state.train_Y = hmatch::detail::stack_rows(state.train_Y, wy);

    const CsvTable retained = read_csv(dir / "retained.csv");
    state.members = retained.values;
    ++completed;
  }
  const fs::path archive = out_dir / "archive.csv";
  if (completed > 0 && fs::exists(archive)) {
    const CsvTable t = read_csv(archive);
    if (t.values.rows() > 0) {
      state.archive_X = t.values.leftCols(input_dim);
      state.archive_Y = t.values.rightCols(output_dim);
    }
  }
  return completed;
}

/// Full campaign with per-wave artifact persistence and optional resume.
inline CampaignResult run_campaign_with_artifacts(Simulator& sim, const CampaignManifest& manifest,
                                                  const fs::path& out_dir, bool resume,
                                                  std::ostream* log = nullptr) {
  fs::create_directories(out_dir);
  atomic_write_text(out_dir / "manifest.json", manifest.raw);

  CampaignState state;
  std::size_t completed = 0;
  if (resume) {
    completed = load_campaign_state(out_dir, manifest, sim.input_dim(), sim.output_dim(), state);
    if (log && completed > 0)
      *log << "resuming after " << completed << " completed wave(s)\n";
  }

  const std::vector<std::string> in_names = input_names(manifest);
  const std::vector<std::string> out_names = sim.output_names();
  auto on_wave = [&](const WaveResult& wave, const CampaignState& st) {
    write_wave_artifacts(out_dir, wave, in_names, out_names);
    write_archive_csv(out_dir, in_names, out_names, st);
    write_ledger_csv(out_dir / "ledger.csv", st.ledger);
    if (log) {
      *log << "wave " << wave.config.index << ": designed " << wave.ledger.designed
           << ", converged " << wave.ledger.converged << ", emulated " << wave.ledger.emulated
           << ", retained fraction " << wave.ledger.fraction_of_previous << " (cumulative "
           << wave.ledger.cumulative << ", method " << wave.ledger.design_method << ")\n";
    }
  };
  CampaignResult res = run_campaign(sim, manifest.targets, to_campaign_config(manifest), on_wave,
                                    std::move(state), completed);
  if (completed > 0 && !res.state.ledger.empty())
    write_ledger_csv(out_dir / "ledger.csv", res.state.ledger);
  atomic_write_text(out_dir / "campaign.json",
                    json{{"stop_reason", res.stop_reason},
                         {"waves_completed", res.state.ledger.size()},
                         {"cumulative", res.state.cumulative}}
                        .dump(1));
  return res;
}

}  // namespace io
}  // namespace hmatch
