// Command-line driver: simulate, design, match, sample, diagnose, analyze.
// Exit codes: 0 success, 2 validation, 3 empty region, 4 runtime failure.

#include "hmatch/hmatch.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace hmatch;

namespace {

struct CommonArgs {
  std::string manifest;
  std::string out;
  std::string dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
};

CampaignManifest load_manifest(const CommonArgs& a) {
  if (!a.manifest.empty()) return parse_manifest(a.manifest);
  if (!a.dir.empty()) return parse_manifest((fs::path(a.dir) / "manifest.json").string());
  throw ValidationError("either --manifest or --dir is required");
}

void apply_overrides(const CommonArgs& a, CampaignManifest& m) {
  if (a.seed) m.seed = *a.seed;
  if (a.workers) m.workers = *a.workers;
  if (!a.out.empty()) m.out_dir = a.out;
}

int cmd_simulate(const CommonArgs& a, const std::string& points_path) {
  CampaignManifest m = load_manifest(a);
  apply_overrides(a, m);
  auto sim = make_simulator(m);
  const CsvTable pts = read_csv(points_path);
  if (pts.values.cols() != sim->input_dim())
    throw ValidationError("points file has " + std::to_string(pts.values.cols()) +
                          " columns; simulator expects " + std::to_string(sim->input_dim()));
  const SimulationBatch batch = sim->evaluate(pts.values, m.workers);
  const fs::path out = a.out.empty() ? fs::path("outputs.csv") : fs::path(a.out);
  io::write_runs_csv(out, input_names(m), sim->output_names(), pts.values, batch);
  int converged = 0;
  for (char c : batch.converged) converged += c != 0;
  std::cout << "evaluated " << pts.values.rows() << " points (" << converged
            << " converged) -> " << out.string() << "\n";
  return 0;
}

int cmd_design(const CommonArgs& a, int n, bool centered) {
  CampaignManifest m = load_manifest(a);
  apply_overrides(a, m);
  auto sim = make_simulator(m);
  LhsOptions opt;
  opt.centered = centered;
  const Mat design = maximin_lhs(n, sim->input_dim(), m.seed, opt);
  const fs::path out = a.out.empty() ? fs::path("design.csv") : fs::path(a.out);
  io::write_points_csv(out, input_names(m), design);
  std::cout << "wrote " << n << " x " << sim->input_dim() << " design -> " << out.string()
            << "\n";
  return 0;
}

int cmd_match(const CommonArgs& a, bool resume) {
  CampaignManifest m = load_manifest(a);
  apply_overrides(a, m);
  if (m.out_dir.empty()) throw ValidationError("match needs an output directory (--out)");
  auto sim = make_simulator(m);
  const CampaignResult res =
      io::run_campaign_with_artifacts(*sim, m, m.out_dir, resume, &std::cout);
  std::cout << "campaign stopped: " << res.stop_reason << " after "
            << res.state.ledger.size() << " wave(s); cumulative retained fraction "
            << res.state.cumulative << "\n";
  return res.region_empty() ? 3 : 0;
}

int cmd_sample(const CommonArgs& a, int n) {
  CampaignManifest m = load_manifest(a);
  apply_overrides(a, m);
  if (a.dir.empty()) throw ValidationError("sample needs a campaign directory (--dir)");
  auto sim = make_simulator(m);
  CampaignState state;
  const std::size_t completed =
      io::load_campaign_state(a.dir, m, sim->input_dim(), sim->output_dim(), state);
  if (completed == 0) throw ValidationError("no completed waves under " + std::string(a.dir));
  std::string method;
  WaveConfig defaults;
  const Mat pts = detail::draw_from_region(state.region, n, m.seed, state.members, defaults.lhs,
                                           defaults.rejection, defaults.mcmc, /*spread=*/false,
                                           &method);
  const fs::path out = a.out.empty() ? fs::path(a.dir) / "sample.csv" : fs::path(a.out);
  io::write_points_csv(out, input_names(m), pts);
  std::cout << "sampled " << pts.rows() << " region members via " << method << " -> "
            << out.string() << "\n";
  return 0;
}

int cmd_diagnose(const CommonArgs& a, int wave) {
  CampaignManifest m = load_manifest(a);
  if (a.dir.empty()) throw ValidationError("diagnose needs a campaign directory (--dir)");
  if (wave < 1 || wave > static_cast<int>(m.schedule.size()))
    throw ValidationError("wave index out of schedule range");
  const fs::path dir = fs::path(a.dir) / io::wave_dir_name(wave);
  std::ifstream in(dir / "emulators.json");
  if (!in) throw IoError("missing emulators.json under " + dir.string());
  io::json ej;
  try {
    ej = io::json::parse(in);
  } catch (const std::exception& e) {
    throw IoError(std::string("corrupt emulators.json: ") + e.what());
  }
  const WaveTest test = io::wave_test_from_json(ej);
  const CsvTable runs = read_csv(dir / "runs.csv");
  auto sim = make_simulator(m);
  const int d = sim->input_dim(), q = sim->output_dim();
  if (runs.values.cols() != d + q + 1) throw IoError("runs.csv column count mismatch");

  // Holdout rows sit after the wave's training budget.
  const int run_budget = m.schedule[static_cast<std::size_t>(wave - 1)].runs;
  std::vector<int> hold;
  for (int i = run_budget; i < static_cast<int>(runs.values.rows()); ++i)
    if (runs.values(i, runs.values.cols() - 1) != 0.0) hold.push_back(i);
  if (hold.empty()) {
    std::cout << "wave " << wave << " has no converged holdout runs to diagnose\n";
    return 0;
  }
  Mat X(static_cast<Eigen::Index>(hold.size()), d);
  Mat Y(static_cast<Eigen::Index>(hold.size()), q);
  for (std::size_t r = 0; r < hold.size(); ++r) {
    X.row(static_cast<Eigen::Index>(r)) = runs.values.row(hold[r]).head(d);
    Y.row(static_cast<Eigen::Index>(r)) = runs.values.row(hold[r]).segment(d, q);
  }

  const std::vector<std::string> names = sim->output_names();
  bool all_pass = true;
  for (std::size_t k = 0; k < test.emulators.size(); ++k) {
    int col = -1;
    for (int j = 0; j < q; ++j)
      if (names[static_cast<std::size_t>(j)] == test.targets[k].id) col = j;
    if (col < 0) throw IoError("output '" + test.targets[k].id + "' not found in runs.csv");
    const DiagnosticReport rep = diagnose(*test.emulators[k], X, Y.col(col), &test.targets[k]);
    all_pass = all_pass && rep.pass;
    std::cout << (rep.pass ? "pass " : "FAIL ") << test.targets[k].id << ": max|U| "
              << rep.max_abs_u << ", flagged " << rep.flag_fraction * 100 << "%, "
              << rep.false_discards << "/" << rep.eligible << " acceptable runs discarded\n";
    for (int row : rep.false_discard_rows)
      std::cout << "     discarded acceptable holdout run at row " << hold[static_cast<std::size_t>(row)]
                << "\n";
  }
  std::cout << (all_pass ? "all emulators pass holdout diagnostics\n"
                         : "some emulators fail holdout diagnostics\n");
  return 0;
}

Mat load_converged_inputs(const fs::path& runs_csv, int d, int q, Mat* outputs = nullptr) {
  const CsvTable runs = read_csv(runs_csv);
  if (runs.values.cols() != d + q + 1)
    throw IoError("column count mismatch in " + runs_csv.string());
  std::vector<int> keep;
  for (int i = 0; i < static_cast<int>(runs.values.rows()); ++i)
    if (runs.values(i, runs.values.cols() - 1) != 0.0) keep.push_back(i);
  Mat X(static_cast<Eigen::Index>(keep.size()), d);
  Mat Y(static_cast<Eigen::Index>(keep.size()), q);
  for (std::size_t r = 0; r < keep.size(); ++r) {
    X.row(static_cast<Eigen::Index>(r)) = runs.values.row(keep[r]).head(d);
    Y.row(static_cast<Eigen::Index>(r)) = runs.values.row(keep[r]).segment(d, q);
  }
  if (outputs) *outputs = Y;
  return X;
}

int resolve_input(const std::vector<std::string>& names, const std::string& token) {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == token) return static_cast<int>(i);
  try {
    const int idx = std::stoi(token);
    if (idx >= 0 && idx < static_cast<int>(names.size())) return idx;
  } catch (const std::exception&) {
  }
  throw ValidationError("unknown input '" + token + "'");
}

int cmd_analyze(const CommonArgs& a, const std::string& name, const std::string& output_name,
                const std::string& pair) {
  static const char* known =
      "variance-resolution, joint-constraint, informativeness, pass-proportions, sign-split, "
      "pairs-density";
  CampaignManifest m = load_manifest(a);
  if (a.dir.empty()) throw ValidationError("analyze needs a campaign directory (--dir)");
  const fs::path dir(a.dir);
  const fs::path out_dir = a.out.empty() ? dir / "analysis" : fs::path(a.out);
  auto sim = make_simulator(m);
  const int d = sim->input_dim(), q = sim->output_dim();
  const std::vector<std::string> in_names = input_names(m);
  const std::vector<std::string> out_names = sim->output_names();

  // Completed waves, in order.
  std::vector<fs::path> waves;
  for (std::size_t w = 0; w < m.schedule.size(); ++w) {
    const fs::path wd = dir / io::wave_dir_name(static_cast<int>(w) + 1);
    if (!fs::exists(wd / "wave.json")) break;
    waves.push_back(wd);
  }
  if (waves.empty()) throw ValidationError("no completed waves under " + dir.string());

  if (name == "variance-resolution") {
    const Mat u = load_converged_inputs(waves.front() / "runs.csv", d, q);
    const CsvTable retained = read_csv(waves.back() / "retained.csv");
    if (retained.values.rows() < 2)
      throw ValidationError("final retained sample too small for covariances");
    CsvTable t;
    t.header = {"input", "resolution"};
    t.values.resize(d + 1, 2);
    for (int i = 0; i < d; ++i) {
      t.values(i, 0) = i;
      t.values(i, 1) = variance_resolution(u, retained.values, {i});
    }
    std::vector<int> all(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) all[static_cast<std::size_t>(i)] = i;
    t.values(d, 0) = -1;  // joint row over every input
    t.values(d, 1) = variance_resolution(u, retained.values, all);
    write_csv(out_dir / "variance-resolution.csv", t);
    std::cout << "joint resolution over all inputs: " << t.values(d, 1) << "\n";
    return 0;
  }
  if (name == "joint-constraint") {
    const CsvTable retained = read_csv(waves.back() / "retained.csv");
    CsvTable t;
    t.header = in_names;
    t.values = joint_constraint_matrix(retained.values);
    write_csv(out_dir / "joint-constraint.csv", t);
    std::cout << "wrote " << d << " x " << d << " squared-correlation matrix\n";
    return 0;
  }
  if (name == "informativeness") {
    SampleSet wave1;
    wave1.label = "wave1";
    wave1.X = load_converged_inputs(waves.front() / "runs.csv", d, q, &wave1.Y);
    const InformativenessReport rep = input_output_informativeness(wave1, m.targets);
    CsvTable t;
    t.header = out_names;
    t.values = rep.value;
    write_csv(out_dir / "informativeness.csv", t);
    CsvTable counts;
    counts.header = {"output", "pass_count"};
    counts.values.resize(q, 2);
    for (int j = 0; j < q; ++j) {
      counts.values(j, 0) = j;
      counts.values(j, 1) = rep.pass_counts[static_cast<std::size_t>(j)];
    }
    write_csv(out_dir / "informativeness-pass-counts.csv", counts);
    std::cout << "wrote " << d << " x " << q << " informativeness matrix\n";
    return 0;
  }
  if (name == "pass-proportions") {
    std::vector<SampleSet> sets;
    for (const auto& wd : waves) {
      SampleSet s;
      s.label = wd.filename().string();
      s.X = load_converged_inputs(wd / "runs.csv", d, q, &s.Y);
      sets.push_back(std::move(s));
    }
    CsvTable t;
    t.header = out_names;
    t.values = pass_proportions(sets, m.targets);
    write_csv(out_dir / "pass-proportions.csv", t);
    std::cout << "wrote " << sets.size() << " x " << q << " pass-proportion matrix\n";
    return 0;
  }
  if (name == "sign-split") {
    if (output_name.empty()) throw ValidationError("sign-split needs --output <name>");
    int col = -1;
    for (int j = 0; j < q; ++j)
      if (out_names[static_cast<std::size_t>(j)] == output_name) col = j;
    if (col < 0) throw ValidationError("unknown output '" + output_name + "'");
    const CsvTable archive = read_csv(dir / "archive.csv");
    if (archive.values.rows() == 0) throw ValidationError("archive.csv has no acceptable runs");
    SampleSet s;
    s.label = "acceptable";
    s.X = archive.values.leftCols(d);
    s.Y = archive.values.rightCols(q);
    const SignSplit split = sign_split(s, col);
    CsvTable header_table;
    header_table.header = in_names;
    header_table.values = split.positive.X;
    write_csv(out_dir / ("sign-split-" + output_name + "-positive.csv"), header_table);
    header_table.values = split.negative.X;
    write_csv(out_dir / ("sign-split-" + output_name + "-negative.csv"), header_table);
    std::cout << output_name << ": " << split.positive.X.rows() << " positive, "
              << split.negative.X.rows() << " negative acceptable runs"
              << (split.one_sided ? " (one side empty)" : "") << "\n";
    return 0;
  }
  if (name == "pairs-density") {
    if (pair.empty()) throw ValidationError("pairs-density needs --pair <a>,<b>");
    const auto comma = pair.find(',');
    if (comma == std::string::npos) throw ValidationError("--pair wants two inputs, comma-separated");
    const int ia = resolve_input(in_names, pair.substr(0, comma));
    const int ib = resolve_input(in_names, pair.substr(comma + 1));
    const CsvTable retained = read_csv(waves.back() / "retained.csv");
    const PairDensity pd = pair_density(retained.values, ia, ib);
    CsvTable t;
    for (int b = 0; b < pd.counts.cols(); ++b) t.header.push_back("bin" + std::to_string(b));
    t.values = pd.counts;
    write_csv(out_dir / ("pairs-density-" + in_names[static_cast<std::size_t>(ia)] + "-" +
                         in_names[static_cast<std::size_t>(ib)] + ".csv"),
              t);
    t.values = pd.hdr;
    write_csv(out_dir / ("pairs-density-" + in_names[static_cast<std::size_t>(ia)] + "-" +
                         in_names[static_cast<std::size_t>(ib)] + "-hdr.csv"),
              t);
    std::cout << "wrote binned density and 0.5/0.9 highest-density sets\n";
    return 0;
  }
  throw ValidationError("unknown analysis '" + name + "'; available: " + known);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"iterative history matching for deterministic simulators"};
  app.require_subcommand(1);
  CommonArgs args;

  auto add_common = [&](CLI::App* cmd, bool wants_dir) {
    cmd->add_option("--manifest", args.manifest, "campaign manifest (JSON)");
    if (wants_dir) cmd->add_option("--dir", args.dir, "campaign output directory");
    cmd->add_option("--out", args.out, "output path");
    cmd->add_option("--seed", args.seed, "override manifest seed");
    cmd->add_option("--workers", args.workers, "override manifest worker count");
  };

  std::string points_path, analysis, output_name, pair;
  int n = 100, wave = 1;
  bool centered = false, resume = false;

  CLI::App* c_sim = app.add_subcommand("simulate", "evaluate the simulator on a points file");
  add_common(c_sim, false);
  c_sim->add_option("--points", points_path, "CSV of scaled input points")->required();

  CLI::App* c_des = app.add_subcommand("design", "maximin Latin hypercube over the input box");
  add_common(c_des, false);
  c_des->add_option("--n", n, "number of points")->required();
  c_des->add_flag("--centered", centered, "use cell centres instead of jitter");

  CLI::App* c_match = app.add_subcommand("match", "run the history-matching waves");
  add_common(c_match, false);
  c_match->add_flag("--resume", resume, "continue from the last completed wave");

  CLI::App* c_sample = app.add_subcommand("sample", "draw members of the final region");
  add_common(c_sample, true);
  c_sample->add_option("--n", n, "number of points")->required();

  CLI::App* c_diag = app.add_subcommand("diagnose", "re-run holdout diagnostics for a wave");
  add_common(c_diag, true);
  c_diag->add_option("--wave", wave, "wave index (1-based)")->required();

  CLI::App* c_ana = app.add_subcommand("analyze", "post-match analytics from archived runs");
  add_common(c_ana, true);
  c_ana->add_option("--name", analysis, "analysis name")->required();
  c_ana->add_option("--output", output_name, "output id (sign-split)");
  c_ana->add_option("--pair", pair, "input pair a,b (pairs-density)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (c_sim->parsed()) return cmd_simulate(args, points_path);
    if (c_des->parsed()) return cmd_design(args, n, centered);
    if (c_match->parsed()) return cmd_match(args, resume);
    if (c_sample->parsed()) return cmd_sample(args, n);
    if (c_diag->parsed()) return cmd_diagnose(args, wave);
    if (c_ana->parsed()) return cmd_analyze(args, analysis, output_name, pair);
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const EmptyRegionError& e) {
    std::cerr << "empty region: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 2;
}
