#include "hmatch/io/artifacts.hpp"

#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

using namespace hmatch;
namespace fs = std::filesystem;

namespace {

Emulator sample_emulator(ResidualModel residual) {
  TrainingSet ts;
  ts.X = maximin_lhs(12, 2, 5);
  ts.y.resize(12);
  for (int i = 0; i < 12; ++i) ts.y[i] = std::sin(2.0 * ts.X(i, 0)) + 0.3 * ts.X(i, 1);

  EmulatorSpec s;
  s.output_id = "probe";
  s.basis = {BasisTerm{}, BasisTerm{0, -1}, BasisTerm{1, -1}};
  s.beta.resize(3);
  s.beta << 0.3, 1.2, -0.7;
  s.residual = residual;
  if (residual == ResidualModel::correlated) {
    s.active = {0, 1};
    s.theta.resize(2);
    s.theta << 0.8, 1.7;
    s.sigma_u2 = 0.9;
    s.sigma_w2 = 0.05;
  } else {
    s.sigma_u2 = 0.4;
  }
  return Emulator(s, ts);
}

}  // namespace

TEST_CASE("csv values survive a write/read round trip bit for bit") {
  testutil::TempDir dir("csv");
  CsvTable t;
  t.header = {"a", "b", "c"};
  t.values.resize(3, 3);
  t.values << std::numbers::pi, 1.0 / 3.0, -0.1,
      1e-300, 6.02214076e23, 0.0,
      -1.7976931348623157e308, 2.2250738585072014e-308, 42.0;
  const fs::path path = dir.path / "t.csv";
  write_csv(path, t);

  const CsvTable back = read_csv(path);
  REQUIRE(back.header == t.header);
  REQUIRE(back.values.rows() == 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(back.values(i, j) == t.values(i, j));

  CHECK(back.col("b") == 1);
  CHECK_THROWS_AS(back.col("nope"), ValidationError);

  // A table without rows still round-trips its header.
  t.values.resize(0, 3);
  write_csv(path, t);
  const CsvTable empty = read_csv(path);
  CHECK(empty.header.size() == 3);
  CHECK(empty.values.rows() == 0);
}

TEST_CASE("csv reader rejects malformed files") {
  testutil::TempDir dir("csvbad");
  CHECK_THROWS_AS(read_csv(dir.path / "missing.csv"), IoError);

  const fs::path empty = dir.path / "empty.csv";
  testutil::write_file(empty, "");
  CHECK_THROWS_AS(read_csv(empty), IoError);

  const fs::path ragged = dir.path / "ragged.csv";
  testutil::write_file(ragged, "a,b\n1,2\n3\n");
  CHECK_THROWS_AS(read_csv(ragged), ValidationError);

  const fs::path words = dir.path / "words.csv";
  testutil::write_file(words, "a,b\n1,two\n");
  CHECK_THROWS_AS(read_csv(words), ValidationError);
}

TEST_CASE("atomic text writes leave no temporaries and create directories") {
  testutil::TempDir dir("atomic");
  const fs::path path = dir.path / "deep" / "nest" / "file.txt";
  atomic_write_text(path, "first");
  atomic_write_text(path, "second");

  std::ifstream in(path);
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(content == "second");
  CHECK_FALSE(fs::exists(path.string() + ".tmp"));
}

TEST_CASE("emulators serialize to json and predict identically after reload") {
  for (ResidualModel residual : {ResidualModel::correlated, ResidualModel::uncorrelated}) {
    const Emulator original = sample_emulator(residual);
    const io::json j = io::emulator_to_json(original);
    const auto loaded = io::emulator_from_json(io::json::parse(j.dump()));

    const Mat probes = maximin_lhs(7, 2, 77);
    for (int i = 0; i < 7; ++i) {
      const Vec x = probes.row(i).transpose();
      const Prediction a = original.predict(x);
      const Prediction b = loaded->predict(x);
      CHECK(a.mean == b.mean);
      CHECK(a.variance == b.variance);
    }
    // A training point exercises the nugget-coincidence branch.
    const Prediction a0 = original.predict(original.training().X.row(0).transpose());
    const Prediction b0 = loaded->predict(original.training().X.row(0).transpose());
    CHECK(a0.mean == b0.mean);
    CHECK(a0.variance == b0.variance);
  }

  io::json bad = io::emulator_to_json(sample_emulator(ResidualModel::correlated));
  bad["version"] = 99;
  CHECK_THROWS_AS(io::emulator_from_json(bad), IoError);
}

TEST_CASE("targets serialize with their windows and revalidate on load") {
  const ObservationTarget t = target_from_window("etr1_Auxin", 'A', 0.182, 2.303);
  const ObservationTarget back = io::target_from_json(io::target_to_json(t));
  CHECK(back.id == t.id);
  CHECK(back.z == t.z);
  CHECK(back.sigma_md == t.sigma_md);
  CHECK(back.sigma_me == t.sigma_me);
  CHECK(back.dataset == 'A');
  REQUIRE(back.window.has_value());
  CHECK((*back.window)[0] == 0.182);

  ObservationTarget plain;
  plain.id = "toy";
  plain.z = -0.3;
  plain.sigma_me = 0.05;
  const ObservationTarget plain_back = io::target_from_json(io::target_to_json(plain));
  CHECK(plain_back.z == -0.3);
  CHECK_FALSE(plain_back.window.has_value());

  // A tampered window no longer matches z and must be rejected on load.
  io::json j = io::target_to_json(t);
  j["z"] = 0.9;
  CHECK_THROWS_AS(io::target_from_json(j), ValidationError);
}

TEST_CASE("wave tests round-trip and keep their acceptance behaviour") {
  WaveTest test;
  test.emulators.push_back(std::make_shared<const Emulator>(sample_emulator(ResidualModel::correlated)));
  test.emulators.push_back(std::make_shared<const Emulator>(sample_emulator(ResidualModel::uncorrelated)));
  ObservationTarget t0, t1;
  t0.id = "probe";
  t0.z = 0.2;
  t0.sigma_me = 0.3;
  t1.id = "probe2";
  t1.z = -0.1;
  t1.sigma_md = 0.25;
  test.targets = {t0, t1};
  test.cutoffs.i_max = 3.0;
  test.cutoffs.i_3max = 2.5;

  const WaveTest back = io::wave_test_from_json(io::json::parse(io::wave_test_to_json(test).dump(1)));
  REQUIRE(back.emulators.size() == 2);
  CHECK(back.cutoffs.i_max == 3.0);
  CHECK_FALSE(back.cutoffs.i_2max.has_value());
  CHECK(back.cutoffs.i_3max == 2.5);
  const Mat probes = maximin_lhs(40, 2, 4);
  for (int i = 0; i < 40; ++i)
    CHECK(test.accepts(probes.row(i).transpose()) == back.accepts(probes.row(i).transpose()));

  io::json j = io::wave_test_to_json(test);
  j["targets"].erase(0);
  CHECK_THROWS_AS(io::wave_test_from_json(j), IoError);
}

TEST_CASE("ledger rows round-trip through json unchanged") {
  LedgerRow r;
  r.wave = 3;
  r.designed = 700;
  r.converged = 694;
  r.train_n = 496;
  r.holdout_n = 198;
  r.emulated = 20;
  r.deferred = 2;
  r.design_method = "rejection";
  r.fraction_of_previous = 0.125;
  r.cumulative = 0.015625;
  r.acceptable_fraction = 0.0125;
  r.safety_eligible = 57;
  r.safety_false_discards = 1;
  r.safety_rate = 1.0 / 57.0;
  r.variance_ratio = 0.73;

  const LedgerRow back = io::ledger_row_from_json(io::ledger_row_to_json(r));
  CHECK(back.wave == r.wave);
  CHECK(back.designed == r.designed);
  CHECK(back.converged == r.converged);
  CHECK(back.train_n == r.train_n);
  CHECK(back.holdout_n == r.holdout_n);
  CHECK(back.emulated == r.emulated);
  CHECK(back.deferred == r.deferred);
  CHECK(back.design_method == r.design_method);
  CHECK(back.fraction_of_previous == r.fraction_of_previous);
  CHECK(back.cumulative == r.cumulative);
  CHECK(back.acceptable_fraction == r.acceptable_fraction);
  CHECK(back.safety_eligible == r.safety_eligible);
  CHECK(back.safety_false_discards == r.safety_false_discards);
  CHECK(back.safety_rate == r.safety_rate);
  CHECK(back.variance_ratio == r.variance_ratio);

  CHECK(io::wave_dir_name(3) == "wave_03");
  CHECK(io::wave_dir_name(12) == "wave_12");
}

TEST_CASE("manifests parse their schedules, options and builtin targets") {
  const CampaignManifest m = parse_manifest(HMATCH_SOURCE_DIR "/manifests/toy1d.json");
  CHECK(m.simulator_id == "toy1d");
  CHECK(m.seed == 7);
  CHECK(m.stop_var_ratio == 1.0);
  REQUIRE(m.schedule.size() == 2);
  CHECK(m.schedule[0].lhs.centered);
  CHECK(m.schedule[0].lhs.candidates == 1);
  REQUIRE(m.schedule[0].pinned.has_value());
  CHECK(m.schedule[0].pinned->theta == 0.2604353614231015);
  CHECK(m.schedule[0].pinned->sigma_u2 == 0.5);
  CHECK(m.schedule[0].strategy == Strategy::pinned);
  CHECK_FALSE(m.schedule[0].cumulative_training);
  CHECK(m.schedule[1].cumulative_training);
  REQUIRE(m.targets.size() == 1);
  CHECK(m.targets[0].z == -0.3);
  CHECK(input_names(m) == std::vector<std::string>{"x"});

  const CampaignManifest full = parse_manifest(HMATCH_SOURCE_DIR "/manifests/crosstalk_full.json");
  CHECK(full.simulator_id == "crosstalk");
  CHECK(full.targets.size() == 32);
  CHECK(full.schedule.size() == 13);
  CHECK(full.schedule[4].strategy == Strategy::fixed_theta);
  CHECK(full.schedule[10].runs == 3500);
  CHECK(input_names(full).size() == 31);
  CHECK(make_simulator(full)->output_dim() == 32);
}

TEST_CASE("manifest validation rejects malformed inputs") {
  CHECK_THROWS_AS(parse_manifest_text("{not json"), ValidationError);
  CHECK_THROWS_AS(parse_manifest_text(R"({"simulator":"toy1d"})"), ValidationError);
  CHECK_THROWS_AS(parse_manifest_text(R"({"simulator":"warp","schedule":[]})"), ValidationError);
  CHECK_THROWS_AS(parse_manifest_text(
                      R"({"simulator":"toy1d","schedule":[{"runs":8,"cutoffs":{}}]})"),
                  ValidationError);
  CHECK_THROWS_AS(parse_manifest_text(
                      R"({"simulator":"toy1d","schedule":[{"cutoffs":{"i_max":3}}]})"),
                  ValidationError);
  CHECK_THROWS_AS(
      parse_manifest_text(
          R"({"simulator":"toy1d","workers":0,"schedule":[{"runs":8,"cutoffs":{"i_max":3}}]})"),
      ValidationError);
  CHECK_THROWS_AS(parse_manifest(HMATCH_SOURCE_DIR "/manifests/no_such.json"), ValidationError);

  const CampaignManifest ext = parse_manifest_text(R"({
    "simulator": {"command": "cat", "inputs": 2, "outputs": ["a", "b"]},
    "targets": [{"id": "a", "z": 0.0, "sigma_md": 0.1, "sigma_me": 0.1},
                {"id": "b", "window": [-1.0, 1.0]}],
    "schedule": [{"runs": 30, "cutoffs": {"i_max": 3.0}}]
  })");
  CHECK(ext.simulator_id == "external");
  REQUIRE(ext.external.has_value());
  CHECK(ext.external->command == "cat");
  CHECK(input_names(ext) == std::vector<std::string>{"x1", "x2"});
  CHECK(make_simulator(ext)->input_dim() == 2);
  CHECK(ext.targets[1].z == 0.0);
  CHECK(ext.targets[1].sigma_me == Catch::Approx(2.0 / 6.0 / std::sqrt(2.0)));
}

TEST_CASE("campaign artifacts reload into a resumable state") {
  const CampaignManifest m = parse_manifest(HMATCH_SOURCE_DIR "/manifests/toy1d.json");
  auto sim = make_simulator(m);
  testutil::TempDir dir("artifacts");

  const CampaignResult res = io::run_campaign_with_artifacts(*sim, m, dir.path, false);
  REQUIRE(res.waves.size() == 2);

  for (const char* name :
       {"manifest.json", "ledger.csv", "archive.csv", "campaign.json", "wave_01/design.csv",
        "wave_01/runs.csv", "wave_01/retained.csv", "wave_01/emulators.json", "wave_01/wave.json",
        "wave_02/wave.json"}) {
    INFO(name);
    CHECK(fs::exists(dir.path / name));
  }

  // The manifest copy is verbatim.
  std::ifstream in(dir.path / "manifest.json");
  std::string copy((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(copy == m.raw);

  CampaignState state;
  const std::size_t completed =
      io::load_campaign_state(dir.path, m, sim->input_dim(), sim->output_dim(), state);
  CHECK(completed == 2);
  CHECK(state.ledger.size() == 2);
  CHECK(state.cumulative == res.state.cumulative);
  CHECK(state.train_X.rows() == 11);
  CHECK(state.members.rows() == res.state.members.rows());
  CHECK(state.region.waves().size() == 2);

  // Without the final marker only the first wave counts as complete.
  fs::remove(dir.path / "wave_02" / "wave.json");
  CampaignState partial;
  CHECK(io::load_campaign_state(dir.path, m, 1, 1, partial) == 1);
  CHECK(partial.ledger.size() == 1);

  // A corrupt marker is an explicit error, not a silent restart.
  testutil::write_file(dir.path / "wave_01" / "wave.json", "{broken");
  CampaignState corrupt;
  CHECK_THROWS_AS(io::load_campaign_state(dir.path, m, 1, 1, corrupt), IoError);
}
