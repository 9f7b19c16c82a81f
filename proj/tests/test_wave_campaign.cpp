#include "hmatch/io/manifest.hpp"
#include "hmatch/matching/campaign.hpp"

#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

using namespace hmatch;

namespace {

constexpr const char* kToyManifest = HMATCH_SOURCE_DIR "/manifests/toy1d.json";

/// Two decoupled outputs on [-1,1]^2; only y0 is matched in dataset A.
class TwoOutputSim final : public PointwiseSimulator {
 public:
  int input_dim() const override { return 2; }
  int output_dim() const override { return 2; }
  std::vector<std::string> output_names() const override { return {"y0", "y1"}; }

 protected:
  Result evaluate_one(const Vec& x) const override {
    Result r;
    r.outputs.resize(2);
    r.outputs[0] = x[0] + 0.05 * std::sin(2.0 * x[0]);
    r.outputs[1] = x[1];
    return r;
  }
};

std::vector<ObservationTarget> two_output_targets() {
  ObservationTarget t0, t1;
  t0.id = "y0";
  t0.z = 0.0;
  t0.sigma_me = 0.2;
  t0.dataset = 'A';
  t1.id = "y1";
  t1.z = 0.0;
  t1.sigma_me = 0.2;
  t1.dataset = 'B';
  return {t0, t1};
}

WaveConfig linear_wave(int runs, int holdout) {
  WaveConfig w;
  w.datasets = "A";
  w.runs = runs;
  w.holdout = holdout;
  w.strategy = Strategy::linear;
  w.cutoffs.i_max = 3.0;
  w.membership_sample = 4000;
  return w;
}

/// Emulator whose mean is exactly x0 with a small uncorrelated residual.
Emulator exact_x0_emulator(double sigma_u2) {
  TrainingSet ts;
  ts.X = Mat::Random(30, 2);
  ts.y.resize(30);
  for (int i = 0; i < 30; ++i) ts.y[i] = ts.X(i, 0);
  EmulatorSpec s;
  s.output_id = "y0";
  s.basis = {BasisTerm{}, BasisTerm{0, -1}};
  s.beta = Vec::Zero(2);
  s.beta[1] = 1.0;
  s.residual = ResidualModel::uncorrelated;
  s.sigma_u2 = sigma_u2;
  return Emulator(s, ts);
}

}  // namespace

TEST_CASE("toy refocusing campaign recovers every root of the band equation") {
  const CampaignManifest m = parse_manifest(kToyManifest);
  REQUIRE(m.simulator_id == "toy1d");
  REQUIRE(m.schedule.size() == 2);
  REQUIRE(m.targets.size() == 1);
  CHECK(m.targets[0].z == -0.3);
  CHECK(m.targets[0].sigma_me == 0.05);

  auto sim = make_simulator(m);
  const CampaignResult res = run_campaign(*sim, m.targets, to_campaign_config(m));

  REQUIRE(res.waves.size() == 2);
  CHECK(res.stop_reason == "schedule-complete");

  // Wave 1 is the plain centered 8-cell stratified design.
  const WaveResult& w1 = res.waves[0];
  CHECK(w1.ledger.design_method == "lhs");
  REQUIRE(w1.design.rows() == 8);
  std::vector<double> xs(w1.design.col(0).begin(), w1.design.col(0).end());
  std::sort(xs.begin(), xs.end());
  for (int i = 0; i < 8; ++i)
    CHECK(xs[static_cast<std::size_t>(i)] ==
          Catch::Approx(-1.0 + 2.0 * (i + 0.5) / 8.0).margin(1e-12));
  CHECK(w1.ledger.converged == 8);
  CHECK(w1.ledger.emulated == 1);
  CHECK(w1.ledger.fraction_of_previous == Catch::Approx(0.326).margin(0.03));

  const WaveResult& w2 = res.waves[1];
  CHECK(w2.ledger.design_method == "rejection");
  CHECK(w2.design.rows() == 3);
  CHECK(w2.ledger.fraction_of_previous < 1.0);
  CHECK(w2.ledger.variance_ratio < 1.0);

  // The final region keeps every true root and has shed most of the interval.
  CHECK(res.state.cumulative < 0.25);
  CHECK(res.state.cumulative == Catch::Approx(0.071).margin(0.025));
  for (double root : testutil::toy_band_center_roots())
    CHECK(res.state.region.contains(Vec::Constant(1, toy_to_scaled(root))));
  CHECK(res.state.ledger.size() == 2);
  CHECK(res.state.train_X.rows() == 11);  // wave-2 training pooled both waves
}

TEST_CASE("campaign stops as soon as every point is implausible") {
  const CampaignManifest m = parse_manifest(kToyManifest);
  ObservationTarget unreachable = m.targets[0];
  unreachable.z = 10.0;  // far above the simulator's range
  unreachable.sigma_me = 1e-3;

  auto sim = make_simulator(m);
  CampaignConfig config = to_campaign_config(m);
  config.stop_var_ratio = 0.0;
  const CampaignResult res = run_campaign(*sim, {unreachable}, config);
  CHECK(res.region_empty());
  CHECK(res.stop_reason == "region-empty");
  REQUIRE(res.waves.size() == 1);
  CHECK(res.waves[0].ledger.fraction_of_previous == 0.0);
  CHECK(res.state.cumulative == 0.0);
}

TEST_CASE("variance-resolved stop fires when emulation stops limiting") {
  CampaignManifest m = parse_manifest(kToyManifest);
  m.schedule.push_back(m.schedule[1]);  // a third wave that should never run
  auto sim = make_simulator(m);
  CampaignConfig config = to_campaign_config(m);
  REQUIRE(config.stop_var_ratio == 1.0);
  config.schedule = m.schedule;
  const CampaignResult res = run_campaign(*sim, m.targets, config);
  CHECK(res.stop_reason == "variance-resolved");
  CHECK(res.waves.size() == 2);
}

TEST_CASE("waves emulate only the outputs of their declared datasets") {
  TwoOutputSim sim;
  const auto targets = two_output_targets();
  CampaignState state;
  state.region = Region::box(2);
  const WaveConfig config = linear_wave(40, 12);

  const WaveResult res = run_wave(sim, state, config, targets, 1, 99);

  REQUIRE(res.reports.size() == 1);  // only the dataset-A output was considered
  CHECK(res.reports[0].name == "y0");
  CHECK(res.reports[0].accepted);
  REQUIRE(res.test.emulators.size() == 1);
  CHECK(res.test.targets[0].id == "y0");
  CHECK(res.ledger.designed == 52);
  CHECK(res.ledger.converged == 52);
  CHECK(res.ledger.train_n == 40);
  CHECK(res.ledger.holdout_n == 12);

  // y0 is monotone, so the cut keeps |x0| below about 0.56 and frees x1.
  CHECK(res.ledger.fraction_of_previous == Catch::Approx(0.556).margin(0.05));
  REQUIRE(res.retained.rows() > 100);
  CHECK(res.retained.col(0).cwiseAbs().maxCoeff() < 0.7);
  CHECK(res.retained.col(1).maxCoeff() > 0.8);
  CHECK(res.retained.col(1).minCoeff() < -0.8);

  // An essentially exact emulator never discards a good holdout run.
  CHECK(res.ledger.safety_rate <= 0.05);
  CHECK(res.ledger.safety_eligible > 0);
  CHECK(state.ledger.size() == 1);
}

TEST_CASE("wave configuration is validated before any simulation") {
  TwoOutputSim sim;
  const auto targets = two_output_targets();
  CampaignState state;
  state.region = Region::box(2);

  WaveConfig bad = linear_wave(40, 10);
  bad.runs = 0;
  CHECK_THROWS_AS(run_wave(sim, state, bad, targets, 1, 1), ValidationError);

  bad = linear_wave(40, 10);
  bad.cutoffs = {};
  CHECK_THROWS_AS(run_wave(sim, state, bad, targets, 1, 1), ValidationError);

  bad = linear_wave(40, 10);
  bad.datasets = "Z";
  CHECK_THROWS_AS(run_wave(sim, state, bad, targets, 1, 1), ValidationError);

  bad = linear_wave(40, 10);
  bad.strategy = Strategy::pinned;  // without a pinned residual spec
  CHECK_THROWS_AS(run_wave(sim, state, bad, targets, 1, 1), ValidationError);

  CHECK_THROWS_AS(run_wave(sim, state, linear_wave(40, 10), {targets[0]}, 1, 1),
                  ValidationError);

  // Too few runs to fit a regression mean.
  CHECK_THROWS_AS(run_wave(sim, state, linear_wave(5, 0), targets, 1, 1), FitError);
}

TEST_CASE("resuming mid-schedule reproduces the continuous campaign") {
  TwoOutputSim sim;
  const auto targets = two_output_targets();

  CampaignConfig config;
  config.seed = 31;
  config.schedule = {linear_wave(40, 12), linear_wave(30, 10)};
  config.schedule[1].cumulative_training = true;

  CampaignState checkpoint;
  const CampaignResult full = run_campaign(
      sim, targets, config,
      [&](const WaveResult& wave, const CampaignState& state) {
        if (wave.config.index == 1) checkpoint = state;
      });
  REQUIRE(full.waves.size() == 2);
  CHECK(full.state.train_X.rows() == 70);

  const CampaignResult resumed =
      run_campaign(sim, targets, config, {}, checkpoint, /*completed_waves=*/1);
  REQUIRE(resumed.waves.size() == 1);
  CHECK(resumed.waves[0].ledger.cumulative == full.waves[1].ledger.cumulative);
  REQUIRE(resumed.state.members.rows() == full.state.members.rows());
  CHECK((resumed.state.members - full.state.members).cwiseAbs().maxCoeff() == 0.0);

  CHECK_THROWS_AS(run_campaign(sim, targets, config, {}, checkpoint, 3), ValidationError);
}

TEST_CASE("holdout screening accepts faithful emulators and rejects broken ones") {
  const Emulator good = exact_x0_emulator(1e-4);
  Mat X(50, 2);
  Vec y(50);
  auto rng = make_rng(8);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    X(i, 0) = unit(rng);
    X(i, 1) = unit(rng);
    y[i] = X(i, 0);
  }
  const DiagnosticReport ok = diagnose(good, X, y);
  CHECK(ok.pass);
  CHECK(ok.holdout == 50);
  CHECK(ok.max_abs_u < 1.0);
  CHECK(ok.flag_fraction == 0.0);

  // Against a simulator shifted by 0.9 the same emulator is badly biased:
  // it must fail, and every acceptable run is falsely discarded.
  Vec y_shift = y.array() - 0.9;
  ObservationTarget t;
  t.id = "y0";
  t.z = 0.0;
  t.sigma_me = 0.1;
  const DiagnosticReport bad = diagnose(good, X, y_shift, &t);
  CHECK_FALSE(bad.pass);
  CHECK(bad.max_abs_u > 3.0);
  CHECK(bad.eligible > 0);
  CHECK(bad.false_discards == bad.eligible);
  CHECK(static_cast<int>(bad.false_discard_rows.size()) == bad.false_discards);

  Vec short_y(3);
  CHECK_THROWS_AS(diagnose(good, X, short_y), ValidationError);
}
