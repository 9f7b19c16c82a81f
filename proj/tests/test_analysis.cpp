#include "hmatch/analysis/analysis.hpp"
#include "hmatch/design/lhs.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

using namespace hmatch;

TEST_CASE("variance resolution measures how much dispersion a wave removed") {
  const Mat u = maximin_lhs(200, 2, 3);
  CHECK(variance_resolution(u, u, {0, 1}) == Catch::Approx(0.0).margin(1e-12));

  // Halving both coordinates scales the covariance determinant by 1/16.
  const Mat v = 0.5 * u;
  CHECK(variance_resolution(u, v, {0, 1}) == Catch::Approx(1.0 - 0.0625).margin(1e-12));
  CHECK(variance_resolution(u, v, {1}) == Catch::Approx(0.75).margin(1e-12));

  // A fully collapsed input resolves to 1.
  Mat w = u;
  w.col(0).setConstant(0.3);
  CHECK(variance_resolution(u, w, {0, 1}) == Catch::Approx(1.0).margin(1e-12));

  CHECK_THROWS_AS(variance_resolution(u, v, {}), ValidationError);
  // Singular reference covariance is an error, not a silent NaN.
  CHECK_THROWS_AS(variance_resolution(w, u, {0, 1}), ValidationError);
  CHECK_THROWS_AS(variance_resolution(Mat::Zero(1, 2), v, {0, 1}), ValidationError);
}

TEST_CASE("joint constraint matrix reports squared pairwise correlations") {
  Mat X(4, 3);
  X.col(0) << -1.0, -0.5, 0.5, 1.0;
  X.col(1) = -X.col(0);
  X.col(2).setConstant(1.0);  // no spread

  const Mat R = joint_constraint_matrix(X);
  REQUIRE(R.rows() == 3);
  CHECK(R(0, 0) == 0.0);
  CHECK(R(1, 1) == 0.0);
  CHECK(R(0, 1) == Catch::Approx(1.0).margin(1e-12));
  CHECK(R(1, 0) == R(0, 1));
  CHECK(std::isnan(R(0, 2)));
  CHECK(std::isnan(R(2, 1)));

  CHECK_THROWS_AS(joint_constraint_matrix(Mat::Zero(2, 3)), ValidationError);
}

TEST_CASE("informativeness scores inputs by conditional variance shrinkage") {
  SampleSet wave1;
  wave1.label = "wave1";
  wave1.X = maximin_lhs(400, 2, 9);
  wave1.Y = wave1.X.col(0);  // the output is x0 itself; x1 is irrelevant

  ObservationTarget t;
  t.id = "y";
  t.z = 0.0;
  t.sigma_me = 1.0 / 6.0;  // cutoff 3 accepts |x0| <= 0.5

  const InformativenessReport rep = input_output_informativeness(wave1, {t});
  REQUIRE(rep.value.rows() == 2);
  REQUIRE(rep.value.cols() == 1);
  // Conditioning a uniform x0 to half its range removes 3/4 of its variance.
  CHECK(rep.value(0, 0) == Catch::Approx(0.75).margin(0.05));
  CHECK(rep.value(1, 0) == Catch::Approx(0.0).margin(0.12));
  CHECK(rep.pass_counts[0] == Catch::Approx(200).margin(25));
  CHECK(rep.low_confidence[0][0] == 0);

  // The low-confidence flag trips when too few runs pass the window.
  const InformativenessReport starved =
      input_output_informativeness(wave1, {t}, 3.0, /*min_pass=*/100000);
  CHECK(starved.low_confidence[0][0] == 1);
  CHECK(starved.low_confidence[1][0] == 1);

  SampleSet bad = wave1;
  bad.Y = Mat::Zero(400, 2);
  CHECK_THROWS_AS(input_output_informativeness(bad, {t}), ValidationError);
}

TEST_CASE("quantile summary interpolates the five-number summary") {
  Vec v(5);
  v << 5.0, 3.0, 1.0, 4.0, 2.0;
  const QuantileSummary q = quantile_summary(v);
  CHECK(q.min == 1.0);
  CHECK(q.q25 == 2.0);
  CHECK(q.median == 3.0);
  CHECK(q.q75 == 4.0);
  CHECK(q.max == 5.0);

  const QuantileSummary single = quantile_summary(Vec::Constant(1, 7.0));
  CHECK(single.min == 7.0);
  CHECK(single.median == 7.0);
  CHECK(single.max == 7.0);

  CHECK_THROWS_AS(quantile_summary(Vec()), ValidationError);
}

TEST_CASE("sign split partitions runs by one output's sign") {
  SampleSet s;
  s.label = "probe";
  s.X = Mat::Zero(5, 1);
  s.X.col(0) << 1, 2, 3, 4, 5;
  s.Y.resize(5, 1);
  s.Y.col(0) << -2.0, -1.0, 1.0, 2.0, 3.0;

  const SignSplit split = sign_split(s, 0);
  CHECK_FALSE(split.one_sided);
  CHECK(split.positive.label == "probe:positive");
  REQUIRE(split.positive.X.rows() == 3);
  REQUIRE(split.negative.X.rows() == 2);
  CHECK(split.positive.X(0, 0) == 3.0);  // original row order preserved
  CHECK(split.negative.Y(1, 0) == -1.0);
  REQUIRE(split.positive_summary.size() == 1);
  CHECK(split.positive_summary[0].median == 2.0);
  CHECK(split.negative_summary[0].max == -1.0);

  s.Y.col(0) << 1, 2, 3, 4, 5;
  const SignSplit lopsided = sign_split(s, 0);
  CHECK(lopsided.one_sided);
  CHECK(lopsided.negative.X.rows() == 0);
  CHECK(lopsided.negative_summary.empty());

  CHECK_THROWS_AS(sign_split(s, 3), ValidationError);
}

TEST_CASE("pass proportions tabulate per-target window rates by wave") {
  ObservationTarget t;
  t.id = "y";
  t.z = 0.0;
  t.sigma_me = 1.0 / 3.0;  // cutoff 3 accepts |y| <= 1

  SampleSet w1, w2;
  w1.Y.resize(5, 1);
  w1.Y.col(0) << -2.0, -0.5, 0.0, 0.5, 2.0;
  w2.Y.resize(2, 1);
  w2.Y.col(0) << 0.0, 0.1;

  const Mat P = pass_proportions({w1, w2}, {t});
  REQUIRE(P.rows() == 2);
  CHECK(P(0, 0) == 0.6);
  CHECK(P(1, 0) == 1.0);

  CHECK_THROWS_AS(pass_proportions({}, {t}), ValidationError);
  SampleSet bad;
  bad.Y = Mat::Zero(3, 2);
  CHECK_THROWS_AS(pass_proportions({bad}, {t}), ValidationError);
}

TEST_CASE("pair density bins points and labels highest-density regions") {
  // 4+3+2+1 points in the four quadrants, plus one point out of range.
  std::vector<std::pair<double, double>> rows;
  for (int i = 0; i < 4; ++i) rows.push_back({-0.5, -0.5});
  for (int i = 0; i < 3; ++i) rows.push_back({-0.5, 0.5});
  for (int i = 0; i < 2; ++i) rows.push_back({0.5, -0.5});
  rows.push_back({0.5, 0.5});
  rows.push_back({2.0, 0.0});
  Mat X(static_cast<Eigen::Index>(rows.size()), 2);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    X(static_cast<Eigen::Index>(r), 0) = rows[r].first;
    X(static_cast<Eigen::Index>(r), 1) = rows[r].second;
  }

  const PairDensity pd = pair_density(X, 0, 1, 2);
  REQUIRE(pd.counts.rows() == 2);
  CHECK(pd.counts(0, 0) == 4.0);
  CHECK(pd.counts(0, 1) == 3.0);
  CHECK(pd.counts(1, 0) == 2.0);
  CHECK(pd.counts(1, 1) == 1.0);

  // Densest bins first: 4 and 3 cover the 50% region, 2 tops it up to 90%,
  // and the last bin lies outside both sets.
  CHECK(pd.hdr(0, 0) == 2.0);
  CHECK(pd.hdr(0, 1) == 2.0);
  CHECK(pd.hdr(1, 0) == 1.0);
  CHECK(pd.hdr(1, 1) == 0.0);

  CHECK_THROWS_AS(pair_density(X, 0, 1, 0), ValidationError);
  CHECK_THROWS_AS(pair_density(X, 0, 5), ValidationError);
}
