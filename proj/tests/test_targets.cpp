#include "hmatch/matching/targets.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace hmatch;

TEST_CASE("implausibility is distance in combined standard deviations") {
  ObservationTarget t;
  t.id = "demo";
  t.z = 2.0;
  t.sigma_md = 0.3;
  t.sigma_me = 0.4;  // combined var = 0.25, sd = 0.5

  CHECK(implausibility(2.0, 0.0, t) == Catch::Approx(0.0));
  CHECK(implausibility(3.0, 0.0, t) == Catch::Approx(2.0));
  CHECK(implausibility(1.0, 0.0, t) == Catch::Approx(2.0));
  // Emulator variance widens the denominator: 0.25 + 0.75 = 1.
  CHECK(implausibility(4.0, 0.75, t) == Catch::Approx(2.0));
}

TEST_CASE("implausibility with no uncertainty at all is rejected") {
  ObservationTarget t;
  t.id = "exact";
  t.z = 1.0;
  CHECK_THROWS_AS(implausibility(1.0, 0.0, t), ValidationError);
  CHECK_NOTHROW(implausibility(1.0, 0.5, t));
}

TEST_CASE("window targets reproduce their endpoints at implausibility 3") {
  // An up-trend window: the simulator value must sit in [0.182, 2.303]
  // (roughly 1.2x to 10x on the natural scale) to score I <= 3.
  const ObservationTarget up = target_from_window("up", 'A', 0.182, 2.303);
  CHECK(up.z == Catch::Approx(1.2425));
  CHECK(std::sqrt(up.combined_var()) == Catch::Approx((2.303 - 0.182) / 6.0));
  CHECK(implausibility(0.182, 0.0, up) == Catch::Approx(3.0).margin(0.01));
  CHECK(implausibility(2.303, 0.0, up) == Catch::Approx(3.0).margin(0.01));
  CHECK(implausibility(1.2425, 0.0, up) == Catch::Approx(0.0).margin(1e-12));
  // Just outside the window fails the cutoff, just inside passes.
  CHECK(implausibility(0.10, 0.0, up) > 3.0);
  CHECK(implausibility(0.25, 0.0, up) < 3.0);
}

TEST_CASE("no-change window covers a 40 percent swing either way") {
  // A "no visible change" observation accepts anything between a 40%
  // decrease and a 40% increase: the +-3 sigma band must reproduce
  // +-log(1.4) ~ +-0.336 to within 0.01.
  const ObservationTarget none = target_from_window("flat", 'A', -0.342, 0.336);
  const double sd = std::sqrt(none.combined_var());
  CHECK(none.z == Catch::Approx(-0.003));
  CHECK(none.z + 3.0 * sd == Catch::Approx(std::log(1.4)).margin(0.01));
  CHECK(none.z - 3.0 * sd == Catch::Approx(-std::log(1.4)).margin(0.01));
  CHECK(implausibility(std::log(1.4), 0.0, none) == Catch::Approx(3.0).margin(0.1));
}

TEST_CASE("window target validation spots inconsistent metadata") {
  ObservationTarget t = target_from_window("w", 'B', -1.0, 1.0);
  CHECK_NOTHROW(t.validate());
  t.z = 0.2;  // no longer the midpoint
  CHECK_THROWS_AS(t.validate(), ValidationError);
  t = target_from_window("w", 'B', -1.0, 1.0);
  t.sigma_me *= 2.0;  // 6 sigma no longer matches the window width
  CHECK_THROWS_AS(t.validate(), ValidationError);
}

TEST_CASE("combined implausibility ranks the top three outputs") {
  const CombinedImplausibility c = combined_implausibility({1.0, 4.0, 2.0, 3.0});
  CHECK(c.i_max == 4.0);
  REQUIRE(c.i_2max);
  CHECK(*c.i_2max == 3.0);
  REQUIRE(c.i_3max);
  CHECK(*c.i_3max == 2.0);

  const CombinedImplausibility two = combined_implausibility({5.0, 1.0});
  CHECK(two.i_max == 5.0);
  REQUIRE(two.i_2max);
  CHECK(*two.i_2max == 1.0);
  CHECK_FALSE(two.i_3max);

  CHECK_THROWS_AS(combined_implausibility({}), ValidationError);
}

TEST_CASE("cutoffs apply to whichever maxima are configured") {
  const CombinedImplausibility c = combined_implausibility({4.0, 2.5, 1.0});

  Cutoffs only_second;
  only_second.i_2max = 3.0;
  CHECK(passes(c, only_second));  // i_max 4.0 is not tested

  Cutoffs first;
  first.i_max = 3.0;
  CHECK_FALSE(passes(c, first));

  Cutoffs second_and_third;
  second_and_third.i_2max = 3.0;
  second_and_third.i_3max = 0.5;
  CHECK_FALSE(passes(c, second_and_third));  // third maximum 1.0 > 0.5

  CHECK_THROWS_AS(passes(c, Cutoffs{}), ValidationError);
}

TEST_CASE("the bundled output table declares 32 targets with valid windows") {
  const std::vector<ObservationTarget> targets = crosstalk_targets();
  REQUIRE(targets.size() == 32);
  int a = 0, b = 0, c = 0;
  for (const auto& t : targets) {
    CHECK_NOTHROW(t.validate());
    REQUIRE(t.window);
    if (t.dataset == 'A') ++a;
    if (t.dataset == 'B') ++b;
    if (t.dataset == 'C') ++c;
  }
  CHECK(a + b + c == 32);
  CHECK(a == 22);
  CHECK(b == 5);
  CHECK(c == 5);
}
