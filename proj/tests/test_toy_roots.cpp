#include "hmatch/toy.hpp"

#include "helpers.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace hmatch;

TEST_CASE("verification curve crosses the observation exactly twice") {
  // Independent bracketing/bisection oracle over 4096 scan cells.  The curve
  // 0.1x + cos x meets the observed level -0.3 at exactly two points of the
  // domain; these frozen values anchor the end-to-end campaign checks.
  const std::vector<double> roots = testutil::toy_band_center_roots();
  REQUIRE(roots.size() == 2);
  CHECK(roots[0] == Catch::Approx(testutil::kToyRoot1).epsilon(1e-12));
  CHECK(roots[1] == Catch::Approx(testutil::kToyRoot2).epsilon(1e-12));

  for (double r : roots) CHECK(toy_1d(r) == Catch::Approx(-0.3).margin(1e-12));

  // The curve never returns to the level after the second crossing: the
  // linear trend dominates before the next cosine trough could reach it.
  double min_tail = 1e9;
  for (double x = roots[1] + 1e-3; x <= kToyHi; x += 1e-3)
    min_tail = std::min(min_tail, toy_1d(x) + 0.3);
  CHECK(min_tail > 0.0);
}

TEST_CASE("toy coordinate transforms are inverse to each other") {
  CHECK(toy_to_natural(-1.0) == Catch::Approx(0.0).margin(1e-15));
  CHECK(toy_to_natural(1.0) == Catch::Approx(kToyHi));
  CHECK(toy_to_natural(0.0) == Catch::Approx(0.5 * kToyHi));
  for (double s : {-1.0, -0.37, 0.0, 0.62, 1.0})
    CHECK(toy_to_scaled(toy_to_natural(s)) == Catch::Approx(s).margin(1e-14));
}
