#include <doctest.h>

#include <cmath>

#include "slicing/traffic.hpp"

using namespace slicing;

namespace {

// Frozen from direct evaluation of the tail inversion.
constexpr double kRateChi99 = 5605170.185988092;
constexpr double kRateChi95 = 2497866.1367769954;
constexpr double kInvE = 0.36787944117144233;

// Independent root finder on the analytic tail.
double bisect_rate(double a, double l, double d, double target) {
  double lo = a, hi = a + 1e9;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (analytic_violation_prob({mid, a, l, d}).value > target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("analytic tail") {
  const auto t = analytic_violation_prob({2e6, 1e6, 1e4, 0.01});
  CHECK_FALSE(t.unstable);
  CHECK(t.value == doctest::Approx(kInvE).epsilon(1e-12));
  const auto u = analytic_violation_prob({1e6, 1e6, 1e4, 0.01});
  CHECK(u.unstable);
  CHECK(u.value == 1.0);
  CHECK(analytic_violation_prob({0.5e6, 1e6, 1e4, 0.01}).unstable);
}

TEST_CASE("tail is decreasing in rate and deadline") {
  double prev = 1.0;
  for (double r = 1.1e6; r < 8e6; r += 0.3e6) {
    const double v = analytic_violation_prob({r, 1e6, 1e4, 0.01}).value;
    CHECK(v < prev);
    prev = v;
  }
  prev = 1.0;
  for (double d = 0.001; d < 0.1; d *= 1.5) {
    const double v = analytic_violation_prob({3e6, 1e6, 1e4, d}).value;
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("required rate inverts the tail") {
  CHECK(required_service_rate(1e6, 1e4, 0.01, 0.01) == doctest::Approx(kRateChi99).epsilon(1e-12));
  CHECK(required_service_rate(1e6, 1e4, 0.02, 0.05) == doctest::Approx(kRateChi95).epsilon(1e-12));
  CHECK(bisect_rate(1e6, 1e4, 0.01, 0.01) == doctest::Approx(kRateChi99).epsilon(1e-9));
  CHECK(bisect_rate(1e6, 1e4, 0.02, 0.05) == doctest::Approx(kRateChi95).epsilon(1e-9));
  for (double r : {1.5e6, 3e6, 7.7e6}) {
    const double tail = analytic_violation_prob({r, 1e6, 1e4, 0.01}).value;
    CHECK(required_service_rate(1e6, 1e4, 0.01, tail) == doctest::Approx(r).epsilon(1e-6));
  }
  CHECK_THROWS_AS(required_service_rate(1e6, 1e4, 0.01, 0.0), std::invalid_argument);
}

TEST_CASE("packet simulation matches the analytic tail") {
  const Mm1Params q{2e6, 1e6, 1e4, 0.01};
  auto rng = make_stream(42, StreamPurpose::Traffic);
  const double est = simulate_mm1_tail(q, 100'000, rng);
  CHECK(est == doctest::Approx(kInvE).epsilon(0.1));
  CHECK(std::abs(est - 0.368) < 0.01);

  // A tail near the chi = 0.99 target.
  const Mm1Params q99{kRateChi99, 1e6, 1e4, 0.01};
  auto rng2 = make_stream(43, StreamPurpose::Traffic);
  CHECK(simulate_mm1_tail(q99, 400'000, rng2) == doctest::Approx(0.01).epsilon(0.1));
}

TEST_CASE("packet simulation edge cases") {
  auto rng = make_stream(1, StreamPurpose::Traffic);
  CHECK(simulate_mm1_tail({100e6, 1e6, 1e4, 10.0}, 10'000, rng) == 0.0);
  auto a = make_stream(5, StreamPurpose::Traffic);
  auto b = make_stream(5, StreamPurpose::Traffic);
  CHECK(simulate_mm1_tail({2e6, 1e6, 1e4, 0.01}, 20'000, a) ==
        simulate_mm1_tail({2e6, 1e6, 1e4, 0.01}, 20'000, b));
  CHECK_THROWS_AS(simulate_mm1_tail({2e6, 1e6, 1e4, 0.01}, 9'999, rng), std::invalid_argument);
  CHECK_THROWS_AS(simulate_mm1_tail({1e6, 1e6, 1e4, 0.01}, 10'000, rng), std::invalid_argument);
}

TEST_CASE("offered load") {
  const auto scn = load_scenario(SLICING_BASELINE_CFG);
  CHECK(offered_load_bps(scn, "se1", 100) == doctest::Approx(1.25e6));
  CHECK(offered_load_bps(scn, "se2", 100) == doctest::Approx(0.5e6));
  CHECK(offered_load_bps(scn, "se2", 300) == doctest::Approx(1.25e6));
  CHECK(offered_load_bps(scn, "sv1", 0) == doctest::Approx(1e6));
  CHECK_THROWS_AS(offered_load_bps(scn, "nope", 0), std::out_of_range);

  Scenario empty;
  empty.slices.push_back({"z", SelfManaged{1e6, 2.5e5}, 0});
  CHECK(offered_load_bps(empty, "z", 0) == 0.0);
}
