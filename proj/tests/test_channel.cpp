#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "slicing/channel.hpp"

using namespace slicing;

namespace {

// Frozen from an independent link-budget calculation (free-space loss in dB
// at 1 m, then thermal noise over a 200 kHz PRB).
constexpr double kG0Db = -31.53263341066987;
constexpr double kNoise200kHzW = 8.147605556082245e-16;

double to_db(double x) { return 10.0 * std::log10(x); }

Scenario one_user(double distance_m, int slots) {
  Scenario scn;
  scn.horizon_slots = slots;
  scn.slices.push_back({"s", SelfManaged{1e6, 1e5}, 1});
  scn.users.push_back({UserId{0}, 0, distance_m});
  validate(scn);
  return scn;
}

// Kolmogorov-Smirnov distance between a sample and Exp(1).
double ks_exp1(std::vector<double> x) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double cdf = 1.0 - std::exp(-x[i]);
    d = std::max({d, (i + 1) / n - cdf, cdf - i / n});
  }
  return d;
}

}  // namespace

TEST_CASE("free-space intercept and exponent") {
  PhyParams phy;
  CHECK(to_db(path_loss_gain(1.0, phy)) == doctest::Approx(kG0Db).epsilon(1e-12));
  CHECK(to_db(path_loss_gain(1.0, phy)) == doctest::Approx(-31.5).epsilon(0.002));
  CHECK(to_db(path_loss_gain(1000.0, phy)) == doctest::Approx(kG0Db - 90.0).epsilon(1e-12));
  phy.pathloss_exponent = 2.0;
  CHECK(path_loss_gain(10.0, phy) == doctest::Approx(path_loss_gain(1.0, phy) / 100.0));
  CHECK_THROWS_AS(path_loss_gain(0.5, phy), std::invalid_argument);
}

TEST_CASE("per-PRB noise power") {
  PhyParams phy;
  CHECK(noise_power_w(phy) == doctest::Approx(kNoise200kHzW).epsilon(1e-12));
  CHECK(to_db(noise_power_w(phy)) + 30.0 == doctest::Approx(-120.8897).epsilon(1e-6));
  PhyParams one_hz;
  one_hz.noise_psd_dbm_hz = -174.0;
  one_hz.total_bandwidth_hz = 1.0;
  one_hz.num_prbs = 1;
  CHECK(noise_power_w(one_hz) == doctest::Approx(std::pow(10.0, -20.4)).epsilon(1e-12));
  PhyParams wide = phy;
  wide.num_prbs = 25;
  CHECK(noise_power_w(wide) == doctest::Approx(2.0 * noise_power_w(phy)));
}

TEST_CASE("fading is unit-mean exponential") {
  const auto scn = one_user(100.0, 2000);
  const double pl = path_loss_gain(100.0, scn.phy);
  std::vector<double> x;
  x.reserve(100'000);
  for (int t = 0; t < scn.horizon_slots; ++t) {
    const auto ch = sample_channel(scn, t);
    for (std::size_t j = 0; j < ch.gains.cols(); ++j) {
      CHECK_MESSAGE(ch.gains(0, j) > 0.0, "gain must be positive");
      x.push_back(ch.gains(0, j) / pl);
    }
  }
  REQUIRE(x.size() == 100'000);
  double mean = 0.0;
  for (double v : x) mean += v / static_cast<double>(x.size());
  CHECK(mean == doctest::Approx(1.0).epsilon(0.02));
  CHECK(ks_exp1(x) < 0.01);
}

TEST_CASE("channel sampling is reproducible and user-keyed") {
  Scenario scn = one_user(200.0, 10);
  scn.slices[0].initial_users = 2;
  scn.users.push_back({UserId{1}, 0, 400.0});
  const auto a = sample_channel(scn, 3);
  const auto b = sample_channel(scn, 3);
  CHECK(a.gains == b.gains);
  CHECK(sample_channel(scn, 4).gains != a.gains);

  // A user's row does not depend on who else is active.
  const auto solo = sample_channel(scn, {scn.users[1]}, 3);
  for (std::size_t j = 0; j < solo.gains.cols(); ++j) CHECK(solo.gains(0, j) == a.gains(1, j));
}

TEST_CASE("doubling distance divides mean gain by eight") {
  Scenario scn = one_user(300.0, 400);
  scn.slices[0].initial_users = 2;
  scn.users.push_back({UserId{1}, 0, 600.0});
  double near = 0.0, far = 0.0;
  for (int t = 0; t < scn.horizon_slots; ++t) {
    const auto ch = sample_channel(scn, t);
    for (std::size_t j = 0; j < ch.gains.cols(); ++j) {
      near += ch.gains(0, j);
      far += ch.gains(1, j);
    }
  }
  CHECK(far / near == doctest::Approx(1.0 / 8.0).epsilon(0.03));
  CHECK(path_loss_gain(600.0, scn.phy) / path_loss_gain(300.0, scn.phy) ==
        doctest::Approx(1.0 / 8.0).epsilon(1e-12));
}
