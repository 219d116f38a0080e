#include <doctest.h>

#include <random>

#include "slicing/scenario.hpp"

using namespace slicing;

namespace {

const char* kTwoSlices = R"(
slices:
  - {id: a, kind: rll, users: 1, d_max_s: 0.01, reliability: 0.99,
     arrival_bps: 1.0e6, mean_packet_bits: 1.0e4, max_users: 3}
  - {id: b, kind: self_managed, users: 2, capacity_bps: 1.0e6}
events:
  - {slot: 10, slice: b, users: 4}
  - {slot: 20, slice: a, users: 3}
  - {slot: 30, slice: b, users: 1}
simulation: {horizon_slots: 50}
)";

int count_in(const Scenario& scn, const std::vector<UserState>& us, std::string_view id) {
  const auto idx = scn.slice_index(id);
  int n = 0;
  for (const auto& u : us) n += u.slice == idx;
  return n;
}

}  // namespace

TEST_CASE("baseline config loads") {
  const auto scn = load_scenario(SLICING_BASELINE_CFG);
  CHECK(scn.slices.size() == 4);
  CHECK(scn.phy.num_prbs == 50);
  CHECK(scn.horizon_slots == 500);
  CHECK(scn.phy.prb_bandwidth_hz() == doctest::Approx(200e3));
  CHECK(count_in(scn, active_users(scn, 100), "se2") == 2);
  CHECK(count_in(scn, active_users(scn, 300), "se2") == 5);
  CHECK(count_in(scn, active_users(scn, 300), "se1") == 5);
  for (const auto& u : scn.users) {
    CHECK(u.distance_m > kMinUserDistanceM);
    CHECK(u.distance_m <= scn.phy.cell_radius_m);
  }
}

TEST_CASE("validation names the offending field") {
  const std::string bad = R"(
slices:
  - {id: x, kind: rll, users: 1, d_max_s: 0.01, reliability: 1.2,
     arrival_bps: 1.0e6, mean_packet_bits: 1.0e4, max_users: 2}
)";
  try {
    parse_scenario(bad);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(e.field() == "slices[0].reliability");
  }
  CHECK_THROWS_AS(parse_scenario("slices: [ {id: x"), ConfigParseError);
  CHECK_THROWS_AS(parse_scenario("bogus: 1"), ConfigParseError);
  CHECK_THROWS_AS(parse_scenario("slices:\n  - {id: x, kind: other}"), ConfigParseError);
  CHECK_THROWS_AS(parse_scenario("events:\n  - {slot: 1, slice: nope, users: 1}"), ValidationError);
  CHECK_THROWS_AS(parse_scenario("phy: {pathloss_exponent: 1.5}"), ValidationError);
}

TEST_CASE("zero slices is a valid scenario") {
  const auto scn = parse_scenario("simulation: {horizon_slots: 5}");
  CHECK(scn.slices.empty());
  CHECK(active_users(scn, 4).empty());
}

TEST_CASE("active users follow the event schedule") {
  const auto scn = parse_scenario(kTwoSlices);
  for (int t = 0; t < 50; ++t) {
    const auto us = active_users(scn, t);
    const int want_b = t < 10 ? 2 : t < 30 ? 4 : 1;
    const int want_a = t < 20 ? 1 : 3;
    CHECK(count_in(scn, us, "b") == want_b);
    CHECK(count_in(scn, us, "a") == want_a);
    for (std::size_t i = 1; i < us.size(); ++i) CHECK(us[i - 1].id < us[i].id);
  }
  // Lowest ids stay active when a slice shrinks.
  const auto late = active_users(scn, 40);
  const auto b = scn.slice_index("b");
  UserId lowest{1 << 30};
  for (const auto& u : scn.users) {
    if (u.slice == b) lowest = std::min(lowest, u.id);
  }
  for (const auto& u : late) {
    if (u.slice == b) CHECK(u.id == lowest);
  }
  CHECK_THROWS_AS(active_users(scn, 50), std::out_of_range);
  CHECK_THROWS_AS(active_users(scn, -1), std::out_of_range);
}

TEST_CASE("no events keeps counts constant") {
  auto scn = parse_scenario(kTwoSlices);
  scn.events.clear();
  for (int t = 0; t < 50; t += 7) {
    CHECK(count_in(scn, active_users(scn, t), "b") == 2);
  }
}

TEST_CASE("admission flag uses a strict bound") {
  const auto scn = parse_scenario(kTwoSlices);
  CHECK(admission_flag(scn, "a", 0));    // 1 < 3
  CHECK_FALSE(admission_flag(scn, "a", 25));  // 3 < 3 fails
  CHECK_THROWS_AS(admission_flag(scn, "b", 0), std::invalid_argument);
  CHECK_THROWS_AS(admission_flag(scn, "zz", 0), std::out_of_range);
}

TEST_CASE("save then load is the identity") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    Scenario scn;
    scn.phy.num_prbs = 1 + static_cast<int>(u(rng) * 100);
    scn.phy.noise_psd_dbm_hz = -180.0 + 20.0 * u(rng);
    scn.phy.carrier_freq_hz = 1e8 + 5e9 * u(rng);
    scn.phy.pathloss_exponent = 2.0 + 2.0 * u(rng);
    scn.horizon_slots = 1 + static_cast<int>(u(rng) * 1000);
    scn.slot_duration_s = 1e-4 + u(rng) * 1e-2;
    scn.rng_seed = rng();
    const int n_slices = static_cast<int>(u(rng) * 4);
    for (int s = 0; s < n_slices; ++s) {
      SliceSpec spec;
      spec.id = "s" + std::to_string(s);
      spec.initial_users = static_cast<int>(u(rng) * 4);
      if (u(rng) < 0.5) {
        spec.kind = SelfManaged{1e5 + 1e7 * u(rng), 1e4 + 1e6 * u(rng)};
      } else {
        spec.kind = Rll{1e-3 + 0.1 * u(rng), 0.5 + 0.49 * u(rng), 1e5 + 1e7 * u(rng),
                        100 + 1e5 * u(rng), 1 + static_cast<int>(u(rng) * 5)};
      }
      scn.slices.push_back(spec);
    }
    if (n_slices > 0) {
      scn.events.push_back({static_cast<int>(u(rng) * 100), "s0", static_cast<int>(u(rng) * 4)});
    }
    scn.users = place_users(scn);
    validate(scn);
    const auto back = parse_scenario(dump_scenario(scn));
    CHECK(back == scn);
  }
}

TEST_CASE("placement is reproducible and inside the annulus") {
  auto scn = parse_scenario(kTwoSlices);
  const auto again = place_users(scn);
  CHECK(again == scn.users);
  scn.rng_seed = 99;
  CHECK(place_users(scn) != again);
}
