#include <doctest.h>

#include <cmath>
#include <random>

#include "slicing/lyapunov.hpp"
#include "slicing/traffic.hpp"

using namespace slicing;

namespace {

const Rll kSv1{0.01, 0.99, 1e6, 1e4, 2};

QueueState one_slice(double f) {
  QueueState qs;
  qs.f["se"] = f;
  return qs;
}

}  // namespace

TEST_CASE("y at the boundaries and the threshold") {
  CHECK(compute_y(kSv1, 1e6) == doctest::Approx(0.99));
  CHECK(compute_y(kSv1, 0.0) == doctest::Approx(0.99));
  CHECK(compute_y(kSv1, 1e12) == doctest::Approx(-0.01));
  const double r = required_service_rate(1e6, 1e4, 0.01, 0.01);
  CHECK(std::abs(compute_y(kSv1, r)) < 1e-15);
  CHECK(compute_y(kSv1, 1e12, 0.2) == doctest::Approx(-0.008));
}

TEST_CASE("queue updates") {
  const std::map<std::string, CapacityTarget> targets{{"se", {0.75e6, 1e9}}};
  const double dt = 1.0;
  auto next = update_queues(one_slice(0.0), {{"se", 1.25e6}}, {}, targets, dt);
  CHECK(next.f["se"] == doctest::Approx(0.5e6));
  CHECK(next.slot == 1);

  QueueState g;
  g.g[UserId{3}] = 0.0;
  CHECK(update_queues(g, {}, {{UserId{3}, -0.01}}, {}, dt).g[UserId{3}] == 0.0);
  CHECK(update_queues(g, {}, {{UserId{3}, 0.2}}, {}, dt).g[UserId{3}] == doctest::Approx(0.2));
  // No y for a user leaves its queue alone.
  g.g[UserId{3}] = 1.5;
  CHECK(update_queues(g, {}, {}, {}, dt).g[UserId{3}] == 1.5);

  const std::map<std::string, CapacityTarget> clamped{{"se", {0.75e6, 100.0}}};
  CHECK(update_queues(one_slice(-100.0), {{"se", 0.1e6}}, {}, clamped, 1e-3).f["se"] == -100.0);

  CHECK_THROWS_AS(update_queues(one_slice(0.0), {}, {}, targets, dt), std::invalid_argument);
  CHECK_THROWS_AS(update_queues(one_slice(0.0), {{"se", 1.0}}, {}, {}, dt), std::invalid_argument);
  CHECK_THROWS_AS(update_queues(one_slice(0.0), {{"se", -1.0}}, {}, targets, dt),
                  std::invalid_argument);
}

TEST_CASE("telescoping against direct summation") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> served(0.0, 2e6);
  const double c = 1e6, dt = 1e-3;
  const std::map<std::string, CapacityTarget> targets{{"se", {c, 1e12}}};
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> s(100);
    for (auto& x : s) x = served(rng);
    QueueState qs = one_slice(0.0);
    std::vector<double> f{0.0};
    for (double x : s) {
      qs = update_queues(qs, {{"se", x}}, {}, targets, dt);
      f.push_back(qs.f["se"]);
    }
    // Oracle: plain summation, no recursion.
    double direct = 0.0;
    for (double x : s) direct += x * dt - c * dt;
    const auto res = telescoping_check(s, c, dt, f);
    REQUIRE(res.applicable);
    CHECK(res.relative < 1e-6);
    CHECK(f.back() == doctest::Approx(direct).epsilon(1e-9));
  }

  const std::vector<double> flat(10, c);
  const auto res = telescoping_check(flat, c, dt, std::vector<double>(11, 42.0));
  CHECK(res.applicable);
  CHECK(res.residual == 0.0);

  // A clamped step makes the check inapplicable.
  CHECK_FALSE(telescoping_check({0.0}, c, dt, {-1000.0, -1000.0}).applicable);
  CHECK_THROWS_AS(telescoping_check({0.0}, c, dt, {0.0}), std::invalid_argument);
}

TEST_CASE("stability metrics") {
  QueueState qs;
  qs.f["se"] = -2500.0;
  qs.g[UserId{0}] = 0.0;
  qs.slot = 10;
  const auto m = stability_metrics(qs);
  CHECK(m.at("se") == -250.0);
  CHECK(m.at("user:0") == 0.0);
  qs.slot = 0;
  CHECK_THROWS(stability_metrics(qs));
}

TEST_CASE("lyapunov value and drift") {
  QueueState zero;
  zero.f["se"] = 0.0;
  zero.g[UserId{0}] = 0.0;
  CHECK(lyapunov_value(zero) == 0.0);

  const std::map<std::string, CapacityTarget> targets{{"se", {0.75e6, 1e12}}};
  const auto next = update_queues(zero, {{"se", 1.25e6}}, {}, targets, 1.0);
  const auto d = drift_diag(zero, next, {{"se", 1.25e6}}, {}, targets, 1.0);
  CHECK(d.drift == doctest::Approx(0.5 * 0.5e6 * 0.5e6));
  CHECK(d.inequality_holds());
}

TEST_CASE("drift bound holds on random states") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double dt = 1e-3;
  for (int trial = 0; trial < 2000; ++trial) {
    QueueState qs;
    std::map<std::string, CapacityTarget> targets;
    std::map<std::string, double> served;
    std::map<UserId, double> y;
    for (int s = 0; s < 3; ++s) {
      const auto id = "s" + std::to_string(s);
      const double c = 1e6 * (1.5 + u(rng));
      targets[id] = {c, 10 * c * dt};
      qs.f[id] = std::max(1e4 * u(rng), -targets[id].clamp_bits);
      served[id] = c * (1.0 + u(rng));
    }
    for (int i = 0; i < 3; ++i) {
      qs.g[UserId{i}] = 5.0 * (1.0 + u(rng));
      y[UserId{i}] = u(rng);
    }
    const auto next = update_queues(qs, served, y, targets, dt);
    const auto d = drift_diag(qs, next, served, y, targets, dt);
    CHECK(d.lyapunov_value >= 0.0);
    CHECK(d.inequality_holds());
  }
}
