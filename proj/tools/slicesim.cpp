#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <random>

#include "slicing/allocator.hpp"
#include "slicing/channel.hpp"
#include "slicing/csv.hpp"
#include "slicing/engine.hpp"

namespace {

// Random small instances, closed form vs exhaustive search.
bool oracle_check(const slicing::PhyParams& phy, std::uint64_t seed) {
  using namespace slicing;
  auto rng = make_stream(seed, StreamPurpose::Oracle);
  std::uniform_int_distribution<int> dim(1, 3);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::exponential_distribution<double> fading(1.0);
  const double sigma = noise_power_w(phy);
  const double b = phy.prb_bandwidth_hz();
  int failures = 0;
  for (int inst = 0; inst < 20; ++inst) {
    const auto n = static_cast<std::size_t>(dim(rng));
    const auto k = static_cast<std::size_t>(dim(rng));
    ChannelMatrix ch{0, {}, Matrix<double>(n, k)};
    WeightVector w;
    double pmax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      ch.users.push_back(UserId{static_cast<int>(i)});
      w[UserId{static_cast<int>(i)}] = unit(rng) * 4e-6 - 1e-6;
      for (std::size_t j = 0; j < k; ++j) {
        ch.gains(i, j) = path_loss_gain(35.0 + 1465.0 * unit(rng), phy) * fading(rng);
        pmax = std::max(pmax, optimal_power_on_prb(w[ch.users[i]], ch.gains(i, j), sigma, b).power_w);
      }
    }
    std::vector<double> grid;
    const double step = std::max(pmax, 1e-12) * 1e-3;
    for (int g = 0; g <= 1100; ++g) grid.push_back(g * step);
    const double exact = objective(slot_allocate(w, ch, phy), w, ch);
    const double brute = objective(brute_force_oracle(w, ch, phy, grid), w, ch);
    const double tol = 1e-6 * std::abs(brute) + 1e-18;
    if (exact > brute + tol) ++failures;
  }
  std::cout << "oracle-check: " << (20 - failures) << "/20 instances match\n";
  return failures == 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Slot-level simulator for power-minimizing downlink slicing"};
  std::string scenario_path;
  std::string out_dir = "out";
  std::string controller;
  std::optional<std::uint64_t> seed;
  std::optional<int> slots;
  std::optional<double> kp, ki, kd, v;
  bool no_isolation = false;
  bool run_oracle = false;

  app.add_option("--scenario", scenario_path, "Scenario config (YAML)")->required()->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Override the fading seed");
  app.add_option("--slots", slots, "Override the horizon")->check(CLI::PositiveNumber);
  app.add_option("--controller", controller, "dpp or pid")->check(CLI::IsMember({"dpp", "pid"}));
  app.add_option("--kp", kp, "PID proportional gain");
  app.add_option("--ki", ki, "PID integral gain")->check(CLI::NonNegativeNumber);
  app.add_option("--kd", kd, "PID derivative gain");
  app.add_option("--v", v, "Penalty weight on power")->check(CLI::PositiveNumber);
  app.add_flag("--no-isolation", no_isolation, "Track offered load instead of contracted capacity");
  app.add_option("--out", out_dir, "Output directory");
  app.add_flag("--oracle-check", run_oracle, "Verify the allocator on small instances first");
  CLI11_PARSE(app, argc, argv);

  try {
    auto rc = slicing::load_run_config(scenario_path);
    if (seed) rc.scenario.rng_seed = *seed;
    if (slots) rc.scenario.horizon_slots = *slots;
    if (!controller.empty()) {
      rc.controller.kind = controller == "pid" ? slicing::ControllerKind::Pid
                                               : slicing::ControllerKind::DriftPlusPenalty;
    }
    if (kp) rc.controller.gains.kp = *kp;
    if (ki) rc.controller.gains.ki = *ki;
    if (kd) rc.controller.gains.kd = *kd;
    if (v) rc.controller.v = *v;
    if (no_isolation) rc.engine.isolation = false;
    slicing::validate(rc.scenario);

    if (run_oracle && !oracle_check(rc.scenario.phy, rc.scenario.rng_seed)) {
      std::cerr << "oracle-check failed\n";
      return 2;
    }

    const auto result = slicing::run_simulation(rc);
    std::optional<slicing::IsolationReport> iso;
    if (!rc.scenario.events.empty()) iso = slicing::isolation_report(result);
    slicing::emit_csv(result, out_dir, iso);

    const auto& s = result.summary;
    std::cout << "slots " << rc.scenario.horizon_slots << ", window [" << s.window_begin << ", "
              << s.window_end << ")\n";
    std::cout << "mean power " << s.mean_power_w << " W\n";
    for (const auto& sl : rc.scenario.slices) {
      std::cout << "  " << sl.id << ": served " << s.mean_served_bps.at(sl.id) << " bps";
      if (const auto it = s.final_reliability.find(sl.id); it != s.final_reliability.end()) {
        std::cout << ", reliability " << it->second;
      }
      std::cout << '\n';
    }
    std::cout << "wrote " << out_dir << "/slots.csv, summary.csv"
              << (iso ? ", isolation_report.csv" : "") << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
