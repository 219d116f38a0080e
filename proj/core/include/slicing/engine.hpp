#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "slicing/allocator.hpp"
#include "slicing/controller.hpp"
#include "slicing/lyapunov.hpp"
#include "slicing/scenario.hpp"

namespace slicing {

/// How b_i, the slope of y_i at the operating rate, is chosen each slot.
enum class LinearizationMode {
  FixedPoint,    // b evaluated at the rate the allocation itself produces
  PreviousRate,  // b at the previous slot's rate (the arrival rate at t = 0)
  TargetRate,    // b at the rate that meets the tightened tail target
};

std::string_view to_string(LinearizationMode m);
LinearizationMode linearization_from_string(std::string_view s);

/// Per-user multiplier on the RLL effort G_i.
enum class RllPriceScale {
  None,     // literal: lambda_i = b_i G_i / v
  Channel,  // G_i scaled by nu_i / b_i*, nu_i the user's noise-limited price
};

std::string_view to_string(RllPriceScale m);
RllPriceScale rll_price_scale_from_string(std::string_view s);

/// nu_i / b_i*: nu_i = sigma^2 ln 2 / (B g_i) is lambda at which a PRB at
/// mean gain just opens, b_i* the slope at the tightened target rate.
double rll_channel_scale(const Scenario& scn, const UserState& u, double reliability_margin);

struct ControllerConfig {
  ControllerKind kind = ControllerKind::DriftPlusPenalty;
  PidGains gains;
  double v = 1.0;
  double capacity_price = 1e-10;
  double reliability_margin = 0.2;
  LinearizationMode linearization = LinearizationMode::FixedPoint;
  RllPriceScale rll_price_scale = RllPriceScale::None;
  int fixed_point_sweeps = 6;
  int fixed_point_iterations = 40;
  double f_clamp_multiplier = 10.0;
  std::optional<double> power_cap_w;
};

struct EngineOptions {
  int warmup_slots = 50;
  int isolation_window = 100;
  bool isolation = true;  // false: F tracks offered load instead of C_s
};

struct RunConfig {
  Scenario scenario;
  ControllerConfig controller;
  EngineOptions engine;
};

/// Scenario plus the optional `controller` and `engine` sections.
RunConfig parse_run_config(std::string_view yaml_text);
RunConfig load_run_config(const std::filesystem::path& path);

struct SlotMetrics {
  int slot = 0;
  std::map<std::string, double> served_bps;          // every slice
  std::map<std::string, double> mean_user_rate_bps;  // served / active users
  std::map<std::string, double> reliability;         // RLL slices, worst user, running
  std::map<std::string, bool> admission;             // RLL slices
  std::map<UserId, double> rate_bps;                 // every user, 0 if inactive
  std::map<UserId, double> lambda;                   // every user, 0 if inactive
  std::map<UserId, double> tail;                     // active RLL users
  std::map<UserId, double> y;                        // active RLL users
  std::map<UserId, double> user_reliability;         // RLL users, running
  QueueState queues;                                 // after this slot's update
  DriftDiag drift;
  double total_power_w = 0.0;
  double fixed_point_residual = 0.0;  // max |ln(lambda / (G b(r) / v))|
};

struct RunSummary {
  int window_begin = 0;
  int window_end = 0;
  double mean_power_w = 0.0;
  std::map<std::string, double> mean_served_bps;
  std::map<std::string, double> mean_user_rate_bps;
  std::map<std::string, double> final_reliability;
  std::map<std::string, double> stability;
  bool drift_inequality_held = true;
  bool g_nonnegative = true;
};

struct RunResult {
  Scenario scenario;
  ControllerConfig controller;
  EngineOptions engine;
  std::vector<SlotMetrics> slots;
  RunSummary summary;
};

/// Mutable state carried from slot to slot.
struct EngineState {
  QueueState queues;
  ControllerState controller;
  Signals pending_errors;  // errors measured last slot, consumed by PID
  std::map<UserId, double> previous_rate;
  std::map<UserId, double> tail_sum;
  std::map<UserId, int> active_slots;
};

EngineState initial_state(const Scenario& scn, const ControllerConfig& cfg);

/// One slot: active users, channel, weights, allocation, served rates, y,
/// queue update, metrics.
SlotMetrics step(const Scenario& scn, const ControllerConfig& cfg, const EngineOptions& opt,
                 EngineState& state, int t);

RunResult run_simulation(const Scenario& scn, const ControllerConfig& cfg,
                         const EngineOptions& opt = {});
RunResult run_simulation(const RunConfig& rc);

/// Same loop with every self-managed F integrating served - offered load.
RunResult no_isolation_baseline(const Scenario& scn, const ControllerConfig& cfg,
                                EngineOptions opt = {});

RunSummary summarize(const RunResult& r, int begin, int end);

struct IsolationRow {
  std::string slice;
  std::string metric;  // "mean_user_rate" or "served"
  bool perturbed = false;
  double pre_mean = 0.0;
  double post_mean = 0.0;
  double relative_change = 0.0;
  double max_excursion = 0.0;  // largest relative deviation of the 10-slot mean
  int excursion_slots = 0;     // post-event slots with that deviation above 5%
};

struct IsolationReport {
  int event_slot = 0;
  int window = 0;
  std::vector<IsolationRow> rows;
};

/// Compares [event - W, event) with [event, event + W) around the first
/// event. Throws std::invalid_argument when the scenario has no events.
IsolationReport isolation_report(const RunResult& r);
IsolationReport isolation_experiment(const Scenario& scn, const ControllerConfig& cfg,
                                     const EngineOptions& opt = {});

}  // namespace slicing
