#include "slicing/engine.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "slicing/channel.hpp"
#include "slicing/traffic.hpp"

namespace slicing {

std::string_view to_string(LinearizationMode m) {
  switch (m) {
    case LinearizationMode::FixedPoint: return "fixed_point";
    case LinearizationMode::PreviousRate: return "previous_rate";
    case LinearizationMode::TargetRate: return "target_rate";
  }
  return "?";
}

LinearizationMode linearization_from_string(std::string_view s) {
  if (s == "fixed_point") return LinearizationMode::FixedPoint;
  if (s == "previous_rate") return LinearizationMode::PreviousRate;
  if (s == "target_rate") return LinearizationMode::TargetRate;
  throw std::invalid_argument("unknown linearization mode '" + std::string(s) + "'");
}

std::string_view to_string(RllPriceScale m) {
  return m == RllPriceScale::Channel ? "channel" : "none";
}

RllPriceScale rll_price_scale_from_string(std::string_view s) {
  if (s == "none") return RllPriceScale::None;
  if (s == "channel") return RllPriceScale::Channel;
  throw std::invalid_argument("unknown rll_price_scale '" + std::string(s) + "'");
}

double rll_channel_scale(const Scenario& scn, const UserState& u, double reliability_margin) {
  const auto& rll = scn.slices[u.slice].rll();
  const double nu = noise_power_w(scn.phy) * std::log(2.0) /
                    (scn.phy.prb_bandwidth_hz() * path_loss_gain(u.distance_m, scn.phy));
  const double tail = (1.0 - rll.reliability) * (1.0 - reliability_margin);
  const double r_star =
      required_service_rate(rll.arrival_bps, rll.mean_packet_bits, rll.d_max_s, tail);
  return nu / linearization_coeff(rll, r_star);
}

// ---------------------------------------------------------------------------
// Config

namespace {

void check_keys(const YAML::Node& node, const std::set<std::string>& allowed,
                const std::string& where) {
  if (!node.IsMap()) throw ConfigParseError(where + ": expected a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.contains(key)) throw ConfigParseError(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
void read(const YAML::Node& node, const char* key, T& out, const std::string& where) {
  if (!node[key]) return;
  try {
    out = node[key].as<T>();
  } catch (const YAML::Exception& e) {
    throw ConfigParseError(where + "." + key + ": " + e.what());
  }
}

void validate(const ControllerConfig& c) {
  auto finite = [](double x) { return std::isfinite(x); };
  if (!(finite(c.v) && c.v > 0)) throw ValidationError("controller.v", "must be > 0");
  if (!(finite(c.capacity_price) && c.capacity_price > 0)) {
    throw ValidationError("controller.capacity_price", "must be > 0");
  }
  if (!(c.reliability_margin >= 0 && c.reliability_margin < 1)) {
    throw ValidationError("controller.reliability_margin", "must lie in [0, 1)");
  }
  if (!finite(c.gains.kp)) throw ValidationError("controller.kp", "must be finite");
  if (!(finite(c.gains.ki) && c.gains.ki >= 0)) {
    throw ValidationError("controller.ki", "must be finite and >= 0");
  }
  if (!finite(c.gains.kd)) throw ValidationError("controller.kd", "must be finite");
  if (c.fixed_point_sweeps < 1) throw ValidationError("controller.fixed_point_sweeps", "must be >= 1");
  if (c.fixed_point_iterations < 1) {
    throw ValidationError("controller.fixed_point_iterations", "must be >= 1");
  }
  if (!(finite(c.f_clamp_multiplier) && c.f_clamp_multiplier > 0)) {
    throw ValidationError("controller.f_clamp_multiplier", "must be > 0");
  }
  if (c.power_cap_w && !(*c.power_cap_w > 0)) {
    throw ValidationError("controller.power_cap_w", "must be > 0");
  }
}

}  // namespace

RunConfig parse_run_config(std::string_view yaml_text) {
  RunConfig rc;
  rc.scenario = parse_scenario(yaml_text);
  const auto root = YAML::Load(std::string(yaml_text));
  if (!root.IsMap()) return rc;

  if (const auto c = root["controller"]) {
    check_keys(c,
               {"kind", "kp", "ki", "kd", "v", "capacity_price", "reliability_margin",
                "linearization", "rll_price_scale", "fixed_point_sweeps", "fixed_point_iterations",
                "f_clamp_multiplier", "power_cap_w"},
               "controller");
    std::string kind = "dpp";
    read(c, "kind", kind, "controller");
    if (kind == "dpp") {
      rc.controller.kind = ControllerKind::DriftPlusPenalty;
    } else if (kind == "pid") {
      rc.controller.kind = ControllerKind::Pid;
    } else {
      throw ConfigParseError("controller.kind: expected 'dpp' or 'pid', got '" + kind + "'");
    }
    read(c, "kp", rc.controller.gains.kp, "controller");
    read(c, "ki", rc.controller.gains.ki, "controller");
    read(c, "kd", rc.controller.gains.kd, "controller");
    read(c, "v", rc.controller.v, "controller");
    read(c, "capacity_price", rc.controller.capacity_price, "controller");
    read(c, "reliability_margin", rc.controller.reliability_margin, "controller");
    if (c["linearization"]) {
      std::string mode;
      read(c, "linearization", mode, "controller");
      try {
        rc.controller.linearization = linearization_from_string(mode);
      } catch (const std::invalid_argument& e) {
        throw ConfigParseError(std::string("controller.linearization: ") + e.what());
      }
    }
    if (c["rll_price_scale"]) {
      std::string mode;
      read(c, "rll_price_scale", mode, "controller");
      try {
        rc.controller.rll_price_scale = rll_price_scale_from_string(mode);
      } catch (const std::invalid_argument& e) {
        throw ConfigParseError(std::string("controller.rll_price_scale: ") + e.what());
      }
    }
    read(c, "fixed_point_sweeps", rc.controller.fixed_point_sweeps, "controller");
    read(c, "fixed_point_iterations", rc.controller.fixed_point_iterations, "controller");
    read(c, "f_clamp_multiplier", rc.controller.f_clamp_multiplier, "controller");
    if (c["power_cap_w"] && !c["power_cap_w"].IsNull()) {
      double cap = 0;
      read(c, "power_cap_w", cap, "controller");
      rc.controller.power_cap_w = cap;
    }
  }
  validate(rc.controller);

  if (const auto e = root["engine"]) {
    check_keys(e, {"warmup_slots", "isolation_window", "isolation"}, "engine");
    read(e, "warmup_slots", rc.engine.warmup_slots, "engine");
    read(e, "isolation_window", rc.engine.isolation_window, "engine");
    read(e, "isolation", rc.engine.isolation, "engine");
    if (rc.engine.warmup_slots < 0) throw ValidationError("engine.warmup_slots", "must be >= 0");
    if (rc.engine.isolation_window < 1) {
      throw ValidationError("engine.isolation_window", "must be >= 1");
    }
  }
  return rc;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigParseError("cannot open config file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str());
}

// ---------------------------------------------------------------------------
// Slot loop

EngineState initial_state(const Scenario& scn, const ControllerConfig& cfg) {
  EngineState st;
  st.queues = initial_queues(scn);
  st.controller.kind = cfg.kind;
  st.controller.gains = cfg.gains;
  return st;
}

namespace {

struct SlotContext {
  const Scenario& scn;
  const ControllerConfig& cfg;
  const std::vector<UserState>& active;
  const ChannelMatrix& ch;
  const std::vector<double>& demand;
};

AllocationDecision allocate(const SlotContext& c, const WeightVector& w) {
  return demand_capped_allocate(w, c.ch, c.scn.phy, c.demand);
}

double rate_of(const AllocationDecision& d, std::size_t row) { return d.rates_bps[row]; }

// Solves lambda_i = u_i b_i(r_i(lambda)) / v for every RLL row by bisection
// on ln lambda, one user at a time, sweeping until nothing moves. The
// residual map is monotone in lambda_i, so bisection brackets the root.
std::map<UserId, double> fixed_point_b(const SlotContext& c, WeightVector w, const Signals& effort,
                                       const std::vector<std::size_t>& rll_rows) {
  std::map<UserId, double> b;
  struct Row {
    std::size_t row;
    const Rll* rll;
    double u;
  };
  std::vector<Row> rows;
  for (std::size_t r : rll_rows) {
    const auto& user = c.active[r];
    const auto it = effort.find(user.id);
    const double u = it == effort.end() ? 0.0 : it->second;
    const auto& rll = c.scn.slices[user.slice].rll();
    b[user.id] = linearization_coeff(rll, rll.arrival_bps);
    if (u > 0.0) {
      rows.push_back({r, &rll, u});
      w[user.id] = u * b[user.id] / c.cfg.v;
    } else {
      w[user.id] = 0.0;
    }
  }

  const double v = c.cfg.v;
  for (int sweep = 0; sweep < c.cfg.fixed_point_sweeps; ++sweep) {
    double moved = 0.0;
    for (const auto& row : rows) {
      const UserId id = c.active[row.row].id;
      const double before = w[id];
      double hi = std::log(row.u * linearization_coeff(*row.rll, 0.0) / v);
      double lo = hi - 80.0;
      for (int it = 0; it < c.cfg.fixed_point_iterations && hi - lo > 1e-12; ++it) {
        const double mid = 0.5 * (lo + hi);
        w[id] = std::exp(mid);
        const double r = rate_of(allocate(c, w), row.row);
        if (w[id] > row.u * linearization_coeff(*row.rll, r) / v) {
          hi = mid;
        } else {
          lo = mid;
        }
      }
      w[id] = std::exp(hi);
      moved = std::max(moved, std::abs(std::log(w[id] / before)));
    }
    if (moved < 1e-9) break;
  }
  for (const auto& row : rows) {
    const UserId id = c.active[row.row].id;
    b[id] = w[id] * v / row.u;
  }
  return b;
}

}  // namespace

SlotMetrics step(const Scenario& scn, const ControllerConfig& cfg, const EngineOptions& opt,
                 EngineState& state, int t) {
  const double dt = scn.slot_duration_s;
  const auto active = active_users(scn, t);
  const auto ch = sample_channel(scn, active, t);

  std::vector<double> demand(active.size(), std::numeric_limits<double>::infinity());
  std::vector<std::size_t> rll_rows;
  for (std::size_t i = 0; i < active.size(); ++i) {
    const auto& spec = scn.slices[active[i].slice];
    if (spec.is_self_managed()) {
      demand[i] = spec.self_managed().per_user_demand_bps;
    } else {
      rll_rows.push_back(i);
    }
  }

  // Control effort.
  std::map<SignalId, Bounds> bounds;
  for (const auto& s : scn.slices) {
    if (s.is_self_managed()) {
      bounds[s.id] = {-std::numeric_limits<double>::infinity(),
                      cfg.f_clamp_multiplier * s.self_managed().capacity_bps * dt};
    }
  }
  for (const auto& [id, _] : state.queues.g) bounds[id] = {0.0, std::numeric_limits<double>::infinity()};

  Signals effort;
  if (cfg.kind == ControllerKind::DriftPlusPenalty) {
    effort = dpp_efforts(state.queues);
  } else {
    auto pid = pid_update(state.controller, state.pending_errors, bounds);
    effort = std::move(pid.effort);
    state.controller = std::move(pid.state);
  }
  if (cfg.rll_price_scale == RllPriceScale::Channel) {
    for (std::size_t r : rll_rows) {
      if (const auto it = effort.find(active[r].id); it != effort.end()) {
        it->second *= rll_channel_scale(scn, active[r], cfg.reliability_margin);
      }
    }
  }

  const WeightScaling scaling{cfg.v, cfg.capacity_price};
  const SlotContext ctx{scn, cfg, active, ch, demand};

  std::map<UserId, double> b;
  switch (cfg.linearization) {
    case LinearizationMode::FixedPoint:
      b = fixed_point_b(ctx, weights_from_efforts(scn, active, effort, {}, scaling), effort,
                        rll_rows);
      break;
    case LinearizationMode::PreviousRate:
      for (std::size_t r : rll_rows) {
        const auto& rll = scn.slices[active[r].slice].rll();
        const auto it = state.previous_rate.find(active[r].id);
        b[active[r].id] =
            linearization_coeff(rll, it == state.previous_rate.end() ? rll.arrival_bps : it->second);
      }
      break;
    case LinearizationMode::TargetRate:
      for (std::size_t r : rll_rows) {
        const auto& rll = scn.slices[active[r].slice].rll();
        const double tail = (1.0 - rll.reliability) * (1.0 - cfg.reliability_margin);
        b[active[r].id] = linearization_coeff(
            rll, required_service_rate(rll.arrival_bps, rll.mean_packet_bits, rll.d_max_s, tail));
      }
      break;
  }

  auto weights = weights_from_efforts(scn, active, effort, b, scaling);
  auto dec = allocate(ctx, weights);

  if (cfg.power_cap_w && dec.total_power_w() > *cfg.power_cap_w) {
    // Scale every weight by s in (0, 1] until the slot fits under the cap.
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      WeightVector scaled = weights;
      for (auto& [_, w] : scaled) w *= mid;
      if (allocate(ctx, scaled).total_power_w() > *cfg.power_cap_w) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    for (auto& [_, w] : weights) w *= lo;
    dec = allocate(ctx, weights);
  }

  SlotMetrics m;
  m.slot = t;
  m.total_power_w = dec.total_power_w();
  for (const auto& u : scn.users) {
    m.rate_bps[u.id] = 0.0;
    m.lambda[u.id] = 0.0;
  }
  std::map<std::string, int> counts;
  for (const auto& s : scn.slices) {
    m.served_bps[s.id] = 0.0;
    counts[s.id] = 0;
  }

  std::map<UserId, double> y;
  for (std::size_t i = 0; i < active.size(); ++i) {
    const auto& u = active[i];
    const auto& spec = scn.slices[u.slice];
    const double rate = dec.rates_bps[i];
    const double served = std::min(rate, demand[i]);
    m.rate_bps[u.id] = rate;
    m.lambda[u.id] = weights[u.id];
    m.served_bps[spec.id] += served;
    ++counts[spec.id];
    if (spec.is_rll()) {
      const auto& rll = spec.rll();
      const double tail =
          analytic_violation_prob({rate, rll.arrival_bps, rll.mean_packet_bits, rll.d_max_s}).value;
      m.tail[u.id] = tail;
      y[u.id] = compute_y(rll, rate, cfg.reliability_margin);
      state.tail_sum[u.id] += tail;
      ++state.active_slots[u.id];
      state.previous_rate[u.id] = rate;
      if (weights[u.id] > 0.0) {
        const auto e = effort.find(u.id);
        const double target = e->second * linearization_coeff(rll, rate) / cfg.v;
        m.fixed_point_residual =
            std::max(m.fixed_point_residual, std::abs(std::log(weights[u.id] / target)));
      }
    }
  }
  for (const auto& s : scn.slices) {
    m.mean_user_rate_bps[s.id] = counts[s.id] > 0 ? m.served_bps[s.id] / counts[s.id] : 0.0;
  }
  for (const auto& [id, n] : state.active_slots) {
    m.user_reliability[id] = 1.0 - state.tail_sum[id] / n;
  }
  for (std::size_t si = 0; si < scn.slices.size(); ++si) {
    const auto& s = scn.slices[si];
    if (!s.is_rll()) continue;
    m.admission[s.id] = admission_flag(scn, s.id, t);
    double worst = 1.0;
    bool any = false;
    for (const auto& u : scn.users) {
      if (u.slice != si) continue;
      if (const auto it = m.user_reliability.find(u.id); it != m.user_reliability.end()) {
        worst = std::min(worst, it->second);
        any = true;
      }
    }
    if (any) m.reliability[s.id] = worst;
  }

  // Virtual queues.
  std::map<std::string, CapacityTarget> targets;
  for (const auto& s : scn.slices) {
    if (!s.is_self_managed()) continue;
    const double c = s.self_managed().capacity_bps;
    targets[s.id] = {opt.isolation ? c : offered_load_bps(scn, s.id, t),
                     cfg.f_clamp_multiplier * c * dt};
  }
  m.y = y;
  const auto next = update_queues(state.queues, m.served_bps, y, targets, dt);
  m.drift = drift_diag(state.queues, next, m.served_bps, y, targets, dt);
  state.queues = next;
  m.queues = next;

  state.pending_errors.clear();
  for (const auto& [slice, target] : targets) {
    state.pending_errors[slice] = (target.target_bps - m.served_bps[slice]) * dt;
  }
  for (const auto& [id, yi] : y) state.pending_errors[id] = yi;
  return m;
}

RunResult run_simulation(const Scenario& scn, const ControllerConfig& cfg,
                         const EngineOptions& opt) {
  RunResult r{scn, cfg, opt, {}, {}};
  r.slots.reserve(static_cast<std::size_t>(scn.horizon_slots));
  auto state = initial_state(scn, cfg);
  for (int t = 0; t < scn.horizon_slots; ++t) r.slots.push_back(step(scn, cfg, opt, state, t));
  r.summary = summarize(r, std::min(opt.warmup_slots, scn.horizon_slots), scn.horizon_slots);
  return r;
}

RunResult run_simulation(const RunConfig& rc) {
  return run_simulation(rc.scenario, rc.controller, rc.engine);
}

RunResult no_isolation_baseline(const Scenario& scn, const ControllerConfig& cfg,
                                EngineOptions opt) {
  opt.isolation = false;
  return run_simulation(scn, cfg, opt);
}

RunSummary summarize(const RunResult& r, int begin, int end) {
  RunSummary s;
  s.window_begin = begin;
  s.window_end = end;
  for (const auto& m : r.slots) {
    s.drift_inequality_held = s.drift_inequality_held && m.drift.inequality_holds();
    for (const auto& [_, g] : m.queues.g) s.g_nonnegative = s.g_nonnegative && g >= 0.0;
  }
  const int n = end - begin;
  if (n > 0) {
    for (int t = begin; t < end; ++t) {
      const auto& m = r.slots[static_cast<std::size_t>(t)];
      s.mean_power_w += m.total_power_w / n;
      for (const auto& [id, v] : m.served_bps) s.mean_served_bps[id] += v / n;
      for (const auto& [id, v] : m.mean_user_rate_bps) s.mean_user_rate_bps[id] += v / n;
    }
  }
  if (!r.slots.empty()) {
    s.final_reliability = r.slots.back().reliability;
    s.stability = stability_metrics(r.slots.back().queues);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Isolation

IsolationReport isolation_report(const RunResult& r) {
  const auto& scn = r.scenario;
  if (scn.events.empty()) throw std::invalid_argument("isolation needs at least one event");
  IsolationReport rep;
  rep.event_slot = scn.events.front().slot;
  rep.window = r.engine.isolation_window;
  const int horizon = static_cast<int>(r.slots.size());
  const int pre_begin = std::max(0, rep.event_slot - rep.window);
  const int post_end = std::min(horizon, rep.event_slot + rep.window);
  if (rep.event_slot <= pre_begin || post_end <= rep.event_slot) {
    throw std::invalid_argument("event leaves no room for comparison windows");
  }

  for (const auto& s : scn.slices) {
    IsolationRow row;
    row.slice = s.id;
    row.perturbed = s.id == scn.events.front().slice;
    row.metric = s.is_self_managed() ? "mean_user_rate" : "served";
    auto value = [&](int t) {
      const auto& m = r.slots[static_cast<std::size_t>(t)];
      return s.is_self_managed() ? m.mean_user_rate_bps.at(s.id) : m.served_bps.at(s.id);
    };
    for (int t = pre_begin; t < rep.event_slot; ++t) row.pre_mean += value(t);
    row.pre_mean /= rep.event_slot - pre_begin;
    for (int t = rep.event_slot; t < post_end; ++t) row.post_mean += value(t);
    row.post_mean /= post_end - rep.event_slot;
    row.relative_change =
        row.pre_mean != 0.0 ? (row.post_mean - row.pre_mean) / row.pre_mean : 0.0;

    constexpr int kSmooth = 10;
    for (int t = rep.event_slot; t < post_end; ++t) {
      const int from = std::max(0, t - kSmooth + 1);
      double avg = 0.0;
      for (int k = from; k <= t; ++k) avg += value(k);
      avg /= t - from + 1;
      const double dev = row.pre_mean != 0.0 ? std::abs(avg - row.pre_mean) / row.pre_mean : 0.0;
      row.max_excursion = std::max(row.max_excursion, dev);
      if (dev > 0.05) ++row.excursion_slots;
    }
    rep.rows.push_back(row);
  }
  return rep;
}

IsolationReport isolation_experiment(const Scenario& scn, const ControllerConfig& cfg,
                                     const EngineOptions& opt) {
  if (scn.events.empty()) throw std::invalid_argument("isolation needs at least one event");
  return isolation_report(run_simulation(scn, cfg, opt));
}

}  // namespace slicing
