#pragma once

#include <limits>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "slicing/lyapunov.hpp"
#include "slicing/scenario.hpp"

namespace slicing {

/// A control signal is either a self-managed slice (by id) or an RLL user.
using SignalId = std::variant<std::string, UserId>;
using Signals = std::map<SignalId, double>;

/// Per-user rate price lambda_i, in W per bit/s.
using WeightVector = std::map<UserId, double>;

struct WeightScaling {
  double v = 1.0;               // penalty weight on power
  double capacity_price = 1.0;  // W per bit/s, per bit of capacity backlog
};

/// The drift-plus-penalty control effort: -F_s for slices, G_i for users.
Signals dpp_efforts(const QueueState& qs);

/// Maps efforts to user weights. Users of a self-managed slice share
/// capacity_price * u_s / v; RLL user i gets max(b_i * u_i / v, 0).
/// Users without an effort or (for RLL) a b entry get weight 0.
WeightVector weights_from_efforts(const Scenario& scn, const std::vector<UserState>& active,
                                  const Signals& effort, const std::map<UserId, double>& b,
                                  const WeightScaling& scaling);

WeightVector dpp_weights(const Scenario& scn, const std::vector<UserState>& active,
                         const QueueState& qs, const std::map<UserId, double>& b,
                         const WeightScaling& scaling);

/// |dy/dr| = (D/L) exp(-(r - a) D / L), with r floored at a.
double linearization_coeff(const Rll& rll, double operating_rate_bps);

enum class ControllerKind { DriftPlusPenalty, Pid };

/// Gains act on per-slot errors, so ki = 1 integrates exactly like the
/// virtual queues do.
struct PidGains {
  double kp = 0.5;
  double ki = 1.0;
  double kd = 0.1;
  friend bool operator==(const PidGains&, const PidGains&) = default;
};

/// Integrator limits (anti-windup).
struct Bounds {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
};

struct ControllerState {
  ControllerKind kind = ControllerKind::DriftPlusPenalty;
  PidGains gains;
  Signals integrator;
  Signals prev_error;
};

struct PidStep {
  Signals effort;
  ControllerState state;
};

/// u = kp e + ki I + kd (e - e_prev) with I <- clamp(I + e, bounds).
/// Zero gains contribute nothing, not even a signed zero. A missing
/// previous error counts as 0.
PidStep pid_update(const ControllerState& st, const Signals& errors,
                   const std::map<SignalId, Bounds>& bounds);

/// pid_update followed by weights_from_efforts.
std::pair<WeightVector, ControllerState> pid_weights(
    const Scenario& scn, const std::vector<UserState>& active, const ControllerState& st,
    const Signals& errors, const std::map<SignalId, Bounds>& bounds,
    const std::map<UserId, double>& b, const WeightScaling& scaling);

}  // namespace slicing
