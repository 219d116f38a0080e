#include "slicing/controller.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace slicing {

Signals dpp_efforts(const QueueState& qs) {
  Signals u;
  for (const auto& [slice, f] : qs.f) u[slice] = 0.0 - f;
  for (const auto& [user, g] : qs.g) u[user] = g;
  return u;
}

WeightVector weights_from_efforts(const Scenario& scn, const std::vector<UserState>& active,
                                  const Signals& effort, const std::map<UserId, double>& b,
                                  const WeightScaling& scaling) {
  WeightVector w;
  for (const auto& u : active) {
    const auto& spec = scn.slices[u.slice];
    double lambda = 0.0;
    if (spec.is_self_managed()) {
      if (const auto it = effort.find(spec.id); it != effort.end()) {
        lambda = scaling.capacity_price * it->second / scaling.v;
      }
    } else {
      const auto e = effort.find(u.id);
      const auto bi = b.find(u.id);
      if (e != effort.end() && bi != b.end()) {
        lambda = std::max(bi->second * e->second / scaling.v, 0.0);
      }
    }
    w[u.id] = lambda;
  }
  return w;
}

WeightVector dpp_weights(const Scenario& scn, const std::vector<UserState>& active,
                         const QueueState& qs, const std::map<UserId, double>& b,
                         const WeightScaling& scaling) {
  return weights_from_efforts(scn, active, dpp_efforts(qs), b, scaling);
}

double linearization_coeff(const Rll& rll, double operating_rate_bps) {
  const double c = rll.d_max_s / rll.mean_packet_bits;
  return c * std::exp(-std::max(operating_rate_bps - rll.arrival_bps, 0.0) * c);
}

PidStep pid_update(const ControllerState& st, const Signals& errors,
                   const std::map<SignalId, Bounds>& bounds) {
  PidStep out{{}, st};
  const auto& g = st.gains;
  for (const auto& [id, e] : errors) {
    double integ = out.state.integrator[id] + e;
    if (const auto it = bounds.find(id); it != bounds.end()) {
      integ = std::min(integ, it->second.hi);
      integ = std::max(integ, it->second.lo);
    }
    out.state.integrator[id] = integ;

    const auto prev = st.prev_error.find(id);
    const double e_prev = prev == st.prev_error.end() ? 0.0 : prev->second;
    double u = g.ki == 0.0 ? 0.0 : g.ki * integ;
    if (g.kp != 0.0) u += g.kp * e;
    if (g.kd != 0.0) u += g.kd * (e - e_prev);
    out.effort[id] = u;
    out.state.prev_error[id] = e;
  }
  return out;
}

std::pair<WeightVector, ControllerState> pid_weights(
    const Scenario& scn, const std::vector<UserState>& active, const ControllerState& st,
    const Signals& errors, const std::map<SignalId, Bounds>& bounds,
    const std::map<UserId, double>& b, const WeightScaling& scaling) {
  auto step = pid_update(st, errors, bounds);
  return {weights_from_efforts(scn, active, step.effort, b, scaling), std::move(step.state)};
}

}  // namespace slicing
