#include "slicing/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "slicing/traffic.hpp"

namespace slicing {

QueueState initial_queues(const Scenario& scn) {
  QueueState qs;
  for (const auto& s : scn.slices) {
    if (s.is_self_managed()) qs.f[s.id] = 0.0;
  }
  for (const auto& u : scn.users) {
    if (scn.slices[u.slice].is_rll()) qs.g[u.id] = 0.0;
  }
  return qs;
}

double compute_y(const Rll& rll, double served_bps, double margin) {
  const auto tail =
      analytic_violation_prob({served_bps, rll.arrival_bps, rll.mean_packet_bits, rll.d_max_s});
  return tail.value - (1.0 - rll.reliability) * (1.0 - margin);
}

QueueState update_queues(const QueueState& qs, const std::map<std::string, double>& served_bps,
                         const std::map<UserId, double>& y,
                         const std::map<std::string, CapacityTarget>& targets, double dt) {
  QueueState next = qs;
  for (auto& [slice, f] : next.f) {
    const auto s = served_bps.find(slice);
    const auto c = targets.find(slice);
    if (s == served_bps.end()) throw std::invalid_argument("no served rate for slice " + slice);
    if (c == targets.end()) throw std::invalid_argument("no capacity target for slice " + slice);
    if (!(s->second >= 0.0)) throw std::invalid_argument("negative served rate for " + slice);
    f = std::max(f + (s->second - c->second.target_bps) * dt, -c->second.clamp_bits);
  }
  for (auto& [user, g] : next.g) {
    const auto it = y.find(user);
    if (it == y.end()) continue;  // inactive this slot
    g = std::max(g + it->second, 0.0);
  }
  ++next.slot;
  return next;
}

TelescopingResult telescoping_check(const std::vector<double>& served_bps, double target_bps,
                                    double dt, const std::vector<double>& f) {
  if (f.size() != served_bps.size() + 1) {
    throw std::invalid_argument("queue trajectory must have one more entry than served");
  }
  TelescopingResult out;
  double sum = 0.0;
  double scale = std::max(std::abs(f.front()), std::abs(f.back()));
  for (std::size_t i = 0; i < served_bps.size(); ++i) {
    const double x = (served_bps[i] - target_bps) * dt;
    // A clamped step is the only way f can differ from f + x.
    if (f[i + 1] != f[i] + x) return out;
    sum += x;
    scale = std::max(scale, std::abs(sum));
  }
  out.applicable = true;
  out.residual = std::abs(sum - (f.back() - f.front()));
  out.relative = scale > 0.0 ? out.residual / scale : out.residual;
  return out;
}

std::map<std::string, double> stability_metrics(const QueueState& qs) {
  if (qs.slot < 1) throw std::invalid_argument("stability metrics need t >= 1");
  std::map<std::string, double> out;
  const double t = qs.slot;
  for (const auto& [slice, f] : qs.f) out[slice] = f / t;
  for (const auto& [user, g] : qs.g) out["user:" + std::to_string(user.value)] = g / t;
  return out;
}

double lyapunov_value(const QueueState& qs) {
  double l = 0.0;
  for (const auto& [_, f] : qs.f) l += 0.5 * f * f;
  for (const auto& [_, g] : qs.g) l += 0.5 * g * g;
  return l;
}

bool DriftDiag::inequality_holds() const {
  // Rounding in the squares is relative to the magnitudes involved.
  const double slack = 1e-9 * (std::abs(lyapunov_value) + std::abs(bound_term) +
                               std::abs(cross_term) + std::abs(drift)) +
                       1e-300;
  return drift <= bound_term + cross_term + slack;
}

DriftDiag drift_diag(const QueueState& qs, const QueueState& next,
                     const std::map<std::string, double>& served_bps,
                     const std::map<UserId, double>& y,
                     const std::map<std::string, CapacityTarget>& targets, double dt) {
  DriftDiag d;
  d.lyapunov_value = lyapunov_value(qs);
  d.drift = lyapunov_value(next) - d.lyapunov_value;
  for (const auto& [slice, f] : qs.f) {
    const double x = (served_bps.at(slice) - targets.at(slice).target_bps) * dt;
    d.bound_term += 0.5 * x * x;
    d.cross_term += x * f;
  }
  for (const auto& [user, g] : qs.g) {
    const auto it = y.find(user);
    if (it == y.end()) continue;
    d.bound_term += 0.5 * it->second * it->second;
    d.cross_term += it->second * g;
  }
  return d;
}

}  // namespace slicing
