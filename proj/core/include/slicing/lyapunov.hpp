#pragma once

#include <map>
#include <string>
#include <vector>

#include "slicing/scenario.hpp"
#include "slicing/types.hpp"

namespace slicing {

/// Virtual queues. f is in bits and signed; g is dimensionless and >= 0.
struct QueueState {
  std::map<std::string, double> f;
  std::map<UserId, double> g;
  int slot = 0;
  friend bool operator==(const QueueState&, const QueueState&) = default;
};

/// Zero queues for every self-managed slice and every RLL user.
QueueState initial_queues(const Scenario& scn);

/// tail(served) - (1 - reliability) * (1 - margin). `margin` tightens the
/// target so the finite-horizon average lands on the safe side. An
/// unstable queue contributes the largest value.
double compute_y(const Rll& rll, double served_bps, double margin = 0.0);

/// What F integrates against, and its anti-windup floor.
struct CapacityTarget {
  double target_bps = 0.0;
  double clamp_bits = 0.0;  // F >= -clamp_bits
};

/// F_s <- max(F_s + (served_s - target_s) * dt, -clamp_s);
/// G_i <- max(G_i + y_i, 0). Throws std::invalid_argument when a queue has
/// no matching served/target entry or a served rate is negative.
QueueState update_queues(const QueueState& qs, const std::map<std::string, double>& served_bps,
                         const std::map<UserId, double>& y,
                         const std::map<std::string, CapacityTarget>& targets, double dt);

struct TelescopingResult {
  bool applicable = false;  // false when the clamp engaged inside the window
  double residual = 0.0;    // |sum (served - C) dt - (F_end - F_start)|
  double relative = 0.0;    // residual / max(sum |(served - C) dt|, |F_end|, |F_start|)
};

/// `f` has one more entry than `served_bps` (queue before and after each
/// slot).
TelescopingResult telescoping_check(const std::vector<double>& served_bps, double target_bps,
                                    double dt, const std::vector<double>& f);

/// F_s(t) / t and G_i(t) / t. Keys are slice ids and "user:<id>".
std::map<std::string, double> stability_metrics(const QueueState& qs);

struct DriftDiag {
  double lyapunov_value = 0.0;  // at the earlier state
  double drift = 0.0;
  double bound_term = 0.0;
  double cross_term = 0.0;  // sum (served - C) dt F + sum y G

  /// drift <= bound_term + cross_term, up to rounding.
  bool inequality_holds() const;
};

double lyapunov_value(const QueueState& qs);

DriftDiag drift_diag(const QueueState& qs, const QueueState& next,
                     const std::map<std::string, double>& served_bps,
                     const std::map<UserId, double>& y,
                     const std::map<std::string, CapacityTarget>& targets, double dt);

}  // namespace slicing
