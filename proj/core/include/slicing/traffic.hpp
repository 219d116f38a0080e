#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "slicing/scenario.hpp"

namespace slicing {

/// One user's M/M/1 packet queue at the base station.
struct Mm1Params {
  double service_bps = 0.0;
  double arrival_bps = 0.0;
  double mean_packet_bits = 0.0;
  double d_max_s = 0.0;
};

struct TailProbability {
  double value = 1.0;
  bool unstable = false;
};

/// P{sojourn > d_max} = exp(-(r - a) * d_max / L). Returns {1, unstable}
/// when service does not exceed arrivals.
TailProbability analytic_violation_prob(const Mm1Params& q);

/// Smallest service rate whose tail is at most `tail`:
/// a + L * ln(1 / tail) / d_max.
double required_service_rate(double arrival_bps, double mean_packet_bits, double d_max_s,
                             double tail);

/// Event-driven FIFO simulation (Lindley recursion). Returns the fraction of
/// n_packets whose sojourn time exceeds d_max_s. Requires n_packets >= 1e4
/// and a stable queue; throws std::invalid_argument otherwise.
double simulate_mm1_tail(const Mm1Params& q, std::int64_t n_packets, std::mt19937_64& rng);

/// Aggregate offered load of a slice at slot t: N_s(t) * a_s for RLL,
/// N_s(t) * per_user_demand for self-managed.
double offered_load_bps(const Scenario& scn, std::string_view slice_id, int t);

}  // namespace slicing
