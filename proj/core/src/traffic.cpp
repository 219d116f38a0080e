#include "slicing/traffic.hpp"

#include <cmath>
#include <stdexcept>

namespace slicing {

TailProbability analytic_violation_prob(const Mm1Params& q) {
  if (!(q.service_bps > q.arrival_bps)) return {1.0, true};
  return {std::exp(-(q.service_bps - q.arrival_bps) * q.d_max_s / q.mean_packet_bits), false};
}

double required_service_rate(double arrival_bps, double mean_packet_bits, double d_max_s,
                             double tail) {
  if (!(tail > 0.0 && tail <= 1.0)) throw std::invalid_argument("tail must lie in (0, 1]");
  return arrival_bps + mean_packet_bits * std::log(1.0 / tail) / d_max_s;
}

double simulate_mm1_tail(const Mm1Params& q, std::int64_t n_packets, std::mt19937_64& rng) {
  if (n_packets < 10'000) throw std::invalid_argument("n_packets must be >= 1e4");
  if (!(q.service_bps > q.arrival_bps)) throw std::invalid_argument("unstable queue");
  std::exponential_distribution<double> interarrival(q.arrival_bps / q.mean_packet_bits);
  std::exponential_distribution<double> service(q.service_bps / q.mean_packet_bits);
  double wait = 0.0;  // queueing delay of the current packet
  std::int64_t late = 0;
  for (std::int64_t n = 0; n < n_packets; ++n) {
    const double s = service(rng);
    if (wait + s > q.d_max_s) ++late;
    const double gap = interarrival(rng);
    wait = std::max(0.0, wait + s - gap);
  }
  return static_cast<double>(late) / static_cast<double>(n_packets);
}

double offered_load_bps(const Scenario& scn, std::string_view slice_id, int t) {
  const auto idx = scn.slice_index(slice_id);
  const auto& spec = scn.slices[idx];
  const double n = active_count(scn, idx, t);
  return spec.is_rll() ? n * spec.rll().arrival_bps : n * spec.self_managed().per_user_demand_bps;
}

}  // namespace slicing
