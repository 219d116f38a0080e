#include "slicing/channel.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace slicing {

double path_loss_gain(double distance_m, const PhyParams& phy) {
  if (!(distance_m >= 1.0)) {
    throw std::invalid_argument("distance below the 1 m reference");
  }
  const double g0 = std::pow(kSpeedOfLight / (4.0 * std::numbers::pi * phy.carrier_freq_hz), 2);
  return g0 * std::pow(distance_m, -phy.pathloss_exponent);
}

double noise_power_w(const PhyParams& phy) {
  return std::pow(10.0, (phy.noise_psd_dbm_hz - 30.0) / 10.0) * phy.prb_bandwidth_hz();
}

ChannelMatrix sample_channel(const Scenario& scn, const std::vector<UserState>& users, int t) {
  const auto k = static_cast<std::size_t>(scn.phy.num_prbs);
  ChannelMatrix ch{t, {}, Matrix<double>(users.size(), k)};
  ch.users.reserve(users.size());
  std::exponential_distribution<double> fading(1.0);
  for (std::size_t i = 0; i < users.size(); ++i) {
    ch.users.push_back(users[i].id);
    const double pl = path_loss_gain(users[i].distance_m, scn.phy);
    auto rng = make_stream(scn.rng_seed, StreamPurpose::Fading, static_cast<std::uint64_t>(t),
                           static_cast<std::uint64_t>(users[i].id.value));
    for (std::size_t j = 0; j < k; ++j) {
      double x = fading(rng);
      // Exp(1) can return exactly 0 with vanishing probability.
      while (!(x > 0.0)) x = fading(rng);
      ch.gains(i, j) = pl * x;
    }
  }
  return ch;
}

ChannelMatrix sample_channel(const Scenario& scn, int t) {
  return sample_channel(scn, active_users(scn, t), t);
}

}  // namespace slicing
