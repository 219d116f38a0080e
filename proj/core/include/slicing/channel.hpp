#pragma once

#include <vector>

#include "slicing/scenario.hpp"
#include "slicing/types.hpp"

namespace slicing {

inline constexpr double kSpeedOfLight = 299'792'458.0;

/// Large-scale power gain G0 * d^-gamma with a free-space intercept at 1 m.
/// Throws std::invalid_argument for distances below 1 m.
double path_loss_gain(double distance_m, const PhyParams& phy);

/// Noise power over one PRB, in watts.
double noise_power_w(const PhyParams& phy);

struct ChannelMatrix {
  int slot = 0;
  std::vector<UserId> users;  // row order
  Matrix<double> gains;       // users x PRBs
};

/// Path loss times unit-mean exponential fading, i.i.d. per (user, PRB,
/// slot). Each user's row is drawn from its own stream keyed by
/// (seed, slot, user id), so a row never depends on who else is active.
ChannelMatrix sample_channel(const Scenario& scn, const std::vector<UserState>& users, int t);

/// Same, for the users active at slot t.
ChannelMatrix sample_channel(const Scenario& scn, int t);

}  // namespace slicing
