#pragma once

#include <cstdint>
#include <vector>

#include "slicing/channel.hpp"
#include "slicing/controller.hpp"
#include "slicing/scenario.hpp"
#include "slicing/types.hpp"

namespace slicing {

/// Rows follow ChannelMatrix::users; columns are PRBs.
struct AllocationDecision {
  Matrix<std::uint8_t> rho;
  Matrix<double> power_w;
  std::vector<double> rates_bps;

  double total_power_w() const;
};

/// B * sum_j rho_ij log2(1 + p_ij h_ij / sigma^2). Throws
/// std::invalid_argument on a dimension mismatch.
std::vector<double> rate_of_allocation(const AllocationDecision& dec, const ChannelMatrix& ch,
                                       const PhyParams& phy);

struct PrbOptimum {
  double power_w = 0.0;
  double rate_bps = 0.0;
  double delta = 0.0;  // power - lambda * rate, never positive
};

/// Minimizes p - lambda * B log2(1 + p h / sigma^2) over p >= 0.
PrbOptimum optimal_power_on_prb(double lambda, double h, double sigma_n2, double b_prb);

/// Per PRB, the user with the most negative delta takes it (lowest row on
/// ties); a PRB nobody profits from stays empty. Exact optimum of
/// sum p - sum lambda r.
AllocationDecision slot_allocate(const WeightVector& weights, const ChannelMatrix& ch,
                                 const PhyParams& phy);

/// Exhaustive search over every assignment of PRBs to users (or to nobody)
/// and every grid power. N and K must not exceed 4.
AllocationDecision brute_force_oracle(const WeightVector& weights, const ChannelMatrix& ch,
                                      const PhyParams& phy, const std::vector<double>& power_grid);

/// Greedy over (user, PRB) pairs in ascending delta (then row, then PRB).
/// A pair is taken when the PRB is free and the user still has unmet
/// demand; the last PRB of a user gets only the power its remaining demand
/// needs. With infinite demands this is slot_allocate.
AllocationDecision demand_capped_allocate(const WeightVector& weights, const ChannelMatrix& ch,
                                          const PhyParams& phy,
                                          const std::vector<double>& demand_bps);

/// sum p - sum lambda_i r_i.
double objective(const AllocationDecision& dec, const WeightVector& weights,
                 const ChannelMatrix& ch);

}  // namespace slicing
