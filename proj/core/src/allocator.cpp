#include "slicing/allocator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <tuple>

namespace slicing {

namespace {

std::vector<double> weights_by_row(const WeightVector& weights, const ChannelMatrix& ch) {
  std::vector<double> out(ch.users.size(), 0.0);
  for (std::size_t i = 0; i < ch.users.size(); ++i) {
    if (const auto it = weights.find(ch.users[i]); it != weights.end()) out[i] = it->second;
  }
  return out;
}

AllocationDecision empty_decision(const ChannelMatrix& ch) {
  return {Matrix<std::uint8_t>(ch.gains.rows(), ch.gains.cols()),
          Matrix<double>(ch.gains.rows(), ch.gains.cols()),
          std::vector<double>(ch.gains.rows(), 0.0)};
}

double prb_rate(double p, double h, double sigma_n2, double b_prb) {
  return b_prb * std::log2(1.0 + p * h / sigma_n2);
}

}  // namespace

double AllocationDecision::total_power_w() const {
  double total = 0.0;
  for (double p : power_w.data()) total += p;
  return total;
}

std::vector<double> rate_of_allocation(const AllocationDecision& dec, const ChannelMatrix& ch,
                                       const PhyParams& phy) {
  if (dec.rho.rows() != ch.gains.rows() || dec.rho.cols() != ch.gains.cols() ||
      dec.power_w.rows() != ch.gains.rows() || dec.power_w.cols() != ch.gains.cols()) {
    throw std::invalid_argument("allocation and channel dimensions differ");
  }
  const double sigma = noise_power_w(phy);
  const double b = phy.prb_bandwidth_hz();
  std::vector<double> rates(ch.gains.rows(), 0.0);
  for (std::size_t i = 0; i < ch.gains.rows(); ++i) {
    for (std::size_t j = 0; j < ch.gains.cols(); ++j) {
      if (dec.rho(i, j)) rates[i] += prb_rate(dec.power_w(i, j), ch.gains(i, j), sigma, b);
    }
  }
  return rates;
}

PrbOptimum optimal_power_on_prb(double lambda, double h, double sigma_n2, double b_prb) {
  const double p = std::max(0.0, lambda * b_prb / std::numbers::ln2 - sigma_n2 / h);
  if (p == 0.0) return {};
  const double r = prb_rate(p, h, sigma_n2, b_prb);
  return {p, r, std::min(p - lambda * r, 0.0)};
}

AllocationDecision slot_allocate(const WeightVector& weights, const ChannelMatrix& ch,
                                 const PhyParams& phy) {
  const double sigma = noise_power_w(phy);
  const double b = phy.prb_bandwidth_hz();
  const auto lambda = weights_by_row(weights, ch);
  auto dec = empty_decision(ch);
  for (std::size_t j = 0; j < ch.gains.cols(); ++j) {
    std::size_t best = 0;
    PrbOptimum best_opt;
    for (std::size_t i = 0; i < ch.gains.rows(); ++i) {
      const auto opt = optimal_power_on_prb(lambda[i], ch.gains(i, j), sigma, b);
      if (opt.delta < best_opt.delta) {
        best = i;
        best_opt = opt;
      }
    }
    if (best_opt.delta < 0.0) {
      dec.rho(best, j) = 1;
      dec.power_w(best, j) = best_opt.power_w;
      dec.rates_bps[best] += best_opt.rate_bps;
    }
  }
  return dec;
}

AllocationDecision brute_force_oracle(const WeightVector& weights, const ChannelMatrix& ch,
                                      const PhyParams& phy, const std::vector<double>& power_grid) {
  const std::size_t n = ch.gains.rows();
  const std::size_t k = ch.gains.cols();
  if (n > 4 || k > 4) throw std::invalid_argument("brute force is limited to 4 users x 4 PRBs");
  if (power_grid.empty()) throw std::invalid_argument("empty power grid");
  const double sigma = noise_power_w(phy);
  const double b = phy.prb_bandwidth_hz();
  const auto lambda = weights_by_row(weights, ch);

  // Owner code n means the PRB is left empty.
  std::vector<std::size_t> owner(k, 0);
  std::vector<std::size_t> best_owner(k, n);
  std::vector<double> best_power(k, 0.0);
  double best_value = 0.0;

  std::vector<double> power(k, 0.0);
  while (true) {
    // Grid-minimize each PRB for the current assignment.
    double value = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      power[j] = 0.0;
      if (owner[j] == n) continue;
      const std::size_t i = owner[j];
      double best_term = std::numeric_limits<double>::infinity();
      for (double p : power_grid) {
        const double term = p - lambda[i] * prb_rate(p, ch.gains(i, j), sigma, b);
        if (term < best_term) {
          best_term = term;
          power[j] = p;
        }
      }
      value += best_term;
    }
    if (value < best_value) {
      best_value = value;
      best_owner = owner;
      best_power = power;
    }
    std::size_t pos = 0;
    while (pos < k && ++owner[pos] > n) owner[pos++] = 0;
    if (pos == k) break;
  }

  auto dec = empty_decision(ch);
  for (std::size_t j = 0; j < k; ++j) {
    if (best_owner[j] == n || best_power[j] == 0.0) continue;
    const std::size_t i = best_owner[j];
    dec.rho(i, j) = 1;
    dec.power_w(i, j) = best_power[j];
    dec.rates_bps[i] += prb_rate(best_power[j], ch.gains(i, j), sigma, b);
  }
  return dec;
}

AllocationDecision demand_capped_allocate(const WeightVector& weights, const ChannelMatrix& ch,
                                          const PhyParams& phy,
                                          const std::vector<double>& demand_bps) {
  const std::size_t n = ch.gains.rows();
  const std::size_t k = ch.gains.cols();
  if (demand_bps.size() != n) throw std::invalid_argument("one demand per channel row required");
  const double sigma = noise_power_w(phy);
  const double b = phy.prb_bandwidth_hz();
  const auto lambda = weights_by_row(weights, ch);

  struct Candidate {
    double delta;
    std::size_t i, j;
    PrbOptimum opt;
  };
  std::vector<Candidate> cand;
  cand.reserve(n * k);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(lambda[i] > 0.0) || !(demand_bps[i] > 0.0)) continue;
    for (std::size_t j = 0; j < k; ++j) {
      const auto opt = optimal_power_on_prb(lambda[i], ch.gains(i, j), sigma, b);
      if (opt.delta < 0.0) cand.push_back({opt.delta, i, j, opt});
    }
  }
  std::sort(cand.begin(), cand.end(), [](const Candidate& x, const Candidate& y) {
    return std::tie(x.delta, x.i, x.j) < std::tie(y.delta, y.i, y.j);
  });

  auto dec = empty_decision(ch);
  std::vector<bool> taken(k, false);
  for (const auto& c : cand) {
    if (taken[c.j]) continue;
    const double remaining = demand_bps[c.i] - dec.rates_bps[c.i];
    if (std::isfinite(remaining) && !(remaining > 1e-9 * demand_bps[c.i])) continue;
    double p = c.opt.power_w;
    double r = c.opt.rate_bps;
    if (r > remaining) {
      p = std::expm1(remaining / b * std::numbers::ln2) * sigma / ch.gains(c.i, c.j);
      r = prb_rate(p, ch.gains(c.i, c.j), sigma, b);
    }
    taken[c.j] = true;
    dec.rho(c.i, c.j) = 1;
    dec.power_w(c.i, c.j) = p;
    dec.rates_bps[c.i] += r;
  }
  return dec;
}

double objective(const AllocationDecision& dec, const WeightVector& weights,
                 const ChannelMatrix& ch) {
  const auto lambda = weights_by_row(weights, ch);
  double value = dec.total_power_w();
  for (std::size_t i = 0; i < dec.rates_bps.size(); ++i) value -= lambda[i] * dec.rates_bps[i];
  return value;
}

}  // namespace slicing
