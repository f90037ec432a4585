#pragma once
// Channel sampling and interference-profile bookkeeping.
//
// Randomness is counter-based: every complex channel entry is a pure
// function of (seed, sample index, entry index), so parallel Monte Carlo is
// reproducible regardless of thread schedule.

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <vector>

#include "relaycap/specfun.hpp"  // DomainError / NumericError

namespace relaycap::channel {

// One operating point: antenna/interferer counts and the linear SNR ratios.
// Noise power is normalized to 1 throughout, so only ratios enter.
struct SystemConfig {
  int N = 1;                  // relay antennas
  int M = 0;                  // co-channel interferers
  double rho1 = 1.0;          // first-hop SNR  (source power / noise)
  double rho2 = 1.0;          // second-hop SNR (relay power / noise)
  std::vector<double> rhoI;   // per-interferer INRs, length M

  void validate() const;      // throws DomainError
  bool equal_interference() const;  // all rhoI identical (vacuously true for M=0)
};

// One fading draw: source->relay vector, relay->destination vector, and the
// interferer->relay matrix, all i.i.d. complex normal with unit variance.
struct ChannelRealization {
  Eigen::VectorXcd h1;   // N
  Eigen::VectorXcd h2;   // N
  Eigen::MatrixXcd HI;   // N x M
};

// Interference power profile: distinct INR values in decreasing order with
// multiplicities, plus the partial-fraction table chi such that
//   prod_l (1 + rho_l s)^{-tau_l} = sum_{i, 1<=j<=tau_i} chi[i][j-1] (1 + rho_i s)^{-j}.
struct InterferenceProfile {
  std::vector<double> rhoI;          // original diagonal of D
  std::vector<double> distinct;      // decreasing
  std::vector<int> multiplicity;     // tau_i, sums to M
  std::vector<std::vector<double>> chi;  // chi[i][j-1]
  double residual = 0.0;             // max relative reconstruction error seen

  double chi_sum() const;            // equals 1 (the s = 0 evaluation)
  // Reconstruction of the product form from the chi table at s > 0.
  double reconstruct(double s) const;
  double product_form(double s) const;
};

// Raw Philox4x32-10 block function (exposed for known-answer tests).
std::array<std::uint32_t, 4> philox4x32_block(
    const std::array<std::uint32_t, 4>& counter,
    const std::array<std::uint32_t, 2>& key);

// Deterministic draw: entries depend only on (seed, index, entry position).
ChannelRealization sample_channels(const SystemConfig& config,
                                   std::uint64_t seed, std::uint64_t index);

// Group equal INRs (bit-exact equality), order decreasing, and solve the
// linear system for the partial-fraction coefficients.
InterferenceProfile build_profile(const std::vector<double>& rhoI);

}  // namespace relaycap::channel
