#pragma once
// Relay combiner construction (MRC / ZF / MMSE receive side, MRT transmit
// side) and per-realization end-to-end SINR, both via the scheme-specific
// closed forms and via the generic defining formula.

#include <string>

#include "relaycap/channel.hpp"

namespace relaycap::precoding {

enum class Scheme { MRC, ZF, MMSE };

Scheme scheme_from_string(const std::string& name);  // throws DomainError
std::string to_string(Scheme s);

struct SinrBreakdown {
  double gamma1 = 0.0;    // first-hop effective SINR (linear)
  double gamma2 = 0.0;    // second-hop SNR (linear)
  double gamma_end = 0.0; // gamma1*gamma2 / (gamma1 + gamma2 + 1)
  Scheme scheme = Scheme::MRC;
};

struct RelayWeights {
  Eigen::RowVectorXcd w1;    // 1 x N receive combining row
  double omega2 = 0.0;       // power normalization factor omega^2
  Eigen::VectorXcd steering; // h2 / ||h2||
};

// Harmonic-style combination of the two hop SINRs.
double combine_hops(double gamma1, double gamma2);

SinrBreakdown mrc_sinr(const channel::ChannelRealization& real,
                       const channel::SystemConfig& config);

// Requires N > M when M >= 1 (M = 0 degenerates to the identity projector).
// Throws NumericError if the interference Gram matrix is numerically
// rank-deficient (reciprocal condition below 1e-12).
SinrBreakdown zf_sinr(const channel::ChannelRealization& real,
                      const channel::SystemConfig& config);

// Simulation path: accepts unequal interferer powers. (The equal-power
// restriction of the closed forms lives in the analytic layer.)
SinrBreakdown mmse_sinr(const channel::ChannelRealization& real,
                        const channel::SystemConfig& config);

SinrBreakdown scheme_sinr(Scheme scheme, const channel::ChannelRealization& real,
                          const channel::SystemConfig& config);

// w1 per scheme plus the relay power factor
//   omega^2 = rho2 / (|w1 h1|^2 rho1 + sum_i |w1 hIi|^2 rhoIi + ||w1||^2).
RelayWeights build_weights(Scheme scheme, const channel::ChannelRealization& real,
                           const channel::SystemConfig& config);

// The defining end-to-end SINR evaluated literally from W = omega * steering * w1:
//   gamma = |h2^H W h1|^2 rho1 /
//           (sum_i |h2^H W hIi|^2 rhoIi + ||h2^H W||^2 + 1).
// Used as the oracle that every closed form must reproduce.
double generic_sinr(const RelayWeights& weights,
                    const channel::ChannelRealization& real,
                    const channel::SystemConfig& config);

}  // namespace relaycap::precoding
