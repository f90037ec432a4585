#pragma once
// Closed-form ergodic-capacity evaluators for the three relaying schemes,
// plus the independent quadrature oracles that pin down the special-function
// conventions at runtime.
//
// Every closed form decomposes as
//     value = cap_hop1 + cap_hop2 - joint_term
// (per-hop capacities minus the capacity of the combined SNR, or a Jensen
// bound on it), and each result carries the trail of special-function calls
// it was assembled from, so a discrepancy localizes to a sub-term.

#include <functional>
#include <string>
#include <vector>

#include "relaycap/channel.hpp"
#include "relaycap/mc.hpp"
#include "relaycap/precoding.hpp"

namespace relaycap::analytic {

// One special-function evaluation made while assembling a closed form.
struct CallRecord {
  std::string kind;            // "meijer_g2", "meijer_g", "tricomi_u", ...
  std::vector<double> params;  // flat parameter tuple, in call order
  double value = 0.0;
  double error = 0.0;          // numeric error estimate where available
};

// A closed-form capacity with its dual-hop decomposition. The invariant
//   value == cap_hop1 + cap_hop2 - joint_term   (to 1e-10)
// holds for every evaluator below; for the Jensen-bounded schemes the
// joint_term is the bound on the combined-SNR capacity, for the exact
// schemes it is the combined-SNR capacity itself.
struct TheoremResult {
  double value = 0.0;       // bits/s/Hz
  double cap_hop1 = 0.0;    // first-hop (SINR) capacity term
  double cap_hop2 = 0.0;    // second-hop capacity term
  double joint_term = 0.0;  // combined-SNR term (or its bound)
  double error_estimate = 0.0;
  std::vector<CallRecord> trail;
};

// ---------------------------------------------------------------------------
// Quadrature oracles (first-class operations: the bivariate contour
// convention is calibrated against these at runtime on first use).
// ---------------------------------------------------------------------------

// Ergodic capacity of a hop whose SNR has c.d.f. `cdf`:
//   (1 / 2 ln 2) * Integral_0^inf (1 - F(x)) / (1 + x) dx,
// integrated over doubling segments until the tail falls below tail_bound.
// Throws NumericError if the tail never does.
double capacity_from_cdf(const std::function<double(double)>& cdf,
                         double tail_bound = 1e-10);

// Defining integrals behind the first-hop capacity building blocks:
//   I1 = Integral_0^inf e^{-x/rho1} x^k (1+x)^{-1} (1 + (rhoI/rho1) x)^{-(j+l)} dx
double quadrature_I1(int k, int j, int l, double rho1, double rhoI);
//   I6 = Integral_0^inf s e^{-s} (1 + rho1 s)^{-(k+1)} (1 + rho2 s)^{-(j+1)} ds
double quadrature_I6(int k, int j, double rho1, double rho2);
//   I8 = Integral_0^inf e^{-x/rho1} x^N (1+x)^{-1}
//                       2F1(M+1, N-m+1; N-m+2; -(rhoI/rho1) x) dx
double quadrature_I8(int N, int M, int m, double rho1, double rhoI);

// Verifies the bivariate-contour parameter convention against the I1/I6
// quadrature oracles (1e-6 relative). Runs once per process; every theorem
// evaluator triggers it before its first bivariate call. Throws NumericError
// if the convention check fails.
void calibrate_bivariate();

// ---------------------------------------------------------------------------
// First-hop SINR c.d.f.s (closed forms; validated against empirical c.d.f.s)
// ---------------------------------------------------------------------------

// MRC receiver, general (possibly repeated) interferer powers.
double cdf_gamma1_mrc(double x, const channel::SystemConfig& config);
// MMSE receiver, equal interferer powers.
double cdf_gamma1_mmse(double x, const channel::SystemConfig& config);

// ---------------------------------------------------------------------------
// Scheme capacities
// ---------------------------------------------------------------------------

TheoremResult mrc_capacity_upper(const channel::SystemConfig& config);
TheoremResult mrc_capacity_lower(const channel::SystemConfig& config);
TheoremResult zf_capacity_exact(const channel::SystemConfig& config);   // N > M
TheoremResult mmse_capacity_upper(const channel::SystemConfig& config); // equal rhoI
TheoremResult mmse_capacity_lower(const channel::SystemConfig& config); // equal rhoI
// Interference-free dual-hop capacity with Gamma(N) hops: the limit every
// interference-suppressing scheme approaches as the antenna count grows.
TheoremResult largeN_capacity(const channel::SystemConfig& config);

// E[gamma1^n] for n > 0 (not necessarily integer). Scheme-specific
// preconditions match the capacity evaluators above.
double general_moment_gamma1(precoding::Scheme scheme, double n,
                             const channel::SystemConfig& config);

// Building blocks exposed for cross-checking individual bound terms.
double mean_gamma1(precoding::Scheme scheme, const channel::SystemConfig& config);
double mean_log_gamma1(precoding::Scheme scheme, const channel::SystemConfig& config);
// Single-hop ergodic capacity of a Gamma(N, rho) SNR (used for hop 2 and for
// the interference-free part of hop 1).
double capacity_gamma_hop(int N, double rho);

// End-to-end capacity by direct double quadrature over the two hop c.d.f.s —
// a slow, scheme-faithful oracle that shares no code path with the theorem
// evaluators. Method tag: "quadrature-oracle".
mc::CapacityEstimate capacity_quadrature(precoding::Scheme scheme,
                                         const channel::SystemConfig& config);

}  // namespace relaycap::analytic
