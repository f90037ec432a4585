#pragma once
// Monte Carlo ergodic-capacity estimation with reproducible parallelism.
//
// The sample index range is split into fixed 4096-sample chunks; worker
// threads claim chunks, and partial sums are combined in chunk order, so a
// given (seed, samples) pair yields bit-identical results for any thread
// count.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "relaycap/precoding.hpp"

namespace relaycap::mc {

struct CapacityEstimate {
  double value = 0.0;     // bits/s/Hz
  double stderr_ = 0.0;   // bits/s/Hz (sample std / sqrt(samples) for MC)
  long long samples = 0;  // 0 for analytic methods
  std::string method;     // mc | analytic-exact | analytic-upper |
                          // analytic-lower | largen | quadrature-oracle
  std::uint64_t seed = 0;
};

enum class Metric { Gamma1, Gamma2, GammaEnd, Capacity };

struct MomentSummary {
  double cap_mean = 0.0, cap_se = 0.0;
  double g1_mean = 0.0, g1_se = 0.0;
  double g1_sq_mean = 0.0, g1_sq_se = 0.0;
  double lng1_mean = 0.0, lng1_se = 0.0;
  double g2_mean = 0.0;
  long long samples = 0;
};

// Mean of (1/2) log2(1 + gamma_end) over sample indices [0, samples).
// Requires samples >= 1000. threads <= 0 selects the hardware default.
CapacityEstimate estimate_capacity(precoding::Scheme scheme,
                                   const channel::SystemConfig& config,
                                   long long samples, std::uint64_t seed,
                                   int threads = 1);

// Capacity plus the first-hop moment statistics used by the bound checks.
MomentSummary collect_moments(precoding::Scheme scheme,
                              const channel::SystemConfig& config,
                              long long samples, std::uint64_t seed,
                              int threads = 1);

struct EmpiricalCdf {
  std::vector<double> sorted;
  double operator()(double x) const;  // fraction of samples <= x
};

EmpiricalCdf empirical_cdf(precoding::Scheme scheme,
                           const channel::SystemConfig& config, Metric which,
                           long long samples, std::uint64_t seed,
                           int threads = 1);

// Kolmogorov-Smirnov distance between an empirical c.d.f. and a reference.
double ks_distance(const EmpiricalCdf& ecdf,
                   const std::function<double(double)>& reference);

}  // namespace relaycap::mc
