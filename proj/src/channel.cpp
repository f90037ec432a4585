#include "relaycap/channel.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace relaycap::channel {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t* hi,
                    std::uint32_t* lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  *hi = static_cast<std::uint32_t>(p >> 32);
  *lo = static_cast<std::uint32_t>(p);
}

// Map a 64-bit word to the open interval (0, 1) with 53-bit resolution.
inline double uniform53(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32) | lo;
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1p-53;
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32_block(
    const std::array<std::uint32_t, 4>& counter,
    const std::array<std::uint32_t, 2>& key) {
  std::array<std::uint32_t, 4> x = counter;
  std::uint32_t k0 = key[0], k1 = key[1];
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, x[0], &hi0, &lo0);
    mulhilo(kPhiloxM1, x[2], &hi1, &lo1);
    x = {hi1 ^ x[1] ^ k0, lo1, hi0 ^ x[3] ^ k1, lo0};
    k0 += kWeyl0;
    k1 += kWeyl1;
  }
  return x;
}

void SystemConfig::validate() const {
  if (N < 1) throw DomainError("config: N must be at least 1");
  if (M < 0) throw DomainError("config: M must be non-negative");
  if (!(rho1 > 0.0) || !(rho2 > 0.0)) {
    throw DomainError("config: rho1 and rho2 must be positive");
  }
  if (static_cast<int>(rhoI.size()) != M) {
    throw DomainError("config: rhoI must have exactly M entries");
  }
  for (double r : rhoI) {
    if (!(r > 0.0)) throw DomainError("config: every rhoI must be positive");
  }
}

bool SystemConfig::equal_interference() const {
  for (std::size_t i = 1; i < rhoI.size(); ++i) {
    if (rhoI[i] != rhoI[0]) return false;
  }
  return true;
}

namespace {

// One complex CN(0,1) entry from a dedicated Philox block.
std::complex<double> gaussian_entry(std::uint64_t seed, std::uint64_t index,
                                    std::uint32_t entry) {
  const std::array<std::uint32_t, 4> ctr = {
      static_cast<std::uint32_t>(index),
      static_cast<std::uint32_t>(index >> 32), entry, 0u};
  const std::array<std::uint32_t, 2> key = {
      static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  const auto w = philox4x32_block(ctr, key);
  const double u1 = uniform53(w[0], w[1]);
  const double u2 = uniform53(w[2], w[3]);
  const double r = std::sqrt(-2.0 * std::log(u1));
  // Box-Muller pair, scaled so the complex entry has total variance 1.
  const double re = r * std::cos(kTwoPi * u2);
  const double im = r * std::sin(kTwoPi * u2);
  return {re * M_SQRT1_2, im * M_SQRT1_2};
}

}  // namespace

ChannelRealization sample_channels(const SystemConfig& config,
                                   std::uint64_t seed, std::uint64_t index) {
  config.validate();
  const int N = config.N, M = config.M;
  ChannelRealization real;
  real.h1.resize(N);
  real.h2.resize(N);
  real.HI.resize(N, M);
  for (int n = 0; n < N; ++n) {
    real.h1(n) = gaussian_entry(seed, index, static_cast<std::uint32_t>(n));
  }
  for (int i = 0; i < M; ++i) {
    for (int n = 0; n < N; ++n) {
      real.HI(n, i) = gaussian_entry(
          seed, index, static_cast<std::uint32_t>(N + i * N + n));
    }
  }
  for (int n = 0; n < N; ++n) {
    real.h2(n) = gaussian_entry(
        seed, index, static_cast<std::uint32_t>(N + N * M + n));
  }
  return real;
}

double InterferenceProfile::chi_sum() const {
  double s = 0.0;
  for (const auto& row : chi) {
    for (double c : row) s += c;
  }
  return s;
}

double InterferenceProfile::reconstruct(double s) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < distinct.size(); ++i) {
    for (std::size_t j = 1; j <= chi[i].size(); ++j) {
      acc += chi[i][j - 1] * std::pow(1.0 + distinct[i] * s, -static_cast<double>(j));
    }
  }
  return acc;
}

double InterferenceProfile::product_form(double s) const {
  double acc = 1.0;
  for (std::size_t i = 0; i < distinct.size(); ++i) {
    acc *= std::pow(1.0 + distinct[i] * s, -static_cast<double>(multiplicity[i]));
  }
  return acc;
}

InterferenceProfile build_profile(const std::vector<double>& rhoI) {
  InterferenceProfile prof;
  prof.rhoI = rhoI;
  if (rhoI.empty()) return prof;
  for (double r : rhoI) {
    if (!(r > 0.0)) throw DomainError("build_profile: INRs must be positive");
  }

  // Group bit-exact equal values, decreasing order. Near-equal values are
  // deliberately kept distinct: the coefficients stay continuous there.
  std::map<double, int, std::greater<double>> groups;
  for (double r : rhoI) ++groups[r];
  for (const auto& [value, count] : groups) {
    prof.distinct.push_back(value);
    prof.multiplicity.push_back(count);
  }

  const int K = static_cast<int>(rhoI.size());
  double log_mean = 0.0;
  for (double r : prof.distinct) log_mean += std::log(r);
  const double rbar = std::exp(log_mean / prof.distinct.size());

  // Collocation points, then one dense solve for the chi table.
  Eigen::VectorXd s_pts(K);
  for (int k = 0; k < K; ++k) s_pts(k) = (k + 1) * 0.8 / rbar;
  Eigen::MatrixXd A(K, K);
  Eigen::VectorXd rhs = Eigen::VectorXd::Ones(K);
  int col = 0;
  for (std::size_t i = 0; i < prof.distinct.size(); ++i) {
    for (int j = 1; j <= prof.multiplicity[i]; ++j, ++col) {
      for (int k = 0; k < K; ++k) {
        A(k, col) = std::pow(1.0 + prof.distinct[i] * s_pts(k), -j);
      }
    }
  }
  for (int k = 0; k < K; ++k) {
    double lhs = 1.0;
    for (std::size_t i = 0; i < prof.distinct.size(); ++i) {
      lhs *= std::pow(1.0 + prof.distinct[i] * s_pts(k), -prof.multiplicity[i]);
    }
    rhs(k) = lhs;
  }
  const Eigen::VectorXd coef = A.colPivHouseholderQr().solve(rhs);

  prof.chi.resize(prof.distinct.size());
  col = 0;
  for (std::size_t i = 0; i < prof.distinct.size(); ++i) {
    prof.chi[i].assign(coef.data() + col, coef.data() + col + prof.multiplicity[i]);
    col += prof.multiplicity[i];
  }

  // Self-check on fresh points; a large residual means the collocation
  // system was ill-conditioned (e.g. nearly-equal "distinct" inputs).
  double worst = 0.0;
  for (int k = 0; k < 23; ++k) {
    const double s = (0.05 + (5.0 - 0.05) * k / 22.0) / rbar;
    const double lhs = prof.product_form(s);
    const double rec = prof.reconstruct(s);
    worst = std::max(worst, std::abs(lhs - rec) / std::abs(lhs));
  }
  prof.residual = worst;
  if (worst > 1e-8) {
    throw NumericError(
        "build_profile: characteristic coefficients failed the reconstruction "
        "check (nearly-equal INR values?)");
  }
  return prof;
}

}  // namespace relaycap::channel
