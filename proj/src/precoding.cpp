#include "relaycap/precoding.hpp"

#include <cmath>

namespace relaycap::precoding {

using channel::ChannelRealization;
using channel::SystemConfig;

Scheme scheme_from_string(const std::string& name) {
  if (name == "mrc") return Scheme::MRC;
  if (name == "zf") return Scheme::ZF;
  if (name == "mmse") return Scheme::MMSE;
  throw DomainError("unknown scheme '" + name + "' (expected mrc|zf|mmse)");
}

std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::MRC: return "mrc";
    case Scheme::ZF: return "zf";
    case Scheme::MMSE: return "mmse";
  }
  return "?";
}

double combine_hops(double gamma1, double gamma2) {
  return gamma1 * gamma2 / (gamma1 + gamma2 + 1.0);
}

namespace {

double second_hop(const ChannelRealization& real, const SystemConfig& config) {
  return config.rho2 * real.h2.squaredNorm();
}

// Component of h1 orthogonal to the interference subspace, via a
// rank-revealing QR of HI. Throws when HI is numerically rank-deficient.
Eigen::VectorXcd project_out_interference(const ChannelRealization& real) {
  const int M = static_cast<int>(real.HI.cols());
  if (M == 0) return real.h1;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(real.HI);
  const Eigen::MatrixXcd R =
      qr.matrixQR().topLeftCorner(M, M).triangularView<Eigen::Upper>();
  const double rmax = std::abs(R(0, 0));
  const double rmin = std::abs(R(M - 1, M - 1));
  if (!(rmin > 1e-12 * rmax)) {
    throw NumericError("zf: interference matrix numerically rank-deficient");
  }
  const Eigen::MatrixXcd Q =
      qr.householderQ() * Eigen::MatrixXcd::Identity(real.HI.rows(), M);
  return real.h1 - Q * (Q.adjoint() * real.h1);
}

Eigen::MatrixXcd interference_covariance(const ChannelRealization& real,
                                         const SystemConfig& config) {
  const int N = config.N;
  Eigen::MatrixXcd R = Eigen::MatrixXcd::Identity(N, N);
  for (int i = 0; i < config.M; ++i) {
    R.noalias() += config.rhoI[i] * real.HI.col(i) * real.HI.col(i).adjoint();
  }
  return R;
}

}  // namespace

SinrBreakdown mrc_sinr(const ChannelRealization& real,
                       const SystemConfig& config) {
  const double n1 = real.h1.squaredNorm();
  double interference = 0.0;
  for (int i = 0; i < config.M; ++i) {
    interference +=
        config.rhoI[i] * std::norm(real.h1.dot(real.HI.col(i)));
  }
  const double u1 = interference / n1;
  SinrBreakdown out;
  out.scheme = Scheme::MRC;
  out.gamma1 = config.rho1 * n1 / (u1 + 1.0);
  out.gamma2 = second_hop(real, config);
  out.gamma_end = combine_hops(out.gamma1, out.gamma2);
  return out;
}

SinrBreakdown zf_sinr(const ChannelRealization& real,
                      const SystemConfig& config) {
  if (config.M >= 1 && config.N <= config.M) {
    throw DomainError("zf: requires N > M");
  }
  const Eigen::VectorXcd h1p = project_out_interference(real);
  SinrBreakdown out;
  out.scheme = Scheme::ZF;
  out.gamma1 = config.rho1 * h1p.squaredNorm();
  out.gamma2 = second_hop(real, config);
  out.gamma_end = combine_hops(out.gamma1, out.gamma2);
  return out;
}

SinrBreakdown mmse_sinr(const ChannelRealization& real,
                        const SystemConfig& config) {
  SinrBreakdown out;
  out.scheme = Scheme::MMSE;
  if (config.M == 0) {
    out.gamma1 = config.rho1 * real.h1.squaredNorm();
  } else {
    const Eigen::MatrixXcd R = interference_covariance(real, config);
    const Eigen::VectorXcd x = R.llt().solve(real.h1);
    out.gamma1 = config.rho1 * real.h1.dot(x).real();
  }
  out.gamma2 = second_hop(real, config);
  out.gamma_end = combine_hops(out.gamma1, out.gamma2);
  return out;
}

SinrBreakdown scheme_sinr(Scheme scheme, const ChannelRealization& real,
                          const SystemConfig& config) {
  switch (scheme) {
    case Scheme::MRC: return mrc_sinr(real, config);
    case Scheme::ZF: return zf_sinr(real, config);
    case Scheme::MMSE: return mmse_sinr(real, config);
  }
  throw DomainError("unknown scheme");
}

RelayWeights build_weights(Scheme scheme, const ChannelRealization& real,
                           const SystemConfig& config) {
  RelayWeights w;
  switch (scheme) {
    case Scheme::MRC:
      w.w1 = real.h1.adjoint() / real.h1.norm();
      break;
    case Scheme::ZF: {
      if (config.M >= 1 && config.N <= config.M) {
        throw DomainError("zf: requires N > M");
      }
      const Eigen::VectorXcd h1p = project_out_interference(real);
      w.w1 = h1p.adjoint() / h1p.norm();  // w1 h1 = ||P h1|| (real, positive)
      break;
    }
    case Scheme::MMSE: {
      if (config.M == 0) {
        w.w1 = real.h1.adjoint();
      } else {
        const Eigen::MatrixXcd R = interference_covariance(real, config);
        w.w1 = R.llt().solve(real.h1).adjoint();
      }
      break;
    }
  }
  w.steering = real.h2 / real.h2.norm();
  double denom = config.rho1 * std::norm((w.w1 * real.h1).value());
  for (int i = 0; i < config.M; ++i) {
    denom += config.rhoI[i] * std::norm((w.w1 * real.HI.col(i)).value());
  }
  denom += w.w1.squaredNorm();
  w.omega2 = config.rho2 / denom;
  return w;
}

double generic_sinr(const RelayWeights& weights, const ChannelRealization& real,
                    const SystemConfig& config) {
  // Assemble W literally and evaluate the defining ratio.
  const Eigen::MatrixXcd W =
      std::sqrt(weights.omega2) * weights.steering * weights.w1;
  const Eigen::RowVectorXcd row = real.h2.adjoint() * W;
  const double signal = config.rho1 * std::norm((row * real.h1).value());
  double noise = 1.0 + row.squaredNorm();
  for (int i = 0; i < config.M; ++i) {
    noise += config.rhoI[i] * std::norm((row * real.HI.col(i)).value());
  }
  return signal / noise;
}

}  // namespace relaycap::precoding
