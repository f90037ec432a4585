#include "relaycap/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

namespace relaycap::analytic {

using channel::InterferenceProfile;
using channel::SystemConfig;
using precoding::Scheme;

namespace {

constexpr double kLn2 = 0.69314718055994530941723212145818;

// Compensated (Kahan) accumulator. The chi-weighted sums alternate in sign
// and cancel heavily when several interferer powers are nearly equal, so all
// formula sums go through this instead of naive +=.
struct Kahan {
  double sum = 0.0;
  double comp = 0.0;
  void add(double x) {
    const double y = x - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
};

double fact(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

double binom(int k, int l) {
  if (l < 0 || l > k) return 0.0;
  l = std::min(l, k - l);
  double c = 1.0;
  for (int i = 1; i <= l; ++i) c = c * (k - l + i) / i;
  return c;
}

// Regularized upper incomplete gamma Q(a, x) = Gamma(a, x) / Gamma(a).
double reg_gamma_q(double a, double x) {
  if (x <= 0.0) return 1.0;
  if (x > 740.0 && x > 4.0 * a) return 0.0;  // underflows at double precision
  return specfun::upper_incomplete_gamma(a, x) / std::tgamma(a);
}

void record(std::vector<CallRecord>* trail, const char* kind,
            std::initializer_list<double> params, double value, double error) {
  if (trail == nullptr) return;
  trail->push_back(CallRecord{kind, std::vector<double>(params), value, error});
}

double trail_error(const std::vector<CallRecord>& trail) {
  double e = 0.0;
  for (const auto& rec : trail) e += std::abs(rec.error);
  return e;
}

// ---------------------------------------------------------------------------
// Fixed parameter tuples for the contour-integrated G calls. The *_raw
// versions bypass the calibration gate because the calibration itself needs
// them; everything else goes through the recording wrappers below.
// ---------------------------------------------------------------------------

specfun::GValue g2_hop1_mrc_raw(int k, int j, int l, double rho1, double r) {
  specfun::MeijerG2Spec spec;
  spec.shared = k + 1.0;
  spec.upper_x = {0.0};
  spec.lower_x = {0.0};
  spec.upper_y = {1.0 - j - l};
  spec.lower_y = {0.0};
  spec.x = rho1;
  spec.y = r;
  return specfun::meijer_g2_cached(spec);
}

specfun::GValue g2_joint_raw(int k, int j, double rho1, double rho2) {
  specfun::MeijerG2Spec spec;
  spec.shared = 2.0;
  spec.upper_x = {-static_cast<double>(k)};
  spec.lower_x = {0.0};
  spec.upper_y = {-static_cast<double>(j)};
  spec.lower_y = {0.0};
  spec.x = rho1;
  spec.y = rho2;
  return specfun::meijer_g2_cached(spec);
}

specfun::GValue g2_hop1_mmse_raw(int N, int M, int m, double rho1,
                                 double rhoI) {
  specfun::MeijerG2Spec spec;
  spec.shared = N + 2.0;
  spec.upper_x = {0.0};
  spec.lower_x = {0.0};
  spec.upper_y = {-M - 1.0, m - N - 1.0};
  spec.lower_y = {-1.0, m - N - 2.0};
  spec.x = rho1;
  spec.y = rhoI;
  return specfun::meijer_g2_cached(spec);
}

specfun::GValue g_mmse_correction_raw(int N, int M, int m, double nu,
                                      double rhoI) {
  specfun::MeijerGSpec spec;
  spec.m = 1;
  spec.n = 3;
  spec.p = 3;
  spec.q = 2;
  spec.a_params = {-static_cast<double>(N) - nu, -M - 1.0,
                   static_cast<double>(m - N) - 1.0};
  spec.b_params = {-1.0, static_cast<double>(m - N) - 2.0};
  spec.argument = rhoI;
  return specfun::meijer_g_cached(spec);
}

// ---------------------------------------------------------------------------
// Runtime convention calibration
// ---------------------------------------------------------------------------

std::once_flag g_calibration_flag;

void run_calibration() {
  // Joint-term transform against the direct integral it must reproduce.
  const struct {
    int k, j;
    double r1, r2;
  } joint_cases[] = {{0, 0, 1.0, 1.0}, {2, 1, 10.0, 1.0}};
  for (const auto& c : joint_cases) {
    const double transform =
        g2_joint_raw(c.k, c.j, c.r1, c.r2).value / (fact(c.k) * fact(c.j));
    const double direct = quadrature_I6(c.k, c.j, c.r1, c.r2);
    if (!(std::abs(transform - direct) <= 1e-6 * std::abs(direct))) {
      throw NumericError(
          "bivariate contour calibration failed (joint-term transform "
          "disagrees with its defining integral)");
    }
  }
  // Hop-1 transform against its direct integral.
  const struct {
    int k, j, l;
    double r1, rI;
  } hop1_cases[] = {{0, 1, 0, 10.0, 1.0}, {1, 1, 1, 2.0, 0.5}};
  for (const auto& c : hop1_cases) {
    const double transform =
        std::pow(c.r1, c.k + 1) /
        std::tgamma(static_cast<double>(c.j + c.l)) *
        g2_hop1_mrc_raw(c.k, c.j, c.l, c.r1, c.rI).value;
    const double direct = quadrature_I1(c.k, c.j, c.l, c.r1, c.rI);
    if (!(std::abs(transform - direct) <= 1e-6 * std::abs(direct))) {
      throw NumericError(
          "bivariate contour calibration failed (hop-1 transform disagrees "
          "with its defining integral)");
    }
  }
}

void ensure_calibrated() {
  std::call_once(g_calibration_flag, run_calibration);
}

// ---------------------------------------------------------------------------
// Recording wrappers
// ---------------------------------------------------------------------------

double g2_hop1_mrc(int k, int j, int l, double rho1, double r,
                   std::vector<CallRecord>* trail) {
  ensure_calibrated();
  const auto gv = g2_hop1_mrc_raw(k, j, l, rho1, r);
  record(trail, "g2_hop1_mrc",
         {static_cast<double>(k), static_cast<double>(j),
          static_cast<double>(l), rho1, r},
         gv.value, gv.error);
  return gv.value;
}

double g2_joint(int k, int j, double rho1, double rho2,
                std::vector<CallRecord>* trail) {
  ensure_calibrated();
  const auto gv = g2_joint_raw(k, j, rho1, rho2);
  record(trail, "g2_joint",
         {static_cast<double>(k), static_cast<double>(j), rho1, rho2},
         gv.value, gv.error);
  return gv.value;
}

double g2_hop1_mmse(int N, int M, int m, double rho1, double rhoI,
                    std::vector<CallRecord>* trail) {
  ensure_calibrated();
  const auto gv = g2_hop1_mmse_raw(N, M, m, rho1, rhoI);
  record(trail, "g2_hop1_mmse",
         {static_cast<double>(N), static_cast<double>(M),
          static_cast<double>(m), rho1, rhoI},
         gv.value, gv.error);
  return gv.value;
}

double g_mmse_correction(int N, int M, int m, double nu, double rhoI,
                         std::vector<CallRecord>* trail) {
  const auto gv = g_mmse_correction_raw(N, M, m, nu, rhoI);
  record(trail, "g_mmse_correction",
         {static_cast<double>(N), static_cast<double>(M),
          static_cast<double>(m), nu, rhoI},
         gv.value, gv.error);
  return gv.value;
}

double tricomi(double a, double b, double z, std::vector<CallRecord>* trail) {
  const double v = specfun::tricomi_u_cached(a, b, z);
  record(trail, "tricomi_u", {a, b, z}, v, 0.0);
  return v;
}

// ---------------------------------------------------------------------------
// MRC hop-1 building blocks (general interferer profile)
// ---------------------------------------------------------------------------

double hop1_capacity_mrc(const SystemConfig& cfg, const InterferenceProfile& prof,
                         std::vector<CallRecord>* trail) {
  if (cfg.M == 0) return capacity_gamma_hop(cfg.N, cfg.rho1);
  Kahan total;
  for (int k = 0; k < cfg.N; ++k) {
    const double inv_kfact = 1.0 / fact(k);
    for (int l = 0; l <= k; ++l) {
      const double ckl = binom(k, l);
      for (std::size_t i = 0; i < prof.distinct.size(); ++i) {
        const double r = prof.distinct[i];
        for (int j = 1; j <= prof.multiplicity[i]; ++j) {
          const double g2 = g2_hop1_mrc(k, j, l, cfg.rho1, r, trail);
          total.add(inv_kfact * ckl * prof.chi[i][j - 1] * std::pow(r, l) /
                    fact(j - 1) * g2);
        }
      }
    }
  }
  return cfg.rho1 * total.sum / (2.0 * kLn2);
}

double mean_log_gamma1_mrc(const SystemConfig& cfg,
                           const InterferenceProfile& prof,
                           std::vector<CallRecord>* trail) {
  if (cfg.M == 0) return specfun::digamma(cfg.N) + std::log(cfg.rho1);
  Kahan acc;
  const double psi1 = specfun::digamma(1.0);
  for (std::size_t i = 0; i < prof.distinct.size(); ++i) {
    const double r = prof.distinct[i];
    const double z = 1.0 / r;
    for (int j = 1; j <= prof.multiplicity[i]; ++j) {
      const double u0 = tricomi(0.0, 1.0 - j, z, trail);  // identically 1
      const double uda = specfun::tricomi_u_da(0.0, 1.0 - j, z);
      record(trail, "tricomi_u_da", {0.0, 1.0 - j, z}, uda, 0.0);
      const double udb = specfun::tricomi_u_db(0.0, 1.0 - j, z);
      record(trail, "tricomi_u_db", {0.0, 1.0 - j, z}, udb, 0.0);
      acc.add(prof.chi[i][j - 1] *
              ((std::log(cfg.rho1 / r) + psi1) * u0 + uda + udb));
    }
  }
  for (int k = 1; k < cfg.N; ++k) {
    Kahan inner;
    for (int l = 0; l <= k; ++l) {
      const double ckl = binom(k, l);
      for (std::size_t i = 0; i < prof.distinct.size(); ++i) {
        const double r = prof.distinct[i];
        const double z = 1.0 / r;
        for (int j = 1; j <= prof.multiplicity[i]; ++j) {
          inner.add(ckl * prof.chi[i][j - 1] * fact(j + l - 1) / fact(j - 1) *
                    std::pow(r, l - k) *
                    tricomi(k, k - j - l + 1.0, z, trail));
        }
      }
    }
    acc.add(inner.sum / k);
  }
  return acc.sum;
}

double mean_gamma1_mrc(const SystemConfig& cfg, const InterferenceProfile& prof,
                       std::vector<CallRecord>* trail) {
  if (cfg.M == 0) return cfg.N * cfg.rho1;
  Kahan total;
  for (int k = 0; k < cfg.N; ++k) {
    for (int l = 0; l <= k; ++l) {
      const double ckl = binom(k, l);
      for (std::size_t i = 0; i < prof.distinct.size(); ++i) {
        const double r = prof.distinct[i];
        const double z = 1.0 / r;
        for (int j = 1; j <= prof.multiplicity[i]; ++j) {
          total.add(ckl * prof.chi[i][j - 1] * fact(j + l - 1) / fact(j - 1) *
                    std::pow(r, l - k - 1.0) *
                    tricomi(k + 1.0, k - j - l + 2.0, z, trail));
        }
      }
    }
  }
  return cfg.rho1 * total.sum;
}

double moment_gamma1_mrc(const SystemConfig& cfg,
                         const InterferenceProfile& prof, double n,
                         std::vector<CallRecord>* trail) {
  if (cfg.M == 0) {
    return std::pow(cfg.rho1, n) * std::tgamma(cfg.N + n) /
           std::tgamma(static_cast<double>(cfg.N));
  }
  Kahan total;
  for (int k = 0; k < cfg.N; ++k) {
    const double scale = 1.0 / (std::pow(cfg.rho1, k) * fact(k));
    for (int l = 0; l <= k; ++l) {
      const double ckl = binom(k, l);
      for (std::size_t i = 0; i < prof.distinct.size(); ++i) {
        const double r = prof.distinct[i];
        const double z = 1.0 / r;
        for (int j = 1; j <= prof.multiplicity[i]; ++j) {
          total.add(scale * ckl * prof.chi[i][j - 1] * fact(j + l - 1) /
                    fact(j - 1) * std::pow(r, l) * n *
                    std::pow(cfg.rho1 / r, k + n) * std::tgamma(k + n) *
                    tricomi(k + n, k + n - j - l + 1.0, z, trail));
        }
      }
    }
  }
  return total.sum;
}

// ---------------------------------------------------------------------------
// MMSE hop-1 building blocks (equal interferer powers; M = 0 degrades to the
// interference-free forms because the correction sums are empty)
// ---------------------------------------------------------------------------

double mmse_pref(int N, int M, int m) {
  return 1.0 / (std::tgamma(static_cast<double>(m)) *
                std::tgamma(static_cast<double>(N - m + 1)) *
                std::tgamma(static_cast<double>(m - N + M)));
}

double equal_rhoI(const SystemConfig& cfg) {
  if (!cfg.equal_interference()) {
    throw DomainError(
        "mmse analytic path requires equal interferer powers (the simulation "
        "path accepts unequal powers)");
  }
  return cfg.M > 0 ? cfg.rhoI.front() : 0.0;
}

double hop1_capacity_mmse(const SystemConfig& cfg, double rhoI,
                          std::vector<CallRecord>* trail) {
  const double c = capacity_gamma_hop(cfg.N, cfg.rho1);
  const int m1 = std::max(0, cfg.N - cfg.M) + 1;
  Kahan pen;
  for (int m = m1; m <= cfg.N; ++m) {
    pen.add(std::pow(rhoI, cfg.N - m + 2.0) * mmse_pref(cfg.N, cfg.M, m) *
            g2_hop1_mmse(cfg.N, cfg.M, m, cfg.rho1, rhoI, trail));
  }
  return c - cfg.rho1 * pen.sum / (2.0 * kLn2);
}

double mean_log_gamma1_mmse(const SystemConfig& cfg, double rhoI,
                            std::vector<CallRecord>* trail) {
  const int m1 = std::max(0, cfg.N - cfg.M) + 1;
  Kahan s;
  for (int m = m1; m <= cfg.N; ++m) {
    s.add(std::pow(rhoI, cfg.N - m + 2.0) * mmse_pref(cfg.N, cfg.M, m) *
          g_mmse_correction(cfg.N, cfg.M, m, 0.0, rhoI, trail));
  }
  return specfun::digamma(cfg.N) + std::log(cfg.rho1) - s.sum;
}

double mean_gamma1_mmse(const SystemConfig& cfg, double rhoI,
                        std::vector<CallRecord>* trail) {
  const int m1 = std::max(0, cfg.N - cfg.M) + 1;
  Kahan s;
  for (int m = m1; m <= cfg.N; ++m) {
    s.add(std::pow(rhoI, cfg.N - m + 2.0) * mmse_pref(cfg.N, cfg.M, m) *
          g_mmse_correction(cfg.N, cfg.M, m, 1.0, rhoI, trail));
  }
  return cfg.N * cfg.rho1 - cfg.rho1 * s.sum;
}

double moment_gamma1_mmse(const SystemConfig& cfg, double rhoI, double n,
                          std::vector<CallRecord>* trail) {
  Kahan base;
  for (int m = 0; m < cfg.N; ++m) {
    base.add(std::tgamma(m + n) / std::tgamma(m + 1.0));
  }
  const double lead = n * std::pow(cfg.rho1, n) * base.sum;
  const int m1 = std::max(0, cfg.N - cfg.M) + 1;
  Kahan s;
  for (int m = m1; m <= cfg.N; ++m) {
    s.add(std::pow(rhoI, cfg.N - m + 2.0) * n * std::pow(cfg.rho1, n) *
          g_mmse_correction(cfg.N, cfg.M, m, n, rhoI, trail) *
          mmse_pref(cfg.N, cfg.M, m));
  }
  return lead - s.sum;
}

// ---------------------------------------------------------------------------
// Shared dual-hop assembly
// ---------------------------------------------------------------------------

// Exact capacity of a dual hop whose SNRs are independent Gamma(N1, rho1)
// and Gamma(N2, rho2): per-hop capacities minus the combined-SNR capacity
// evaluated through the joint-term transform.
TheoremResult exact_gamma_dual_hop(int N1, int N2, double rho1, double rho2) {
  TheoremResult res;
  res.cap_hop1 = capacity_gamma_hop(N1, rho1);
  res.cap_hop2 = capacity_gamma_hop(N2, rho2);
  const double z1 = 1.0 / rho1, z2 = 1.0 / rho2;
  Kahan usum;
  for (int k = 0; k < N1; ++k) usum.add(tricomi(1.0, 1.0 - k, z1, &res.trail));
  for (int j = 0; j < N2; ++j) usum.add(tricomi(1.0, 1.0 - j, z2, &res.trail));
  Kahan gsum;
  for (int k = 0; k < N1; ++k) {
    for (int j = 0; j < N2; ++j) {
      gsum.add(g2_joint(k, j, rho1, rho2, &res.trail) / (fact(k) * fact(j)));
    }
  }
  res.joint_term = (usum.sum - rho1 * rho2 * gsum.sum) / (2.0 * kLn2);
  res.value = res.cap_hop1 + res.cap_hop2 - res.joint_term;
  res.error_estimate =
      trail_error(res.trail) + 1e-13 * std::abs(res.value);
  return res;
}

// Jensen-style assembly shared by the bounded schemes: the joint term is
// 0.5 log2(1 + rho2 e^{psi(N)} + e^{E[ln gamma1]}) for the upper bound and
// 0.5 log2(1 + N rho2 + E[gamma1]) for the lower bound.
TheoremResult assemble_bound(double hop1, double hop2, double joint,
                             std::vector<CallRecord> trail) {
  TheoremResult res;
  res.cap_hop1 = hop1;
  res.cap_hop2 = hop2;
  res.joint_term = joint;
  res.value = hop1 + hop2 - joint;
  res.trail = std::move(trail);
  res.error_estimate =
      trail_error(res.trail) + 1e-13 * std::abs(res.value);
  return res;
}

}  // namespace

// ---------------------------------------------------------------------------
// Quadrature oracles
// ---------------------------------------------------------------------------

double capacity_from_cdf(const std::function<double(double)>& cdf,
                         double tail_bound) {
  if (!(tail_bound > 0.0)) {
    throw DomainError("capacity_from_cdf: tail_bound must be positive");
  }
  const auto integrand = [&](double x) { return (1.0 - cdf(x)) / (1.0 + x); };
  double total = specfun::integrate_finite(integrand, 0.0, 1.0, 1e-12);
  double lo = 1.0;
  int quiet = 0;
  for (int seg = 0; seg < 64; ++seg) {
    const double hi = 2.0 * lo;
    const double part = specfun::integrate_finite(integrand, lo, hi, 1e-12);
    total += part;
    quiet = (std::abs(part) < tail_bound) ? quiet + 1 : 0;
    if (quiet >= 2) return total / (2.0 * kLn2);
    lo = hi;
  }
  throw NumericError("capacity_from_cdf: integral tail did not converge");
}

double quadrature_I1(int k, int j, int l, double rho1, double rhoI) {
  if (k < 0 || j < 1 || l < 0 || !(rho1 > 0.0) || !(rhoI > 0.0)) {
    throw DomainError("quadrature_I1: invalid parameters");
  }
  const double jl = j + l;
  const auto f = [&](double u) {
    if (u > 745.0) return 0.0;  // e^{-u} underflows
    const double lnv = -u - std::log1p(rho1 * u) - jl * std::log1p(rhoI * u);
    return std::exp(lnv) * std::pow(u, k);
  };
  return std::pow(rho1, k + 1.0) * specfun::integrate_semi_infinite(f, 1e-11);
}

double quadrature_I6(int k, int j, double rho1, double rho2) {
  if (k < 0 || j < 0 || !(rho1 > 0.0) || !(rho2 > 0.0)) {
    throw DomainError("quadrature_I6: invalid parameters");
  }
  const auto f = [&](double s) {
    if (s > 745.0) return 0.0;
    const double lnv = -s - (k + 1.0) * std::log1p(rho1 * s) -
                       (j + 1.0) * std::log1p(rho2 * s);
    return s * std::exp(lnv);
  };
  return specfun::integrate_semi_infinite(f, 1e-11);
}

double quadrature_I8(int N, int M, int m, double rho1, double rhoI) {
  if (N < 1 || M < 1 || m < 1 || m > N || !(rho1 > 0.0) || !(rhoI > 0.0)) {
    throw DomainError("quadrature_I8: invalid parameters");
  }
  const auto f = [&](double u) {
    if (u > 745.0) return 0.0;
    const double lnv = -u + N * std::log(u) - std::log1p(rho1 * u);
    const double hyp = specfun::gauss_2f1(M + 1.0, N - m + 1.0, N - m + 2.0,
                                          -rhoI * u);
    return std::exp(lnv) * hyp;
  };
  return std::pow(rho1, N + 1.0) * specfun::integrate_semi_infinite(f, 1e-9);
}

void calibrate_bivariate() { ensure_calibrated(); }

// ---------------------------------------------------------------------------
// First-hop c.d.f.s
// ---------------------------------------------------------------------------

namespace {

double clamp_cdf(double raw, const char* what) {
  if (!(raw > -1e-9) || !(raw < 1.0 + 1e-9)) {
    throw NumericError(std::string(what) +
                       ": c.d.f. value outside [0,1] beyond round-off "
                       "(coefficient convention breakage)");
  }
  return std::min(1.0, std::max(0.0, raw));
}

}  // namespace

double cdf_gamma1_mrc(double x, const SystemConfig& config) {
  config.validate();
  if (x < 0.0) throw DomainError("cdf_gamma1_mrc: x must be non-negative");
  if (x == 0.0) return 0.0;
  if (config.M == 0) {
    return clamp_cdf(1.0 - reg_gamma_q(config.N, x / config.rho1),
                     "cdf_gamma1_mrc");
  }
  if (x / config.rho1 > 700.0) return 1.0;  // e^{-x/rho1} underflows
  const InterferenceProfile prof = channel::build_profile(config.rhoI);
  Kahan tot;
  for (int k = 0; k < config.N; ++k) {
    Kahan inner;
    for (int l = 0; l <= k; ++l) {
      const double ckl = binom(k, l);
      for (std::size_t i = 0; i < prof.distinct.size(); ++i) {
        const double r = prof.distinct[i];
        for (int j = 1; j <= prof.multiplicity[i]; ++j) {
          inner.add(ckl * prof.chi[i][j - 1] * fact(j + l - 1) / fact(j - 1) *
                    std::pow(r, l) *
                    std::pow(config.rho1 / (config.rho1 + r * x),
                             static_cast<double>(j + l)));
        }
      }
    }
    tot.add(std::pow(x / config.rho1, k) / fact(k) * inner.sum);
  }
  const double raw = 1.0 - std::exp(-x / config.rho1) * tot.sum;
  return clamp_cdf(raw, "cdf_gamma1_mrc");
}

double cdf_gamma1_mmse(double x, const SystemConfig& config) {
  config.validate();
  if (x < 0.0) throw DomainError("cdf_gamma1_mmse: x must be non-negative");
  const double rhoI = equal_rhoI(config);
  if (x == 0.0) return 0.0;
  if (config.M == 0) {
    return clamp_cdf(1.0 - reg_gamma_q(config.N, x / config.rho1),
                     "cdf_gamma1_mmse");
  }
  if (x / config.rho1 > 700.0) return 1.0;
  const int N = config.N, M = config.M;
  const int m1 = std::max(0, N - M) + 1;
  Kahan s;
  for (int m = m1; m <= N; ++m) {
    s.add(std::pow(rhoI, N - m + 1.0) /
          (std::tgamma(static_cast<double>(m)) *
           std::tgamma(N - m + 2.0) *
           std::tgamma(static_cast<double>(m - N + M))) *
          specfun::gauss_2f1(M + 1.0, N - m + 1.0, N - m + 2.0,
                             -(rhoI / config.rho1) * x));
  }
  const double raw = 1.0 - reg_gamma_q(N, x / config.rho1) +
                     fact(M) * std::exp(-x / config.rho1) *
                         std::pow(x / config.rho1, N) * s.sum;
  return clamp_cdf(raw, "cdf_gamma1_mmse");
}

// ---------------------------------------------------------------------------
// Scheme capacities
// ---------------------------------------------------------------------------

double capacity_gamma_hop(int N, double rho) {
  if (N < 1) throw DomainError("capacity_gamma_hop: N must be >= 1");
  if (!(rho > 0.0)) throw DomainError("capacity_gamma_hop: rho must be > 0");
  const double z = 1.0 / rho;
  Kahan acc;
  double rpow = 1.0;  // rho^{-k}
  for (int k = 0; k < N; ++k) {
    acc.add(rpow * specfun::upper_incomplete_gamma(-static_cast<double>(k), z));
    rpow /= rho;
  }
  return std::exp(z) * acc.sum / (2.0 * kLn2);
}

TheoremResult mrc_capacity_upper(const SystemConfig& config) {
  config.validate();
  std::vector<CallRecord> trail;
  const InterferenceProfile prof = channel::build_profile(config.rhoI);
  const double hop1 = hop1_capacity_mrc(config, prof, &trail);
  const double hop2 = capacity_gamma_hop(config.N, config.rho2);
  const double elng1 = mean_log_gamma1_mrc(config, prof, &trail);
  const double joint =
      0.5 * std::log2(1.0 +
                      config.rho2 * std::exp(specfun::digamma(config.N)) +
                      std::exp(elng1));
  return assemble_bound(hop1, hop2, joint, std::move(trail));
}

TheoremResult mrc_capacity_lower(const SystemConfig& config) {
  config.validate();
  std::vector<CallRecord> trail;
  const InterferenceProfile prof = channel::build_profile(config.rhoI);
  const double hop1 = hop1_capacity_mrc(config, prof, &trail);
  const double hop2 = capacity_gamma_hop(config.N, config.rho2);
  const double eg1 = mean_gamma1_mrc(config, prof, &trail);
  const double joint =
      0.5 * std::log2(1.0 + config.N * config.rho2 + eg1);
  return assemble_bound(hop1, hop2, joint, std::move(trail));
}

TheoremResult zf_capacity_exact(const SystemConfig& config) {
  config.validate();
  if (config.M >= 1 && config.N <= config.M) {
    throw DomainError("zf analytic: requires N > M");
  }
  return exact_gamma_dual_hop(config.N - config.M, config.N, config.rho1,
                              config.rho2);
}

TheoremResult mmse_capacity_upper(const SystemConfig& config) {
  config.validate();
  const double rhoI = equal_rhoI(config);
  std::vector<CallRecord> trail;
  const double hop1 = hop1_capacity_mmse(config, rhoI, &trail);
  const double hop2 = capacity_gamma_hop(config.N, config.rho2);
  const double elng1 = mean_log_gamma1_mmse(config, rhoI, &trail);
  const double joint =
      0.5 * std::log2(1.0 +
                      config.rho2 * std::exp(specfun::digamma(config.N)) +
                      std::exp(elng1));
  return assemble_bound(hop1, hop2, joint, std::move(trail));
}

TheoremResult mmse_capacity_lower(const SystemConfig& config) {
  config.validate();
  const double rhoI = equal_rhoI(config);
  std::vector<CallRecord> trail;
  const double hop1 = hop1_capacity_mmse(config, rhoI, &trail);
  const double hop2 = capacity_gamma_hop(config.N, config.rho2);
  const double eg1 = mean_gamma1_mmse(config, rhoI, &trail);
  const double joint =
      0.5 * std::log2(1.0 + config.N * config.rho2 + eg1);
  return assemble_bound(hop1, hop2, joint, std::move(trail));
}

TheoremResult largeN_capacity(const SystemConfig& config) {
  config.validate();
  return exact_gamma_dual_hop(config.N, config.N, config.rho1, config.rho2);
}

// ---------------------------------------------------------------------------
// Moments and mean helpers
// ---------------------------------------------------------------------------

double general_moment_gamma1(Scheme scheme, double n,
                             const SystemConfig& config) {
  config.validate();
  if (!(n > 0.0)) {
    throw DomainError("general_moment_gamma1: moment order must be positive");
  }
  switch (scheme) {
    case Scheme::MRC: {
      if (config.M == 0) {
        return std::pow(config.rho1, n) * std::tgamma(config.N + n) /
               std::tgamma(static_cast<double>(config.N));
      }
      const InterferenceProfile prof = channel::build_profile(config.rhoI);
      return moment_gamma1_mrc(config, prof, n, nullptr);
    }
    case Scheme::MMSE:
      return moment_gamma1_mmse(config, equal_rhoI(config), n, nullptr);
    case Scheme::ZF: {
      if (config.M >= 1 && config.N <= config.M) {
        throw DomainError("zf analytic: requires N > M");
      }
      const double dof = config.N - config.M;
      return std::pow(config.rho1, n) * std::tgamma(dof + n) /
             std::tgamma(dof);
    }
  }
  throw DomainError("general_moment_gamma1: unknown scheme");
}

double mean_gamma1(Scheme scheme, const SystemConfig& config) {
  config.validate();
  switch (scheme) {
    case Scheme::MRC: {
      if (config.M == 0) return config.N * config.rho1;
      const InterferenceProfile prof = channel::build_profile(config.rhoI);
      return mean_gamma1_mrc(config, prof, nullptr);
    }
    case Scheme::MMSE:
      return mean_gamma1_mmse(config, equal_rhoI(config), nullptr);
    case Scheme::ZF:
      if (config.M >= 1 && config.N <= config.M) {
        throw DomainError("zf analytic: requires N > M");
      }
      return (config.N - config.M) * config.rho1;
  }
  throw DomainError("mean_gamma1: unknown scheme");
}

double mean_log_gamma1(Scheme scheme, const SystemConfig& config) {
  config.validate();
  switch (scheme) {
    case Scheme::MRC: {
      if (config.M == 0) {
        return specfun::digamma(config.N) + std::log(config.rho1);
      }
      const InterferenceProfile prof = channel::build_profile(config.rhoI);
      return mean_log_gamma1_mrc(config, prof, nullptr);
    }
    case Scheme::MMSE:
      return mean_log_gamma1_mmse(config, equal_rhoI(config), nullptr);
    case Scheme::ZF:
      if (config.M >= 1 && config.N <= config.M) {
        throw DomainError("zf analytic: requires N > M");
      }
      return specfun::digamma(config.N - config.M) + std::log(config.rho1);
  }
  throw DomainError("mean_log_gamma1: unknown scheme");
}

// ---------------------------------------------------------------------------
// End-to-end quadrature oracle
// ---------------------------------------------------------------------------

mc::CapacityEstimate capacity_quadrature(Scheme scheme,
                                         const SystemConfig& config) {
  config.validate();
  // Survival function of the first-hop SINR.
  std::function<double(double)> surv1;
  switch (scheme) {
    case Scheme::MRC:
      surv1 = [config](double x) { return 1.0 - cdf_gamma1_mrc(x, config); };
      break;
    case Scheme::MMSE:
      equal_rhoI(config);  // precondition check up front
      surv1 = [config](double x) { return 1.0 - cdf_gamma1_mmse(x, config); };
      break;
    case Scheme::ZF: {
      if (config.M >= 1 && config.N <= config.M) {
        throw DomainError("zf analytic: requires N > M");
      }
      const double dof = config.N - config.M;
      const double rho1 = config.rho1;
      surv1 = [dof, rho1](double x) { return reg_gamma_q(dof, x / rho1); };
      break;
    }
  }
  const double n2 = config.N;
  const double rho2 = config.rho2;
  const auto surv2 = [n2, rho2](double y) {
    return reg_gamma_q(n2, y / rho2);
  };
  // E[ln(1 + gamma_end)] = II surv1(x) surv2(y) / (1 + x + y)^2 dx dy,
  // using 1 + gamma_end = (1 + gamma1)(1 + gamma2) / (1 + gamma1 + gamma2).
  const auto inner = [&](double x) {
    return specfun::integrate_semi_infinite(
        [&](double y) {
          const double s2 = surv2(y);
          if (s2 <= 0.0) return 0.0;
          const double d = 1.0 + x + y;
          return s2 / (d * d);
        },
        1e-10);
  };
  const double integral = specfun::integrate_semi_infinite(
      [&](double x) {
        const double s1 = surv1(x);
        if (s1 <= 0.0) return 0.0;
        return s1 * inner(x);
      },
      1e-9);
  mc::CapacityEstimate est;
  est.value = integral / (2.0 * kLn2);
  est.stderr_ = std::max(1e-8, 1e-7 * std::abs(est.value));
  est.samples = 0;
  est.method = "quadrature-oracle";
  est.seed = 0;
  return est;
}

}  // namespace relaycap::analytic
