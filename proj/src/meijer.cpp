#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>
#include <mutex>
#include <unordered_map>
#include <vector>

#include "relaycap/specfun.hpp"

namespace relaycap::specfun {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

// ---------------------------------------------------------------------------
// Gauss-Legendre nodes/weights on [-1, 1], cached per order.
// ---------------------------------------------------------------------------

struct GlRule {
  std::vector<double> x, w;
};

const GlRule& gauss_legendre(int n) {
  static std::mutex mu;
  static std::unordered_map<int, GlRule> cache;
  std::lock_guard<std::mutex> lk(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  GlRule r;
  r.x.resize(n);
  r.w.resize(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Newton from the Chebyshev-like initial guess.
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    r.x[i] = -z;
    r.x[n - 1 - i] = z;
    r.w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    r.w[n - 1 - i] = r.w[i];
  }
  return cache.emplace(n, std::move(r)).first->second;
}

bool near_positive_integer(double v) {
  if (v < 0.5) return false;
  return std::abs(v - std::round(v)) < 1e-12;
}

// ln|Gamma| on the real axis; +inf marks a pole.
double real_lgamma_mag(double x) {
  if (x > 0.0 && x == std::floor(x) && x < 2.0) return 0.0;  // Gamma(1)=Gamma(2)=1
  if (x <= 0.0 && x == std::floor(x)) {
    return std::numeric_limits<double>::infinity();
  }
  return std::lgamma(x);
}

}  // namespace

// ---------------------------------------------------------------------------
// Spec validation
// ---------------------------------------------------------------------------

void MeijerGSpec::validate() const {
  if (m < 1 || n < 0 || p < 0 || q < 1 || m > q || n > p) {
    throw DomainError("meijer_g: invalid orders (need 1 <= m <= q, 0 <= n <= p)");
  }
  if (static_cast<int>(a_params.size()) != p ||
      static_cast<int>(b_params.size()) != q) {
    throw DomainError("meijer_g: parameter list lengths must equal p and q");
  }
  if (!(argument > 0.0)) {
    throw DomainError("meijer_g: argument must be positive");
  }
  const double delta = m + n - 0.5 * (p + q);
  if (!(delta > 0.0)) {
    throw DomainError("meijer_g: contour does not converge (m+n <= (p+q)/2)");
  }
  // Left poles s = b_j + l and right poles s = a_k - 1 - l coincide exactly
  // when a_k - b_j is a positive integer.
  for (int k = 0; k < n; ++k) {
    for (int j = 0; j < m; ++j) {
      if (near_positive_integer(a_params[k] - b_params[j])) {
        throw DomainError("meijer_g: coinciding pole families (a_k - b_j in Z+)");
      }
    }
  }
}

void MeijerG2Spec::validate() const {
  if (lower_x.empty() || lower_y.empty()) {
    throw DomainError("meijer_g2: each variable needs its projecting lower parameter");
  }
  if (upper_x.empty() || upper_y.empty()) {
    throw DomainError("meijer_g2: each variable needs at least one upper parameter");
  }
  if (!(x > 0.0) || !(y > 0.0)) {
    throw DomainError("meijer_g2: both arguments must be strictly positive");
  }
  const double lox = *std::max_element(upper_x.begin(), upper_x.end()) - 1.0;
  const double loy = *std::max_element(upper_y.begin(), upper_y.end()) - 1.0;
  if (!(lox < lower_x[0]) || !(loy < lower_y[0])) {
    throw DomainError("meijer_g2: pole families overlap");
  }
}

void ContourPlan::validate() const {
  if (!(half_length > 0.0)) {
    throw DomainError("contour plan: half_length must be positive");
  }
  if (nodes_per_panel < 4) {
    throw DomainError("contour plan: nodes_per_panel too small");
  }
  if (!(tail_tolerance > 0.0) || tail_tolerance > 1e-8) {
    throw DomainError("contour plan: tail_tolerance must lie in (0, 1e-8]");
  }
  if (max_panels < 8) {
    throw DomainError("contour plan: max_panels too small");
  }
  // The truncated contour must carry at least 64 nodes in total.
  const double panels =
      std::min<double>(max_panels, std::ceil(half_length));
  if (nodes_per_panel * std::max(panels, 6.0) < 64.0) {
    throw DomainError("contour plan: fewer than 64 nodes per contour");
  }
}

// ---------------------------------------------------------------------------
// Univariate Meijer G
// ---------------------------------------------------------------------------

namespace {

struct UnivariateContour {
  double offset;
};

// Pole-free window between the two families.
void univariate_window(const MeijerGSpec& g, double* lo, double* hi) {
  *lo = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < g.n; ++k) *lo = std::max(*lo, g.a_params[k] - 1.0);
  *hi = std::numeric_limits<double>::infinity();
  for (int j = 0; j < g.m; ++j) *hi = std::min(*hi, g.b_params[j]);
}

// Offset selection: minimize the real-axis log-magnitude of the integrand
// over the pole-free window. This anchors the contour near the saddle, which
// suppresses cancellation between the oscillatory tails.
double pick_offset_univariate(const MeijerGSpec& g) {
  double lo, hi;
  univariate_window(g, &lo, &hi);
  if (!(lo < hi)) throw DomainError("meijer_g: pole families overlap");
  const double lo_eff = std::isfinite(lo) ? lo : hi - 8.0;
  const double margin = 0.1 * std::min(1.0, hi - lo_eff);
  const double lnz = std::log(g.argument);
  double best_c = 0.5 * (lo_eff + hi);
  double best_mag = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 41; ++i) {
    const double c = lo_eff + margin +
                     (hi - margin - (lo_eff + margin)) * i / 40.0;
    double acc = c * lnz;
    for (int j = 0; j < g.m; ++j) acc += real_lgamma_mag(g.b_params[j] - c);
    for (int k = 0; k < g.n; ++k) acc += real_lgamma_mag(1.0 - g.a_params[k] + c);
    for (int j = g.m; j < g.q; ++j) acc -= real_lgamma_mag(1.0 - g.b_params[j] + c);
    for (int k = g.n; k < g.p; ++k) acc -= real_lgamma_mag(g.a_params[k] - c);
    if (std::isfinite(acc) && acc < best_mag) {
      best_mag = acc;
      best_c = c;
    }
  }
  return best_c;
}

// One pass over the marching panels at a given node order; returns the
// contour value (integral of the real part over v >= 0, divided by pi).
double univariate_pass(const MeijerGSpec& g, double c, int nodes,
                       double tail_tol, int max_panels, int* panels_used) {
  const double lnz = std::log(g.argument);
  const GlRule& rule = gauss_legendre(nodes);
  auto integrand_re = [&](double v) {
    const std::complex<double> s(c, v);
    std::complex<double> acc = s * lnz;
    for (int j = 0; j < g.m; ++j) acc += lngamma_complex(g.b_params[j] - s);
    for (int k = 0; k < g.n; ++k) acc += lngamma_complex(1.0 - g.a_params[k] + s);
    for (int j = g.m; j < g.q; ++j) acc -= lngamma_complex(1.0 - g.b_params[j] + s);
    for (int k = g.n; k < g.p; ++k) acc -= lngamma_complex(g.a_params[k] - s);
    return std::exp(acc.real()) * std::cos(acc.imag());
  };
  double total = 0.0, peak = 0.0;
  const int cap = (panels_used && *panels_used > 0) ? *panels_used : max_panels;
  bool converged = false;
  int used = 0;
  for (int ip = 0; ip < cap; ++ip) {
    const double mid = ip + 0.5, half = 0.5;
    double contrib = 0.0;
    for (int i = 0; i < nodes; ++i) {
      contrib += half * rule.w[i] * integrand_re(mid + half * rule.x[i]);
    }
    total += contrib;
    peak = std::max(peak, std::abs(contrib));
    used = ip + 1;
    if (ip >= 5 &&
        std::abs(contrib) < tail_tol * std::max(peak, std::abs(total))) {
      converged = true;
      break;
    }
  }
  if (panels_used && *panels_used > 0) converged = true;  // fixed-length rerun
  if (!converged) {
    throw NumericError("meijer_g: non-convergent contour truncation");
  }
  if (panels_used) *panels_used = used;
  return total / kPi;
}

}  // namespace

GValue meijer_g(const MeijerGSpec& spec, const ContourPlan& plan) {
  spec.validate();
  plan.validate();
  const double c =
      std::isfinite(plan.offset_x) ? plan.offset_x : pick_offset_univariate(spec);
  {
    double lo, hi;
    univariate_window(spec, &lo, &hi);
    if (!(c > lo && c < hi)) {
      throw DomainError("meijer_g: contour offset outside the pole-free window");
    }
  }
  int panels = 0;
  const double value = univariate_pass(spec, c, plan.nodes_per_panel,
                                       plan.tail_tolerance, plan.max_panels,
                                       &panels);
  int fixed = panels;
  const double coarse = univariate_pass(
      spec, c, std::max(4, plan.nodes_per_panel / 2), plan.tail_tolerance,
      plan.max_panels, &fixed);
  return {value, std::abs(value - coarse) + 1e-14 * std::abs(value)};
}

// ---------------------------------------------------------------------------
// Bivariate Meijer G (single shared upper parameter)
// ---------------------------------------------------------------------------

namespace {

double phi_logmag_real(double c, const std::vector<double>& cl,
                       const std::vector<double>& dl) {
  double acc = real_lgamma_mag(dl[0] - c);
  for (double ck : cl) acc += real_lgamma_mag(1.0 - ck + c);
  for (std::size_t j = 1; j < dl.size(); ++j) {
    acc -= real_lgamma_mag(1.0 - dl[j] + c);
  }
  return acc;
}

std::complex<double> phi_log(std::complex<double> u,
                             const std::vector<double>& cl,
                             const std::vector<double>& dl) {
  std::complex<double> acc = lngamma_complex(dl[0] - u);
  for (double ck : cl) acc += lngamma_complex(1.0 - ck + u);
  for (std::size_t j = 1; j < dl.size(); ++j) {
    acc -= lngamma_complex(1.0 - dl[j] + u);
  }
  return acc;
}

struct Axis {
  std::vector<double> nodes;    // v >= 0 positions
  std::vector<double> weights;  // matching panel weights
};

// March unit panels along v >= 0 until the axis factor has decayed below
// threshold * peak (at least min_panels, at most cap panels).
Axis build_axis(const std::function<double(double)>& logmag_at, double cap_len,
                int nodes, double threshold, int min_panels) {
  const GlRule& rule = gauss_legendre(nodes);
  const int cap = static_cast<int>(std::ceil(cap_len));
  Axis ax;
  double peak = -std::numeric_limits<double>::infinity();
  for (int ip = 0; ip < cap; ++ip) {
    const double mid = ip + 0.5, half = 0.5;
    double panel_max = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < nodes; ++i) {
      const double v = mid + half * rule.x[i];
      ax.nodes.push_back(v);
      ax.weights.push_back(half * rule.w[i]);
      panel_max = std::max(panel_max, logmag_at(v));
    }
    peak = std::max(peak, panel_max);
    if (ip + 1 >= min_panels && panel_max < peak + std::log(threshold)) {
      return ax;
    }
  }
  // Ran to the truncation cap: acceptable only if the tail is already tiny.
  double last = logmag_at(cap_len);
  if (last > peak + std::log(1e-8)) {
    throw NumericError("meijer_g2: non-convergent contour truncation");
  }
  return ax;
}

double bivariate_pass(const MeijerG2Spec& g, double cs, double ct, int nodes,
                      double cap_len, double threshold) {
  const double lnx = std::log(g.x), lny = std::log(g.y);
  auto mag_x = [&](double v) {
    return phi_log(std::complex<double>(cs, v), g.upper_x, g.lower_x).real() +
           cs * lnx;
  };
  auto mag_y = [&](double v) {
    return phi_log(std::complex<double>(ct, v), g.upper_y, g.lower_y).real() +
           ct * lny;
  };
  const Axis ax = build_axis(mag_x, cap_len, nodes, threshold, 6);
  const Axis ay = build_axis(mag_y, cap_len, nodes, threshold, 6);

  const std::size_t nu = ax.nodes.size(), nv = ay.nodes.size();
  // Axis factors. s runs over v >= 0 only (the u >= 0 half is doubled by
  // symmetry); t runs over the full mirrored axis, with lg(t baring v < 0)
  // obtained by conjugation.
  std::vector<std::complex<double>> lgx(nu), lgy_pos(nv);
  for (std::size_t i = 0; i < nu; ++i) {
    const std::complex<double> s(cs, ax.nodes[i]);
    lgx[i] = phi_log(s, g.upper_x, g.lower_x) + s * lnx;
  }
  for (std::size_t j = 0; j < nv; ++j) {
    const std::complex<double> t(ct, ay.nodes[j]);
    lgy_pos[j] = phi_log(t, g.upper_y, g.lower_y) + t * lny;
  }

  const double a0 = g.shared + cs + ct;
  double total = 0.0;
  for (std::size_t i = 0; i < nu; ++i) {
    const double u = ax.nodes[i];
    const double wu = ax.weights[i];
    double row = 0.0;
    for (std::size_t j = 0; j < nv; ++j) {
      const double v = ay.nodes[j];
      // v > 0 branch
      const std::complex<double> core_p =
          lngamma_complex(std::complex<double>(a0, u + v));
      const std::complex<double> ep = core_p + lgx[i] + lgy_pos[j];
      double cell = std::exp(ep.real()) * std::cos(ep.imag());
      // v < 0 branch (conjugate axis factor, distinct core)
      const std::complex<double> core_m =
          lngamma_complex(std::complex<double>(a0, u - v));
      const std::complex<double> em = core_m + lgx[i] + std::conj(lgy_pos[j]);
      cell += std::exp(em.real()) * std::cos(em.imag());
      row += ay.weights[j] * cell;
    }
    total += wu * row;
  }
  return 2.0 * total / (4.0 * kPi * kPi);
}

void pick_offsets_bivariate(const MeijerG2Spec& g, double* cs, double* ct) {
  const double lox = *std::max_element(g.upper_x.begin(), g.upper_x.end()) - 1.0;
  const double hix = g.lower_x[0];
  const double loy = *std::max_element(g.upper_y.begin(), g.upper_y.end()) - 1.0;
  const double hiy = g.lower_y[0];
  const double mx = 0.1 * std::min(1.0, hix - lox);
  const double my = 0.1 * std::min(1.0, hiy - loy);
  const double lnx = std::log(g.x), lny = std::log(g.y);
  double best = std::numeric_limits<double>::infinity();
  bool found = false;
  for (int i = 0; i < 17; ++i) {
    const double s = lox + mx + (hix - mx - (lox + mx)) * i / 16.0;
    const double fx = phi_logmag_real(s, g.upper_x, g.lower_x) + s * lnx;
    for (int j = 0; j < 17; ++j) {
      const double t = loy + my + (hiy - my - (loy + my)) * j / 16.0;
      if (s + t + g.shared < 0.3) continue;  // keep the shared Gamma off its poles
      const double mag = fx + phi_logmag_real(t, g.upper_y, g.lower_y) +
                         t * lny + real_lgamma_mag(g.shared + s + t);
      if (std::isfinite(mag) && mag < best) {
        best = mag;
        *cs = s;
        *ct = t;
        found = true;
      }
    }
  }
  if (!found) {
    throw DomainError("meijer_g2: no admissible contour offsets (shared-parameter constraint)");
  }
}

}  // namespace

GValue meijer_g2(const MeijerG2Spec& spec, const ContourPlan& plan) {
  spec.validate();
  plan.validate();
  double cs, ct;
  if (std::isfinite(plan.offset_x) && std::isfinite(plan.offset_y)) {
    cs = plan.offset_x;
    ct = plan.offset_y;
  } else {
    pick_offsets_bivariate(spec, &cs, &ct);
  }
  const double threshold = 0.1 * plan.tail_tolerance;
  const double value = bivariate_pass(spec, cs, ct, plan.nodes_per_panel,
                                      plan.half_length, threshold);
  const double coarse =
      bivariate_pass(spec, cs, ct, std::max(4, plan.nodes_per_panel / 2),
                     plan.half_length, threshold);
  return {value, std::abs(value - coarse) + 1e-14 * std::abs(value)};
}

// ---------------------------------------------------------------------------
// Memoization (capacity-layer calls are heavily repeated across sum indices)
// ---------------------------------------------------------------------------

namespace {

std::mutex g_cache_mu;
std::unordered_map<std::string, GValue> g_gvalue_cache;
std::unordered_map<std::string, double> g_scalar_cache;

std::string make_key(char tag, const std::vector<double>& vals) {
  std::string key(1, tag);
  key.resize(1 + vals.size() * sizeof(double));
  std::memcpy(key.data() + 1, vals.data(), vals.size() * sizeof(double));
  return key;
}

}  // namespace

GValue meijer_g_cached(const MeijerGSpec& spec) {
  std::vector<double> vals = {static_cast<double>(spec.m),
                              static_cast<double>(spec.n),
                              static_cast<double>(spec.p),
                              static_cast<double>(spec.q)};
  vals.insert(vals.end(), spec.a_params.begin(), spec.a_params.end());
  vals.insert(vals.end(), spec.b_params.begin(), spec.b_params.end());
  vals.push_back(spec.argument);
  const std::string key = make_key('G', vals);
  {
    std::lock_guard<std::mutex> lk(g_cache_mu);
    auto it = g_gvalue_cache.find(key);
    if (it != g_gvalue_cache.end()) return it->second;
  }
  const GValue v = meijer_g(spec);
  std::lock_guard<std::mutex> lk(g_cache_mu);
  return g_gvalue_cache.emplace(key, v).first->second;
}

GValue meijer_g2_cached(const MeijerG2Spec& spec) {
  std::vector<double> vals = {spec.shared};
  auto push = [&vals](const std::vector<double>& v) {
    vals.push_back(static_cast<double>(v.size()));
    vals.insert(vals.end(), v.begin(), v.end());
  };
  push(spec.upper_x);
  push(spec.lower_x);
  push(spec.upper_y);
  push(spec.lower_y);
  vals.push_back(spec.x);
  vals.push_back(spec.y);
  const std::string key = make_key('2', vals);
  {
    std::lock_guard<std::mutex> lk(g_cache_mu);
    auto it = g_gvalue_cache.find(key);
    if (it != g_gvalue_cache.end()) return it->second;
  }
  const GValue v = meijer_g2(spec);
  std::lock_guard<std::mutex> lk(g_cache_mu);
  return g_gvalue_cache.emplace(key, v).first->second;
}

double tricomi_u_cached(double a, double b, double z) {
  const std::string key = make_key('U', {a, b, z});
  {
    std::lock_guard<std::mutex> lk(g_cache_mu);
    auto it = g_scalar_cache.find(key);
    if (it != g_scalar_cache.end()) return it->second;
  }
  const double v = tricomi_u(a, b, z);
  std::lock_guard<std::mutex> lk(g_cache_mu);
  return g_scalar_cache.emplace(key, v).first->second;
}

void clear_caches() {
  std::lock_guard<std::mutex> lk(g_cache_mu);
  g_gvalue_cache.clear();
  g_scalar_cache.clear();
}

std::size_t cache_entries() {
  std::lock_guard<std::mutex> lk(g_cache_mu);
  return g_gvalue_cache.size() + g_scalar_cache.size();
}

}  // namespace relaycap::specfun
