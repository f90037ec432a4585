#pragma once
// Special-functions kernel: gamma family on real and complex arguments,
// confluent (Tricomi) and Gauss hypergeometric functions, and univariate +
// bivariate Meijer G evaluated by Mellin-Barnes contour integration.
//
// All functions are pure; the memoization cache behind the expensive calls
// is mutex-protected, so concurrent callers are safe.

#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace relaycap {

// Arguments outside an operation's supported domain (poles, bad orders,
// invalid configurations). The CLI maps this to exit code 2.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An algorithm failed to reach its accuracy contract (non-convergent
// truncation, rank deficiency, inconsistent c.d.f. values). Exit code 3.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace specfun {

// Principal-branch log-gamma (real on the positive real axis, continuous
// elsewhere). exp(lngamma_complex(z)) == Gamma(z) to 1e-12 relative for
// |z| <= 50. Throws DomainError at non-positive integer z.
std::complex<double> lngamma_complex(std::complex<double> z);

// psi(x) for x > 0. Throws DomainError otherwise.
double digamma(double x);

// Upper incomplete gamma Gamma(a, x) for x > 0 and any real a, including
// the negative integers needed by the capacity formulas (a = -k). Negative
// orders use the downward recursion Gamma(a,x) = (Gamma(a+1,x) - x^a e^-x)/a.
double upper_incomplete_gamma(double a, double x);

// Tricomi confluent hypergeometric U(a, b; z) for z > 0. Supported region:
// a > -1 (a >= 0 is the documented surface; the (-1, 0) strip exists for the
// finite-difference parameter derivatives and is reached by a three-term
// recurrence in a). Throws DomainError outside the supported region.
double tricomi_u(double a, double b, double z);

// Parameter derivatives of U by central finite differences with one
// Richardson step; h = 1e-4 * max(1, |param|).
double tricomi_u_da(double a, double b, double z);
double tricomi_u_db(double a, double b, double z);

// Gauss hypergeometric 2F1(a, b; c; z) for z < 1 (z <= -1 handled by the
// Pfaff transformation and, deep in the left half-line, by Euler's integral).
// Throws DomainError when c is a non-positive integer.
double gauss_2f1(double a, double b, double c, double z);

// ---------------------------------------------------------------------------
// Meijer G machinery
// ---------------------------------------------------------------------------

// Univariate G^{m,n}_{p,q}(z | a; b), z > 0.
struct MeijerGSpec {
  int m = 0, n = 0, p = 0, q = 0;
  std::vector<double> a_params;  // length p
  std::vector<double> b_params;  // length q
  double argument = 1.0;

  void validate() const;  // throws DomainError on violations
};

// Two-variable G of the single-shared-upper-parameter type used throughout
// the capacity expressions:
//
//   (1/(2 pi i)^2) II  Gamma(shared + s + t) phi(s; upper_x, lower_x)
//                      phi(t; upper_y, lower_y) x^s y^t ds dt
//   phi(u; c, d) = Gamma(d_1 - u) prod_k Gamma(1 - c_k + u)
//                  / prod_{j >= 2} Gamma(1 - d_j + u)
//
// The convention is pinned by the runtime calibration against the direct
// quadrature oracles (see the analytic layer).
struct MeijerG2Spec {
  double shared = 0.0;
  std::vector<double> upper_x;  // per-variable upper parameter group
  std::vector<double> lower_x;  // per-variable lower group; first entry is
                                // the projecting parameter (one Gamma(d1-u))
  std::vector<double> upper_y;
  std::vector<double> lower_y;
  double x = 1.0;
  double y = 1.0;

  void validate() const;
};

// Contour discretization. NaN offsets mean "auto": the offset is placed at
// the real-axis magnitude minimum inside the pole-free window, which keeps
// the oscillatory tails from cancelling catastrophically.
struct ContourPlan {
  double offset_x = std::numeric_limits<double>::quiet_NaN();
  double offset_y = std::numeric_limits<double>::quiet_NaN();
  double half_length = 22.0;      // imaginary-axis truncation per contour
  int nodes_per_panel = 32;       // Gauss-Legendre nodes per unit panel
  double tail_tolerance = 1e-16;  // drop-off that ends panel marching
  int max_panels = 400;           // univariate marching cap

  void validate() const;
};

struct GValue {
  double value = 0.0;
  double error = 0.0;  // |full - half-node| + 1e-14 |value|
};

GValue meijer_g(const MeijerGSpec& spec, const ContourPlan& plan = {});
GValue meijer_g2(const MeijerG2Spec& spec, const ContourPlan& plan = {});

// Memoized fronts used by the capacity layer (same results, cached on the
// full parameter tuple; default plans only).
GValue meijer_g_cached(const MeijerGSpec& spec);
GValue meijer_g2_cached(const MeijerG2Spec& spec);
double tricomi_u_cached(double a, double b, double z);
void clear_caches();
std::size_t cache_entries();

// ---------------------------------------------------------------------------
// Double-exponential quadrature (shipped: the analytic layer's oracles are
// built on these, not on test-only code).
// ---------------------------------------------------------------------------

// Integral of f over (0, inf) via the exp-sinh transform.
double integrate_semi_infinite(const std::function<double(double)>& f,
                               double rel_tol = 1e-12);

// Integral of f over (lo, hi) via the tanh-sinh transform.
double integrate_finite(const std::function<double(double)>& f, double lo,
                        double hi, double rel_tol = 1e-12);

}  // namespace specfun
}  // namespace relaycap
