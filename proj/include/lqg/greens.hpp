#pragma once

// Neumann Green's function on the annulus.
//
// Two representations are kept side by side:
//   * the full mode sum      G = g0 + 2 sum_n gt_n(r,rho) cos n(theta-theta')
//   * the split form         G = g0 + 2 sum_n g_n(r,rho) cos n(...) + log kernel
// where the regular modes g_n decay geometrically like (a/b)^{2n}/n and the
// closed-form log kernel carries the diagonal singularity exactly.  The split
// form is the workhorse; the full mode sum is retained as an independent
// cross-check oracle.
//
// Also here: the metric-dependent Green's function G_g (boundary-average
// subtraction), the Neumann boundary weight c_g, and the regularization
// constants g_P, h, h_boundary of the circle-average limits.

#include <cmath>
#include <optional>
#include <stdexcept>

#include "lqg/geometry.hpp"
#include "lqg/quadrature.hpp"

namespace lqg {

struct GreenSeriesConfig {
  int n_modes = 64;             // minimum number of modes summed
  double tail_tolerance = 1e-10;
  int max_modes = 20000;
};

// ---------------------------------------------------------------------------
// Mode kernels (general radii a < b, symmetric choice alpha = 1/(a+b))

// Full mode kernel gt_n for n >= 1, g0 for n = 0.  Evaluated in ratio form so
// large n and large b stay in range.
inline double mode_covariance(int n, double r, double rho, const AnnulusGeometry& geom) {
  const double a = geom.a, b = geom.b;
  if (r < a - kBoundaryTol || r > b + kBoundaryTol || rho < a - kBoundaryTol ||
      rho > b + kBoundaryTol)
    throw std::domain_error("mode_covariance: radius outside [a,b]");
  if (n < 0) throw std::invalid_argument("mode_covariance: n must be >= 0");
  if (r > rho) std::swap(r, rho);
  if (n == 0)
    return (a * a * std::log(r / a) + b * b * std::log(b / rho) + a * b * std::log(r / rho)) /
           ((a + b) * (a + b));
  const double q2n = std::pow(a / b, 2 * n);
  return (1.0 + std::pow(rho / b, 2 * n)) *
         (std::pow(r / rho, n) + std::pow(a * a / (r * rho), n)) / (2.0 * n * (1.0 - q2n));
}

// Pre-symmetrized zero mode with a free inner Neumann constant alpha; the
// outer constant is forced to beta = (alpha a - 1)/b.  alpha = 1/(a+b)
// recovers the symmetric kernel above.
inline double g0_general(double r, double rho, double a, double b, double alpha) {
  double v = alpha * a * (a * std::log(r / a) + b * std::log(r / b)) / (a + b) -
             b / (a + b) * std::log(rho / b);
  if (r >= rho) v += std::log(rho / r);
  return v;
}

// Regular modes g_n = gt_n * (a/b)^{2n}; only the standard annulus (1, tau)
// is needed downstream.
inline double regular_mode(int n, double r, double rho, double tau) {
  if (n == 0)
    throw std::invalid_argument("regular_mode: n = 0 is the zero mode (use mode_covariance)");
  const AnnulusGeometry geom(1.0, tau);
  return mode_covariance(n, r, rho, geom) * std::pow(1.0 / tau, 2 * n);
}

// Geometric tail bound for 2 sum_{n>N} g_n cos: terms are bounded by
// 4 q^{2n} / (n (1-q^2)) with q = a/b.
inline double regular_tail_bound(int n_summed, double q) {
  const double q2 = q * q;
  const double head = std::pow(q2, n_summed + 1);
  return 4.0 * head / ((n_summed + 1) * (1.0 - q2) * (1.0 - q2));
}

// Tail bound for the full mode sum at a given pair.  Geometric with ratio
// s = max of the four component ratios; near the diagonal (s -> 1) an
// Abel-summation bound in the angular separation takes over.
inline double tilde_tail_bound(int n_summed, double r, double rho, double dtheta,
                               const AnnulusGeometry& geom) {
  if (r > rho) std::swap(r, rho);
  const double a = geom.a, b = geom.b;
  const double s = std::max(std::max(r / rho, a * a / (r * rho)),
                            std::max(r * rho / (b * b), a * a * rho / (b * b * r)));
  const double pre = 4.0 / ((n_summed + 1) * (1.0 - std::pow(a / b, 2)));
  if (s < 1.0 - 1e-9) return pre * std::pow(s, n_summed + 1) / (1.0 - s);
  const double sep = std::abs(2.0 * std::sin(0.5 * dtheta));
  if (sep < 1e-12) return std::numeric_limits<double>::infinity();
  return 2.0 * pre / sep;
}

// ---------------------------------------------------------------------------
// Closed-form log kernel

namespace detail {
// Squared distance factors of the log kernel, written as
// (difference)^2 + 4 x y sin^2(dtheta/2) so that near-coincident points do
// not cancel, and depending on (r, rho, dtheta) only so that symmetry and
// rotation invariance are exact in floating point.
struct LogKernelParts {
  double a2;  // |1 - z conj(z')|^2
  double b2;  // |tau^2 - z conj(z')|^2
  double d2;  // |z - z'|^2
  double e2;  // |tau^2 z - z'|^2  (r < rho)  or  |z - tau^2 z'|^2  (r > rho)
};

inline LogKernelParts log_kernel_parts(double r, double rho, double dtheta, double tau) {
  LogKernelParts p;
  const double rr = r * rho, t2 = tau * tau;
  const double s = std::sin(0.5 * dtheta);
  const double s2 = 4.0 * s * s;
  p.a2 = (1.0 - rr) * (1.0 - rr) + rr * s2;
  p.b2 = (t2 - rr) * (t2 - rr) + t2 * rr * s2;
  p.d2 = (r - rho) * (r - rho) + rr * s2;
  if (r <= rho)
    p.e2 = (t2 * r - rho) * (t2 * r - rho) + t2 * rr * s2;
  else
    p.e2 = (r - t2 * rho) * (r - t2 * rho) + t2 * rr * s2;
  return p;
}
}  // namespace detail

// ln( tau^4 |z|^2 |z'|^2 / (|1 - z conj z'| |tau^2 - z conj z'| |z - z'| D) ).
inline double log_kernel(const PolarPoint& z, const PolarPoint& zp, double tau) {
  const auto p = detail::log_kernel_parts(z.r, zp.r, z.theta - zp.theta, tau);
  if (p.d2 <= 0.0) throw std::domain_error("log_kernel: coincident points (log singularity)");
  return std::log(tau * tau * tau * tau * z.r * z.r * zp.r * zp.r) -
         0.5 * (std::log(p.a2) + std::log(p.b2) + std::log(p.d2) + std::log(p.e2));
}

// Log kernel with the diagonal singularity removed: log_kernel + ln|z - z'|.
// Smooth across the diagonal; still singular where |1 - z conj z'| vanishes
// (both points on the unit circle).
inline double log_kernel_regular(const PolarPoint& z, const PolarPoint& zp, double tau) {
  const auto p = detail::log_kernel_parts(z.r, zp.r, z.theta - zp.theta, tau);
  return std::log(tau * tau * tau * tau * z.r * z.r * zp.r * zp.r) -
         0.5 * (std::log(p.a2) + std::log(p.b2) + std::log(p.e2));
}

// ---------------------------------------------------------------------------
// Assemblies

namespace detail {
// sum_{n=1..} coeff_n cos(n dtheta) with Chebyshev recurrence; f(n) yields the
// coefficient.  Terminates on the provided tail bound.
template <class CoefFn, class TailFn>
double cosine_series(CoefFn&& coef, TailFn&& tail, double dtheta, const GreenSeriesConfig& cfg) {
  const double c1 = std::cos(dtheta);
  double cn_1 = 1.0, cn = c1;  // cos(0), cos(dtheta)
  double sum = 0.0;
  for (int n = 1; n <= cfg.max_modes; ++n) {
    sum += coef(n) * cn;
    if (n >= cfg.n_modes && tail(n) <= cfg.tail_tolerance) break;
    const double next = 2.0 * c1 * cn - cn_1;
    cn_1 = cn;
    cn = next;
  }
  return sum;
}
}  // namespace detail

// Split representation: g0 + 2 sum g_n cos + log kernel.
inline double green_flat(const PolarPoint& z, const PolarPoint& zp, double tau,
                         const GreenSeriesConfig& cfg = {}) {
  const AnnulusGeometry geom(1.0, tau);
  const double dtheta = z.theta - zp.theta;
  const double series = detail::cosine_series(
      [&](int n) { return 2.0 * regular_mode(n, z.r, zp.r, tau); },
      [&](int n) { return regular_tail_bound(n, 1.0 / tau); }, dtheta, cfg);
  return mode_covariance(0, z.r, zp.r, geom) + series + log_kernel(z, zp, tau);
}

// Full mode-sum representation (cross-validation oracle).
inline double green_flat_modes(const PolarPoint& z, const PolarPoint& zp, double tau,
                               const GreenSeriesConfig& cfg = {}) {
  const AnnulusGeometry geom(1.0, tau);
  const double dtheta = z.theta - zp.theta;
  const double series = detail::cosine_series(
      [&](int n) { return 2.0 * mode_covariance(n, z.r, zp.r, geom); },
      [&](int n) { return tilde_tail_bound(n, z.r, zp.r, dtheta, geom); }, dtheta, cfg);
  return mode_covariance(0, z.r, zp.r, geom) + series;
}

// G + ln|z - z'| (regular across the diagonal).
inline double green_regular(const PolarPoint& z, const PolarPoint& zp, double tau,
                            const GreenSeriesConfig& cfg = {}) {
  const AnnulusGeometry geom(1.0, tau);
  const double dtheta = z.theta - zp.theta;
  const double series = detail::cosine_series(
      [&](int n) { return 2.0 * regular_mode(n, z.r, zp.r, tau); },
      [&](int n) { return regular_tail_bound(n, 1.0 / tau); }, dtheta, cfg);
  return mode_covariance(0, z.r, zp.r, geom) + series + log_kernel_regular(z, zp, tau);
}

// ---------------------------------------------------------------------------
// Metric-dependent Green's function and Neumann weight

// Boundary integral int f(x) G(z, x) d lambda_{boundary g}(x).  When z lies on
// one of the circles the same-circle integrand carries an integrable log
// singularity at x = z, handled by grading the angular quadrature toward it;
// the opposite circle is smooth and uses the uniform rule.
template <class F>
double integrate_boundary_green(const PolarPoint& z, F&& f, const MetricSpec& m, double tau,
                                const GreenSeriesConfig& cfg = {}, int order = 256) {
  const AnnulusGeometry geom(1.0, tau);
  double total = 0.0;
  for (double rb : {1.0, tau}) {
    // graded rule whenever z is close enough to the circle that the uniform
    // rule would under-resolve the log peak at x ~ z
    const bool z_on_this = std::abs(z.r - rb) < 4.0 * kTwoPi * rb / order;
    if (!z_on_this) {
      const double dth = kTwoPi / order;
      for (int j = 0; j < order; ++j) {
        const PolarPoint x(rb, (j + 0.5) * dth);
        total += f(x) * green_flat(z, x, tau, cfg) * std::exp(0.5 * m.phi(x)) * rb * dth;
      }
    } else {
      auto g = [&](double u) {
        const PolarPoint x(rb, z.theta + u);
        return f(x) * green_flat(z, x, tau, cfg) * std::exp(0.5 * m.phi(x)) * rb;
      };
      total += log_graded_quad(g, 0.0, kTwoPi, 40, 16);
    }
  }
  return total;
}

// G_g(z,z') = G - m_bd(G(z,.)) - m_bd(G(.,z')) + m_bd(m_bd(G)), boundary
// averages in d lambda_{boundary g}.  Reduces to G for the flat metric, where
// the boundary integral of G vanishes identically.  The double boundary
// average is metric-only, so it is computed once per context.
class MetricGreen {
 public:
  MetricGreen(MetricSpec m, double tau, GreenSeriesConfig cfg = {}, int quad_order = 128)
      : m_(std::move(m)), tau_(tau), cfg_(cfg), order_(quad_order) {
    if (m_.is_flat()) return;
    const AnnulusGeometry geom(1.0, tau_);
    length_ = boundary_length(geom, m_, Domain::FullBoundary, 2 * order_);
    double_avg_ = integrate([&](const PolarPoint& x) { return row_average(x); }, geom, m_,
                            Domain::FullBoundary, 2, order_) /
                  length_;
  }

  double row_average(const PolarPoint& z) const {
    if (m_.is_flat()) return 0.0;
    return integrate_boundary_green(
               z, [](const PolarPoint&) { return 1.0; }, m_, tau_, cfg_, order_) /
           length_;
  }

  double double_average() const { return double_avg_; }
  double boundary_len() const { return length_; }

  double operator()(const PolarPoint& z, const PolarPoint& zp) const {
    const double g = green_flat(z, zp, tau_, cfg_);
    if (m_.is_flat()) return g;
    return g - row_average(z) - row_average(zp) + double_avg_;
  }

 private:
  MetricSpec m_;
  double tau_;
  GreenSeriesConfig cfg_;
  int order_;
  double length_ = 0.0;
  double double_avg_ = 0.0;
};

inline double green_metric(const PolarPoint& z, const PolarPoint& zp, const MetricSpec& m,
                           double tau, const GreenSeriesConfig& cfg = {}, int quad_order = 128) {
  if (m.is_flat()) return green_flat(z, zp, tau, cfg);
  return MetricGreen(m, tau, cfg, quad_order)(z, zp);
}

// Boundary weight c_g of the Neumann problem.  The boundary lengths enter
// normalized by the total boundary length in the metric g, which is the
// normalization under which c_g = 1 holds exactly for the flat metric.
inline double c_weight(const PolarPoint& z, const MetricSpec& m, double tau,
                       int quad_order = 256) {
  const AnnulusGeometry geom(1.0, tau);
  if (!geom.on_boundary(z)) throw std::invalid_argument("c_weight: point must be on the boundary");
  if (m.is_flat()) return 1.0;
  const double l_in = boundary_length(geom, m, Domain::InnerBoundary, quad_order);
  const double l_out = boundary_length(geom, m, Domain::OuterBoundary, quad_order);
  const double total = l_in + l_out;
  const double e = std::exp(-0.5 * m.phi(z));
  if (geom.on_inner_boundary(z)) return e * (1.0 + (tau * l_in - l_out) / total);
  return e * (1.0 + (-l_in + l_out / tau) / total);
}

// ---------------------------------------------------------------------------
// Regularization constants of the circle-average limits

namespace detail {

// Diagonal regular-mode series 2 sum_n g_n(r, r); geometric in tau^{-2n}.
inline double diagonal_mode_series(double r, double tau, const GreenSeriesConfig& cfg) {
  double sum = 0.0;
  for (int n = 1; n <= cfg.max_modes; ++n) {
    sum += 2.0 * regular_mode(n, r, r, tau);
    if (n >= 8 && regular_tail_bound(n, 1.0 / tau) <= cfg.tail_tolerance) break;
  }
  return sum;
}

// Nested quadrature of the two angular double integrals over [0,pi]^2:
//   I_diff = II ln|e^{i th} - e^{i th'}|,   I_sum = II ln|e^{i th} - e^{-i th'}|.
// Both have integrable log singularities (along the diagonal, and at the two
// corners); the inner integral is split at the singular point and graded.
struct AngularIntegrals {
  double i_diff;
  double i_sum;
};

inline AngularIntegrals angular_double_integrals(int outer_order, int levels = 36) {
  auto inner = [&](double th, bool sum_kernel) {
    auto f = [&](double tp) {
      const double arg = sum_kernel ? 0.5 * (th + tp) : 0.5 * (th - tp);
      return std::log(2.0 * std::abs(std::sin(arg)) + 1e-300);
    };
    // singular point: tp = th (diff kernel); tp = 0 / 2pi - th ~ endpoints (sum).
    if (!sum_kernel && th > 1e-12 && th < kPi - 1e-12)
      return log_graded_quad(f, 0.0, th, levels) + log_graded_quad(f, th, kPi, levels);
    return log_graded_quad(f, 0.0, kPi, levels);
  };
  AngularIntegrals out{0.0, 0.0};
  const auto& gl = gauss_legendre(outer_order);
  for (int i = 0; i < outer_order; ++i) {
    const double th = 0.5 * kPi * (1.0 + gl.nodes[i]);
    const double w = 0.5 * kPi * gl.weights[i];
    out.i_diff += w * inner(th, false);
    out.i_sum += w * inner(th, true);
  }
  return out;
}

inline const AngularIntegrals& cached_angular_integrals() {
  static const AngularIntegrals v = angular_double_integrals(96);
  return v;
}

}  // namespace detail

struct RegularizationConstants {
  double g_p = 0.0;           // 1 / (|1 - |x|^2| |tau^2 - |x|^2|)
  bool g_p_infinite = false;  // set for boundary points
  double h = 0.0;
  std::optional<double> h_boundary;  // boundary points only
};

inline double g_p_weight(const PolarPoint& x, double tau) {
  const double r2 = x.r * x.r;
  return 1.0 / (std::abs(1.0 - r2) * std::abs(tau * tau - r2));
}

// h(x) = g0(r,r) + 2 sum g_n(r,r) + ln(tau^4 r^3 / |tau^2-1|).
inline double h_interior(double r, double tau, const GreenSeriesConfig& cfg = {}) {
  const AnnulusGeometry geom(1.0, tau);
  return mode_covariance(0, r, r, geom) + detail::diagonal_mode_series(r, tau, cfg) +
         std::log(tau * tau * tau * tau * r * r * r / std::abs(tau * tau - 1.0));
}

// h_boundary: same diagonal mode series plus the boundary log constants and
// the angular double integral over the half-circle arc.  With the arcs
// parametrized consistently the two angular integrals cancel; both are still
// evaluated by nested quadrature rather than assumed.
inline double h_boundary(const PolarPoint& x, double tau, const GreenSeriesConfig& cfg = {}) {
  const AnnulusGeometry geom(1.0, tau);
  if (!geom.on_boundary(x)) throw std::invalid_argument("h_boundary: point must be on boundary");
  const bool inner = geom.on_inner_boundary(x);
  const double rb = inner ? 1.0 : tau;
  const double t2m1 = tau * tau - 1.0;
  const double logs = inner ? std::log(std::pow(tau, 4) / (t2m1 * t2m1))
                            : std::log(std::pow(tau, 6) / (t2m1 * t2m1));
  const auto& ang = detail::cached_angular_integrals();
  const double angular = -(ang.i_diff + ang.i_sum) / (kPi * kPi);
  return mode_covariance(0, rb, rb, geom) + detail::diagonal_mode_series(rb, tau, cfg) + logs +
         angular;
}

inline RegularizationConstants regularization_constants(const PolarPoint& x, double tau,
                                                        const GreenSeriesConfig& cfg = {}) {
  const AnnulusGeometry geom(1.0, tau);
  if (!geom.contains(x))
    throw std::domain_error("regularization_constants: point outside annulus");
  RegularizationConstants out;
  if (geom.on_boundary(x)) {
    out.g_p_infinite = true;
    out.g_p = std::numeric_limits<double>::infinity();
    out.h = h_interior(x.r, tau, cfg);  // finite diagonal series still defined
    out.h_boundary = h_boundary(x, tau, cfg);
  } else {
    out.g_p = g_p_weight(x, tau);
    out.h = h_interior(x.r, tau, cfg);
  }
  return out;
}

}  // namespace lqg
