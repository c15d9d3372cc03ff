#pragma once

// Sampling the zero-boundary-mean Gaussian free field on the annulus.
//
// The field is synthesized per angular mode,
//     X(r, theta) = Y0(r) + sum_n [ Yc_n(r) cos n theta + Ys_n(r) sin n theta ],
// with independent radial Gaussian vectors of covariance g0 (mode 0) and
// 2 gt_n (each of cos/sin), factorized once per radial node set by Cholesky
// with the escalating jitter ladder.
//
// Circle averages come in two flavors:
//   * CircleAverageSet - exact covariance of the epsilon-circle averages by
//     quadrature of G over the (possibly clipped) arcs; the oracle path.
//   * grid averaging of a sampled field (see lattice.hpp) for large lattices.

#include <cmath>
#include <cstdint>
#include <array>
#include <map>
#include <stdexcept>
#include <vector>

#include "lqg/geometry.hpp"
#include "lqg/greens.hpp"
#include "lqg/linalg.hpp"
#include "lqg/quadrature.hpp"
#include "lqg/rng.hpp"
#include "lqg/stats.hpp"

namespace lqg {

// ---------------------------------------------------------------------------
// Mode-coefficient sampler

struct ModeCoefficients {
  Vector y0;            // mode 0 at the radial nodes
  std::vector<Vector> yc, ys;  // modes 1..N
  int n_modes = 0;

  // Field value at (node index, angle).
  double value(Eigen::Index node, double theta) const {
    double v = y0[node];
    const double c1 = std::cos(theta), s1 = std::sin(theta);
    double cn = c1, sn = s1;
    for (int n = 1; n <= n_modes; ++n) {
      v += yc[n - 1][node] * cn + ys[n - 1][node] * sn;
      const double c2 = cn * c1 - sn * s1;
      sn = sn * c1 + cn * s1;
      cn = c2;
    }
    return v;
  }
};

class FieldSampler {
 public:
  FieldSampler(double tau, std::vector<double> radial_nodes, int n_modes)
      : tau_(tau), nodes_(std::move(radial_nodes)), n_modes_(n_modes) {
    if (n_modes_ < 1) throw std::invalid_argument("FieldSampler: n_modes must be >= 1");
    if (nodes_.size() < 2) throw std::invalid_argument("FieldSampler: need >= 2 radial nodes");
    const AnnulusGeometry geom(1.0, tau_);
    const auto dim = static_cast<Eigen::Index>(nodes_.size());
    Matrix cov(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i)
      for (Eigen::Index j = 0; j <= i; ++j) {
        cov(i, j) = mode_covariance(0, nodes_[i], nodes_[j], geom);
        cov(j, i) = cov(i, j);
      }
    auto c0 = cholesky_with_jitter(cov);
    l0_ = c0.lower;
    jitter0_ = c0.jitter;
    ln_.reserve(n_modes_);
    for (int n = 1; n <= n_modes_; ++n) {
      for (Eigen::Index i = 0; i < dim; ++i)
        for (Eigen::Index j = 0; j <= i; ++j) {
          cov(i, j) = 2.0 * mode_covariance(n, nodes_[i], nodes_[j], geom);
          cov(j, i) = cov(i, j);
        }
      ln_.push_back(cholesky_with_jitter(cov).lower);
    }
  }

  const std::vector<double>& nodes() const { return nodes_; }
  int n_modes() const { return n_modes_; }
  double tau() const { return tau_; }
  double mode0_jitter() const { return jitter0_; }

  Eigen::Index node_index(double r) const {
    for (std::size_t i = 0; i < nodes_.size(); ++i)
      if (std::abs(nodes_[i] - r) < 1e-12) return static_cast<Eigen::Index>(i);
    throw std::invalid_argument("FieldSampler: radius is not a node");
  }

  // One draw; mode m consumes normals from substream(m) of the given stream.
  ModeCoefficients sample(const RngStream& stream) const {
    const auto dim = static_cast<Eigen::Index>(nodes_.size());
    ModeCoefficients mc;
    mc.n_modes = n_modes_;
    Vector z(dim);
    auto draw = [&](std::uint64_t tag, const Matrix& lower) {
      RngSequence seq(stream.substream(tag));
      for (Eigen::Index i = 0; i < dim; ++i) z[i] = seq.normal();
      return Vector(lower * z);
    };
    mc.y0 = draw(0, l0_);
    mc.yc.reserve(n_modes_);
    mc.ys.reserve(n_modes_);
    for (int n = 1; n <= n_modes_; ++n) {
      mc.yc.push_back(draw(2 * n, ln_[n - 1]));
      mc.ys.push_back(draw(2 * n + 1, ln_[n - 1]));
    }
    return mc;
  }

  // Exact variance of the weighted boundary integral 2 pi (Y0(1) + tau Y0(tau))
  // under the factorized (jittered) covariance; vanishes analytically.
  double boundary_mean_variance() const {
    Vector v = Vector::Zero(static_cast<Eigen::Index>(nodes_.size()));
    v[node_index(1.0)] = kTwoPi;
    v[node_index(tau_)] = kTwoPi * tau_;
    return (l0_.transpose() * v).squaredNorm();
  }

 private:
  double tau_;
  std::vector<double> nodes_;
  int n_modes_;
  Matrix l0_;
  std::vector<Matrix> ln_;
  double jitter0_ = 0.0;
};

// ---------------------------------------------------------------------------
// Materialized field sample on a polar grid (CLI / covariance tests)

struct FieldSample {
  std::vector<double> radial_nodes;
  std::vector<double> angular_nodes;
  Matrix values;  // radial x angular
  int n_modes = 0;
  std::uint64_t seed = 0;

  double boundary_average(double tau) const {
    const double dth = kTwoPi / static_cast<double>(angular_nodes.size());
    double s = 0.0;
    for (Eigen::Index j = 0; j < values.cols(); ++j)
      s += values(0, j) * 1.0 * dth + values(values.rows() - 1, j) * tau * dth;
    return s;
  }
};

// Radial nodes: both boundary circles plus Gauss-Legendre interior nodes.
inline std::vector<double> default_radial_nodes(double tau, int n_radial) {
  if (n_radial < 2) throw std::invalid_argument("default_radial_nodes: need n_radial >= 2");
  std::vector<double> nodes;
  nodes.push_back(1.0);
  if (n_radial > 2) {
    const auto& gl = gauss_legendre(n_radial - 2);
    for (double x : gl.nodes) nodes.push_back(0.5 * (1.0 + tau) + 0.5 * (tau - 1.0) * x);
  }
  nodes.push_back(tau);
  return nodes;
}

inline FieldSample sample_field(const AnnulusGeometry& geom, int n_radial, int n_angular,
                                int n_modes, const RngStream& stream) {
  const double tau = geom.tau();
  const FieldSampler sampler(tau, default_radial_nodes(tau, n_radial), n_modes);
  const auto mc = sampler.sample(stream);
  FieldSample out;
  out.radial_nodes = sampler.nodes();
  out.n_modes = n_modes;
  out.seed = stream.key();
  out.angular_nodes.resize(n_angular);
  for (int j = 0; j < n_angular; ++j) out.angular_nodes[j] = j * kTwoPi / n_angular;
  out.values.resize(static_cast<Eigen::Index>(out.radial_nodes.size()), n_angular);
  for (Eigen::Index i = 0; i < out.values.rows(); ++i)
    for (int j = 0; j < n_angular; ++j) out.values(i, j) = mc.value(i, out.angular_nodes[j]);
  return out;
}

// ---------------------------------------------------------------------------
// Exact circle-average covariance

// Arc of the circle |z - x| = delta inside the closed annulus, stored as
// (center angle, half width) in the local angle psi of x + delta e^{i psi}.
struct ClippedArc {
  double delta = 0.0;
  double psi_center = 0.0;
  double half_width = kPi;
  bool clipped = false;

  double length() const { return 2.0 * half_width * delta; }
};

inline ClippedArc clip_arc(const PolarPoint& x, double delta, double tau) {
  ClippedArc arc;
  arc.delta = delta;
  const double r = x.r;
  const double c_lo = (1.0 - r * r - delta * delta) / (2.0 * r * delta);
  const double c_hi = (tau * tau - r * r - delta * delta) / (2.0 * r * delta);
  const bool clip_in = c_lo > -1.0, clip_out = c_hi < 1.0;
  if (c_lo >= 1.0 || c_hi <= -1.0)
    throw std::domain_error("clip_arc: arc lies entirely outside the closed annulus");
  if (clip_in && clip_out)
    throw std::domain_error("clip_arc: arc clipped by both boundaries (epsilon too large)");
  if (clip_in) {
    arc.clipped = true;
    arc.psi_center = 0.0;  // outward of the inner circle
    arc.half_width = std::acos(std::min(1.0, std::max(-1.0, c_lo)));
  } else if (clip_out) {
    arc.clipped = true;
    arc.psi_center = kPi;
    arc.half_width = kPi - std::acos(std::min(1.0, std::max(-1.0, c_hi)));
  }
  return arc;
}

// Point on the arc at local angle psi, in global polar coordinates.
inline PolarPoint arc_point(const PolarPoint& x, double delta, double psi) {
  const double px = x.r + delta * std::cos(psi);  // frame aligned with x
  const double py = delta * std::sin(psi);
  return PolarPoint(std::sqrt(px * px + py * py), x.theta + std::atan2(py, px));
}

struct CircleAverageSet {
  std::vector<PolarPoint> centers;
  double epsilon = 0.0;
  double tau = 2.0;
  std::vector<ClippedArc> arcs;  // per center, radius epsilon * g(x)^{-1/2}
  Matrix covariance;
};

namespace detail {

// (1/L^2) II over [-w,w]^2 of ln(2 |sin((psi-psi')/2)|) via the difference
// variable with triangular weight.
inline double arc_log_diff_mean(double w) {
  auto f = [&](double d) {
    return (2.0 * w - std::abs(d)) * std::log(2.0 * std::abs(std::sin(0.5 * d)) + 1e-300);
  };
  const double v = log_graded_quad(f, -2.0 * w, 0.0, 40, 12) + log_graded_quad(f, 0.0, 2.0 * w, 40, 12);
  return v / (4.0 * w * w);
}

// Graded 1D nodes over [c-w, c+w], refined toward both ends.
inline void graded_nodes(double c, double w, int levels, int order, std::vector<double>& psi,
                         std::vector<double>& wt) {
  const auto& gl = gauss_legendre(order);
  psi.clear();
  wt.clear();
  auto panel = [&](double lo, double hi) {
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    for (int i = 0; i < order; ++i) {
      psi.push_back(mid + half * gl.nodes[i]);
      wt.push_back(half * gl.weights[i]);
    }
  };
  double lo = c - w;
  for (int k = levels; k >= 1; --k) {
    const double hi = c - w + w * std::pow(0.5, k - 1);
    panel(lo, hi);
    lo = hi;
  }
  double hi = c + w;
  for (int k = levels; k >= 1; --k) {
    const double lo2 = c + w - w * std::pow(0.5, k - 1);
    panel(lo2, hi);
    hi = lo2;
  }
}

// Variance of the circle average of the field over one arc:
//   full circle : -ln delta + mean of (G + ln|u-v|) over the circle pair
//   clipped arc : -ln delta - log-diff mean + graded 2D mean of (G + ln|u-v|)
inline double arc_variance(const PolarPoint& x, const ClippedArc& arc, double tau,
                           const GreenSeriesConfig& cfg, int order) {
  if (!arc.clipped) {
    double s = 0.0;
    const double dpsi = kTwoPi / order;
    std::vector<PolarPoint> pts(order);
    for (int i = 0; i < order; ++i) pts[i] = arc_point(x, arc.delta, (i + 0.5) * dpsi);
    for (int i = 0; i < order; ++i)
      for (int j = 0; j < order; ++j) s += green_regular(pts[i], pts[j], tau, cfg);
    return -std::log(arc.delta) + s / (static_cast<double>(order) * order);
  }
  std::vector<double> psi, wt;
  graded_nodes(arc.psi_center, arc.half_width, 22, 6, psi, wt);
  std::vector<PolarPoint> pts(psi.size());
  for (std::size_t i = 0; i < psi.size(); ++i) pts[i] = arc_point(x, arc.delta, psi[i]);
  double s = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i)
    for (std::size_t j = 0; j < psi.size(); ++j)
      s += wt[i] * wt[j] * green_regular(pts[i], pts[j], tau, cfg);
  const double l_ang = 2.0 * arc.half_width;
  return -std::log(arc.delta) - arc_log_diff_mean(arc.half_width) + s / (l_ang * l_ang);
}

// Cross-covariance of two arc averages by midpoint double quadrature of G.
inline double arc_cross_covariance(const PolarPoint& xi, const ClippedArc& ai,
                                   const PolarPoint& xj, const ClippedArc& aj, double tau,
                                   const GreenSeriesConfig& cfg, int order) {
  double s = 0.0;
  for (int a = 0; a < order; ++a) {
    const double pa = ai.psi_center + ai.half_width * (2.0 * (a + 0.5) / order - 1.0);
    const PolarPoint u = arc_point(xi, ai.delta, pa);
    for (int b = 0; b < order; ++b) {
      const double pb = aj.psi_center + aj.half_width * (2.0 * (b + 0.5) / order - 1.0);
      const PolarPoint v = arc_point(xj, aj.delta, pb);
      s += green_flat(u, v, tau, cfg);
    }
  }
  return s / (static_cast<double>(order) * order);
}

}  // namespace detail

// Exact covariance matrix of the metric-regularized circle averages
// X_{g,eps}(x_i).  Entries depend only on (r_i, r_j, delta_i, delta_j,
// |dtheta|), which is exploited by memoization on ring lattices.
inline CircleAverageSet circle_average_covariance(const std::vector<PolarPoint>& centers,
                                                  double epsilon, const MetricSpec& m, double tau,
                                                  int quad_order = 32,
                                                  const GreenSeriesConfig& cfg = {}) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("circle_average_covariance: epsilon <= 0");
  CircleAverageSet set;
  set.centers = centers;
  set.epsilon = epsilon;
  set.tau = tau;
  const auto n = static_cast<Eigen::Index>(centers.size());
  set.arcs.reserve(centers.size());
  for (const auto& x : centers)
    set.arcs.push_back(clip_arc(x, epsilon * std::exp(-0.5 * m.phi(x)), tau));

  set.covariance.resize(n, n);
  using Key = std::array<long long, 5>;
  std::map<Key, double> diag_memo, cross_memo;
  auto q = [](double v) { return static_cast<long long>(std::llround(v * 1e10)); };

  for (Eigen::Index i = 0; i < n; ++i) {
    const Key key{q(centers[i].r), q(set.arcs[i].delta), 0, 0, 0};
    auto it = diag_memo.find(key);
    if (it == diag_memo.end())
      it = diag_memo
               .emplace(key, detail::arc_variance(centers[i], set.arcs[i], tau, cfg,
                                                  std::max(64, 2 * quad_order)))
               .first;
    set.covariance(i, i) = it->second;
  }
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < i; ++j) {
      const double dth = std::abs(std::remainder(centers[i].theta - centers[j].theta, kTwoPi));
      if (dth < 1e-14 && std::abs(centers[i].r - centers[j].r) < 1e-14) {
        set.covariance(i, j) = set.covariance(i, i);  // coincident centers
        set.covariance(j, i) = set.covariance(i, i);
        continue;
      }
      // memo key valid because the entry depends only on (r_i, r_j, |dtheta|)
      Eigen::Index lo = i, hi = j;
      if (centers[lo].r > centers[hi].r) std::swap(lo, hi);
      const Key key{q(centers[lo].r), q(centers[hi].r), q(dth), q(set.arcs[lo].delta),
                    q(set.arcs[hi].delta)};
      auto it = cross_memo.find(key);
      if (it == cross_memo.end()) {
        const PolarPoint xi(centers[lo].r, 0.0), xj(centers[hi].r, dth);
        it = cross_memo
                 .emplace(key, detail::arc_cross_covariance(xi, set.arcs[lo], xj, set.arcs[hi],
                                                            tau, cfg, quad_order))
                 .first;
      }
      set.covariance(i, j) = it->second;
      set.covariance(j, i) = it->second;
    }
  return set;
}

// Zero-mean Gaussian vector with the given covariance (Cholesky + jitter).
inline Vector sample_circle_averages(const Matrix& cov, const RngStream& stream) {
  const auto chol = cholesky_with_jitter(cov);
  Vector z(cov.rows());
  RngSequence seq(stream);
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = seq.normal();
  return chol.lower * z;
}

// ---------------------------------------------------------------------------
// Girsanov shift

// E[X(z) Y] for Y = int f X dlambda (bulk) or int f X dlambda_bd (boundary).
template <class F>
double girsanov_shift(const PolarPoint& z, F&& f, Domain domain, double tau, int quad_order = 128,
                      const GreenSeriesConfig& cfg = {}) {
  const AnnulusGeometry geom(1.0, tau);
  const MetricSpec flat;
  if (domain == Domain::Bulk) {
    return integrate([&](const PolarPoint& x) { return f(x) * green_flat(z, x, tau, cfg); }, geom,
                     flat, Domain::Bulk, quad_order, 2 * quad_order);
  }
  return integrate_boundary_green(z, std::forward<F>(f), flat, tau, cfg, 2 * quad_order);
}

// E[Y^2] by double quadrature (boundary version; enough for the curvature term).
template <class F>
double girsanov_variance_boundary(F&& f, double tau, int quad_order = 192,
                                  const GreenSeriesConfig& cfg = {}) {
  const AnnulusGeometry geom(1.0, tau);
  const MetricSpec flat;
  return integrate(
      [&](const PolarPoint& x) {
        return f(x) * integrate_boundary_green(x, f, flat, tau, cfg, quad_order);
      },
      geom, flat, Domain::FullBoundary, 2, quad_order);
}

}  // namespace lqg
