#pragma once

// Deterministic quadrature over the annulus: composite Gauss-Legendre in the
// radial direction crossed with a uniform (trapezoid-equivalent) angular rule,
// plus adaptive Gauss-Kronrod for 1D integrals on the half-line and a graded
// rule for integrable log-endpoint singularities.

#include <cmath>
#include <functional>
#include <map>
#include <queue>
#include <stdexcept>
#include <vector>

#include "lqg/geometry.hpp"

namespace lqg {

struct QuadRule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

// Gauss-Legendre nodes/weights by Newton iteration on P_n; cached per order.
inline const QuadRule& gauss_legendre(int n) {
  static std::map<int, QuadRule> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  if (n < 1) throw std::invalid_argument("gauss_legendre: order must be >= 1");
  QuadRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * pp * pp);
    rule.weights[n - 1 - i] = rule.weights[i];
  }
  return cache.emplace(n, std::move(rule)).first->second;
}

// Radial nodes/weights on [a, b] (weight includes the Jacobian r of r dr).
struct RadialRule {
  std::vector<double> r;
  std::vector<double> w;  // GL weight * (b-a)/2 * r
};

inline RadialRule radial_rule(const AnnulusGeometry& geom, int order) {
  const auto& gl = gauss_legendre(order);
  RadialRule out;
  out.r.resize(order);
  out.w.resize(order);
  const double mid = 0.5 * (geom.a + geom.b), half = 0.5 * (geom.b - geom.a);
  for (int i = 0; i < order; ++i) {
    out.r[i] = mid + half * gl.nodes[i];
    out.w[i] = half * gl.weights[i] * out.r[i];
  }
  return out;
}

enum class Domain { Bulk, InnerBoundary, OuterBoundary, FullBoundary };

// Integral of f against d lambda_g (bulk) or d lambda_{boundary g}.
// The angular rule is the uniform midpoint rule, exact for trigonometric
// polynomials of degree below the node count.
template <class F>
double integrate(F&& f, const AnnulusGeometry& geom, const MetricSpec& m, Domain domain,
                 int order_radial, int order_angular) {
  if (order_radial < 2 || order_angular < 2)
    throw std::invalid_argument("integrate: order must be >= 2");
  const double dtheta = kTwoPi / order_angular;
  double total = 0.0;
  auto angle = [&](int j) { return (j + 0.5) * dtheta; };

  auto add_circle = [&](double rb) {
    for (int j = 0; j < order_angular; ++j) {
      const PolarPoint z(rb, angle(j));
      const double v = f(z) * std::exp(0.5 * m.phi(z));
      if (!std::isfinite(v)) throw std::runtime_error("integrate: non-finite integrand value");
      total += v * rb * dtheta;
    }
  };

  switch (domain) {
    case Domain::Bulk: {
      const RadialRule rr = radial_rule(geom, order_radial);
      for (int i = 0; i < order_radial; ++i) {
        for (int j = 0; j < order_angular; ++j) {
          const PolarPoint z(rr.r[i], angle(j));
          const double v = f(z) * std::exp(m.phi(z));
          if (!std::isfinite(v)) throw std::runtime_error("integrate: non-finite integrand value");
          total += v * rr.w[i] * dtheta;
        }
      }
      break;
    }
    case Domain::InnerBoundary:
      add_circle(geom.a);
      break;
    case Domain::OuterBoundary:
      add_circle(geom.b);
      break;
    case Domain::FullBoundary:
      add_circle(geom.a);
      add_circle(geom.b);
      break;
  }
  return total;
}

template <class F>
double integrate(F&& f, const AnnulusGeometry& geom, const MetricSpec& m, Domain domain,
                 int order = 128) {
  return integrate(std::forward<F>(f), geom, m, domain, order, 2 * order);
}

inline double bulk_volume(const AnnulusGeometry& geom, const MetricSpec& m, int order = 128) {
  return integrate([](const PolarPoint&) { return 1.0; }, geom, m, Domain::Bulk, order);
}

inline double boundary_length(const AnnulusGeometry& geom, const MetricSpec& m, Domain which,
                              int order_angular = 256) {
  return integrate([](const PolarPoint&) { return 1.0; }, geom, m, which, 2, order_angular);
}

// ---------------------------------------------------------------------------
// Adaptive Gauss-Kronrod (15-7) on a finite interval.

namespace gk {
// Kronrod-15 abscissae/weights and embedded Gauss-7 weights.
inline constexpr double xk[8] = {0.991455371120813, 0.949107912342759, 0.864864423359769,
                                 0.741531185599394, 0.586087235467691, 0.405845151377397,
                                 0.207784955007898, 0.0};
inline constexpr double wk[8] = {0.022935322010529, 0.063092092629979, 0.104790010322250,
                                 0.140653259715525, 0.169004726639267, 0.190350578064785,
                                 0.204432940075298, 0.209482141084728};
inline constexpr double wg[4] = {0.129484966168870, 0.279705391489277, 0.381830050505119,
                                 0.417959183673469};
}  // namespace gk

template <class F>
inline void gk15(F&& f, double a, double b, double& value, double& error) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double resk = 0.0, resg = 0.0;
  for (int i = 0; i < 8; ++i) {
    const double dx = h * gk::xk[i];
    const double fv = (i == 7) ? f(c) : f(c - dx) + f(c + dx);
    resk += gk::wk[i] * fv;
    if (i % 2 == 1) resg += gk::wg[i / 2] * fv;
  }
  value = resk * h;
  error = std::abs((resk - resg) * h);
}

template <class F>
double adaptive_gk(F&& f, double a, double b, double rel_tol = 1e-10, int max_splits = 2000) {
  struct Seg {
    double a, b, value, error;
    bool operator<(const Seg& o) const { return error < o.error; }
  };
  std::priority_queue<Seg> q;
  double v, e;
  gk15(f, a, b, v, e);
  q.push({a, b, v, e});
  double total = v, total_err = e;
  for (int k = 0; k < max_splits; ++k) {
    if (total_err <= rel_tol * std::abs(total) + 1e-300) break;
    Seg s = q.top();
    q.pop();
    const double mid = 0.5 * (s.a + s.b);
    double v1, e1, v2, e2;
    gk15(f, s.a, mid, v1, e1);
    gk15(f, mid, s.b, v2, e2);
    total += v1 + v2 - s.value;
    total_err += e1 + e2 - s.error;
    q.push({s.a, mid, v1, e1});
    q.push({mid, s.b, v2, e2});
  }
  return total;
}

// 1D quadrature tolerating integrable log singularities at either endpoint:
// dyadic subdivision toward the endpoints with a fixed GL rule per panel.
template <class F>
double log_graded_quad(F&& f, double a, double b, int levels = 42, int order = 16) {
  const auto& gl = gauss_legendre(order);
  const double mid = 0.5 * (a + b);
  double total = 0.0;
  auto panel = [&](double lo, double hi) {
    const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
    double s = 0.0;
    for (int i = 0; i < order; ++i) s += gl.weights[i] * f(c + h * gl.nodes[i]);
    return s * h;
  };
  double lo = a;
  for (int k = levels; k >= 1; --k) {
    const double hi = a + (mid - a) * std::pow(0.5, k - 1);
    total += panel(lo, hi);
    lo = hi;
  }
  double hi = b;
  for (int k = levels; k >= 1; --k) {
    const double lo2 = b - (b - mid) * std::pow(0.5, k - 1);
    total += panel(lo2, hi);
    hi = lo2;
  }
  return total;
}

}  // namespace lqg
