#pragma once

// Annulus domain model: polar points, conformal-factor metrics g = e^phi dx^2
// with curvature/line-element transforms, the conformal automorphisms
// (rotations and the boundary-exchanging inversion), and the radial-affine
// reference map f_tau between the annulus (1,2) and (1,tau).

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace lqg {

inline constexpr double kTwoPi = 6.283185307179586476925287;
inline constexpr double kPi = 3.141592653589793238462643;
inline constexpr double kBoundaryTol = 1e-12;

inline double normalize_angle(double theta) {
  double t = std::fmod(theta, kTwoPi);
  if (t < 0.0) t += kTwoPi;
  return t;
}

struct PolarPoint {
  double r = 1.0;
  double theta = 0.0;  // stored normalized to [0, 2pi)

  PolarPoint() = default;
  PolarPoint(double r_, double theta_) : r(r_), theta(normalize_angle(theta_)) {}

  double x() const { return r * std::cos(theta); }
  double y() const { return r * std::sin(theta); }
};

inline double distance(const PolarPoint& a, const PolarPoint& b) {
  return std::sqrt(a.r * a.r + b.r * b.r - 2.0 * a.r * b.r * std::cos(a.theta - b.theta));
}

struct AnnulusGeometry {
  double a = 1.0;  // inner radius
  double b = 2.0;  // outer radius

  AnnulusGeometry() = default;
  AnnulusGeometry(double a_, double b_) : a(a_), b(b_) {
    if (!(0.0 < a && a < b)) throw std::invalid_argument("AnnulusGeometry: need 0 < a < b");
  }
  static AnnulusGeometry standard(double tau) {
    if (!(tau > 1.0)) throw std::invalid_argument("AnnulusGeometry: need tau > 1");
    return AnnulusGeometry(1.0, tau);
  }

  double tau() const { return b / a; }
  bool contains(const PolarPoint& p) const {
    return p.r >= a - kBoundaryTol && p.r <= b + kBoundaryTol;
  }
  bool on_inner_boundary(const PolarPoint& p) const { return std::abs(p.r - a) < kBoundaryTol; }
  bool on_outer_boundary(const PolarPoint& p) const { return std::abs(p.r - b) < kBoundaryTol; }
  bool on_boundary(const PolarPoint& p) const {
    return on_inner_boundary(p) || on_outer_boundary(p);
  }
  bool strictly_interior(const PolarPoint& p) const {
    return p.r > a + kBoundaryTol && p.r < b - kBoundaryTol;
  }
};

// ---------------------------------------------------------------------------
// MetricSpec

// Conformal log-factor phi on the closed annulus.  Closed-form accessors are
// used for the builtin family phi = c + p ln r; tabulated grids fall back to
// centered finite differences with step 1e-5 * (b - a).
class MetricSpec {
 public:
  MetricSpec() = default;  // flat

  static MetricSpec flat() { return MetricSpec(); }
  static MetricSpec constant(double c0) { return log_affine(c0, 0.0); }
  static MetricSpec radial_power(double p) { return log_affine(0.0, p); }
  // phi = -2 ln(2 pi |z|): pullback of the flat unit-circumference cylinder.
  static MetricSpec cylinder_pullback() { return log_affine(-2.0 * std::log(kTwoPi), -2.0); }
  // phi = 2 ln|psi'| for the inversion psi(z) = tau/z.
  static MetricSpec inversion_pullback(double tau) { return log_affine(2.0 * std::log(tau), -4.0); }
  static MetricSpec log_affine(double c, double p) {
    MetricSpec m;
    m.kind_ = Kind::LogAffine;
    m.c_ = c;
    m.p_ = p;
    return m;
  }
  // Tabulated phi on a regular (r, theta) grid; theta assumed periodic.
  static MetricSpec tabulated(std::vector<double> r_nodes, std::vector<double> theta_nodes,
                              std::vector<double> phi_values, double fd_step) {
    MetricSpec m;
    m.kind_ = Kind::Grid;
    m.gr_ = std::move(r_nodes);
    m.gt_ = std::move(theta_nodes);
    m.gv_ = std::move(phi_values);
    m.fd_step_ = fd_step;
    if (m.gr_.size() < 2 || m.gt_.size() < 1 || m.gv_.size() != m.gr_.size() * m.gt_.size())
      throw std::invalid_argument("MetricSpec::tabulated: inconsistent grid");
    return m;
  }

  bool is_flat() const { return kind_ == Kind::LogAffine && c_ == 0.0 && p_ == 0.0; }

  double phi(const PolarPoint& z) const {
    switch (kind_) {
      case Kind::LogAffine:
        return c_ + p_ * std::log(z.r);
      case Kind::Grid:
        return interp(z.r, z.theta);
    }
    return 0.0;
  }

  double dphi_dr(const PolarPoint& z) const {
    if (kind_ == Kind::LogAffine) return p_ / z.r;
    return (interp(z.r + fd_step_, z.theta) - interp(z.r - fd_step_, z.theta)) / (2.0 * fd_step_);
  }

  double dphi_dtheta(const PolarPoint& z) const {
    if (kind_ == Kind::LogAffine) return 0.0;
    return (interp(z.r, z.theta + fd_step_) - interp(z.r, z.theta - fd_step_)) / (2.0 * fd_step_);
  }

  // |grad phi|^2 in the flat metric.
  double grad_sq(const PolarPoint& z) const {
    const double pr = dphi_dr(z), pt = dphi_dtheta(z) / z.r;
    return pr * pr + pt * pt;
  }

  double laplacian(const PolarPoint& z) const {
    if (kind_ == Kind::LogAffine) return 0.0;  // c + p ln r is harmonic
    const double h = fd_step_;
    const double c = interp(z.r, z.theta);
    const double rr = (interp(z.r + h, z.theta) - 2.0 * c + interp(z.r - h, z.theta)) / (h * h);
    const double tt = (interp(z.r, z.theta + h) - 2.0 * c + interp(z.r, z.theta - h)) / (h * h);
    return rr + dphi_dr(z) / z.r + tt / (z.r * z.r);
  }

  // Outward normal derivative of phi at a boundary point.
  double normal_derivative(const PolarPoint& z, const AnnulusGeometry& geom) const {
    if (geom.on_inner_boundary(z)) return -dphi_dr(z);
    if (geom.on_outer_boundary(z)) return dphi_dr(z);
    throw std::invalid_argument("MetricSpec::normal_derivative: point not on boundary");
  }

  double conformal_factor(const PolarPoint& z) const { return std::exp(phi(z)); }

 private:
  enum class Kind { LogAffine, Grid };
  Kind kind_ = Kind::LogAffine;
  double c_ = 0.0, p_ = 0.0;

  std::vector<double> gr_, gt_, gv_;
  double fd_step_ = 1e-5;

  double interp(double r, double theta) const {
    r = std::min(std::max(r, gr_.front()), gr_.back());
    theta = normalize_angle(theta);
    std::size_t i = 0;
    while (i + 2 < gr_.size() && gr_[i + 1] <= r) ++i;
    const double tr = (r - gr_[i]) / (gr_[i + 1] - gr_[i]);
    const double dt = kTwoPi / static_cast<double>(gt_.size());
    const double tpos = theta / dt;
    auto j = static_cast<std::size_t>(tpos) % gt_.size();
    const std::size_t j1 = (j + 1) % gt_.size();
    const double tt = tpos - std::floor(tpos);
    auto at = [&](std::size_t ir, std::size_t it) { return gv_[ir * gt_.size() + it]; };
    return (1 - tr) * ((1 - tt) * at(i, j) + tt * at(i, j1)) +
           tr * ((1 - tt) * at(i + 1, j) + tt * at(i + 1, j1));
  }
};

// Builtin metric names: "flat", "constant:c", "radial-power:p",
// "cylinder-pullback", "inversion-pullback".
inline MetricSpec metric_from_name(const std::string& name, double tau) {
  if (name == "flat") return MetricSpec::flat();
  if (name == "cylinder-pullback") return MetricSpec::cylinder_pullback();
  if (name == "inversion-pullback") return MetricSpec::inversion_pullback(tau);
  const auto colon = name.find(':');
  if (colon != std::string::npos) {
    const std::string head = name.substr(0, colon);
    const double v = std::stod(name.substr(colon + 1));
    if (head == "constant") return MetricSpec::constant(v);
    if (head == "radial-power") return MetricSpec::radial_power(v);
  }
  throw std::invalid_argument("metric_from_name: unknown metric spec '" + name + "'");
}

// ---------------------------------------------------------------------------
// Weyl-transformed curvature quantities

struct TransformedQuantities {
  double scalar_curvature = 0.0;                 // R_g
  std::optional<double> geodesic_curvature;      // K_g, boundary only
  double volume_scale = 1.0;                     // e^phi
  double line_scale = 1.0;                       // e^{phi/2}
};

// Flat-metric geodesic curvature: -1/a on the inner boundary, 1/b on the outer.
inline double flat_geodesic_curvature(const PolarPoint& z, const AnnulusGeometry& geom) {
  if (geom.on_inner_boundary(z)) return -1.0 / geom.a;
  if (geom.on_outer_boundary(z)) return 1.0 / geom.b;
  throw std::invalid_argument("flat_geodesic_curvature: interior point");
}

inline TransformedQuantities transformed_quantities(const MetricSpec& m, const PolarPoint& z,
                                                    const AnnulusGeometry& geom,
                                                    bool on_boundary = false) {
  if (!geom.contains(z)) throw std::invalid_argument("transformed_quantities: point outside annulus");
  TransformedQuantities q;
  const double phi = m.phi(z);
  q.volume_scale = std::exp(phi);
  q.line_scale = std::exp(0.5 * phi);
  q.scalar_curvature = std::exp(-phi) * (0.0 - m.laplacian(z));
  if (on_boundary) {
    if (!geom.on_boundary(z))
      throw std::invalid_argument("transformed_quantities: K_g requested at interior point");
    const double k_flat = flat_geodesic_curvature(z, geom);
    q.geodesic_curvature =
        std::exp(-0.5 * phi) * (k_flat + 0.5 * m.normal_derivative(z, geom));
  }
  return q;
}

// ---------------------------------------------------------------------------
// Conformal automorphisms: z -> e^{i theta0} z and z -> e^{i theta0} ab / z.

struct ConformalAutomorphism {
  double rotation_angle = 0.0;
  bool invert = false;

  static ConformalAutomorphism rotation(double angle) { return {normalize_angle(angle), false}; }
  static ConformalAutomorphism inversion(double angle = 0.0) {
    return {normalize_angle(angle), true};
  }
};

inline ConformalAutomorphism compose(const ConformalAutomorphism& f,
                                     const ConformalAutomorphism& g) {
  // (f o g); inversion twice is a rotation.
  ConformalAutomorphism h;
  if (!f.invert) {
    h = g;
    h.rotation_angle = normalize_angle(f.rotation_angle + g.rotation_angle);
  } else {
    h.invert = !g.invert;
    h.rotation_angle = normalize_angle(f.rotation_angle - g.rotation_angle);
  }
  return h;
}

struct AutomorphismImage {
  PolarPoint image;
  double deriv_modulus = 1.0;  // |psi'(z)|
};

inline AutomorphismImage apply_automorphism(const ConformalAutomorphism& psi, const PolarPoint& z,
                                            const AnnulusGeometry& geom) {
  if (!geom.contains(z)) throw std::invalid_argument("apply_automorphism: point outside annulus");
  if (!psi.invert) return {PolarPoint(z.r, z.theta + psi.rotation_angle), 1.0};
  const double ab = geom.a * geom.b;
  return {PolarPoint(ab / z.r, psi.rotation_angle - z.theta), ab / (z.r * z.r)};
}

// ---------------------------------------------------------------------------
// Reference map f_tau : (1,2) -> (1,tau), radial-affine, not conformal.

inline PolarPoint f_tau_map(double tau, const PolarPoint& z) {
  if (!(tau > 1.0)) throw std::invalid_argument("f_tau_map: need tau > 1");
  if (z.r < 1.0 - kBoundaryTol || z.r > 2.0 + kBoundaryTol)
    throw std::domain_error("f_tau_map: point outside the reference annulus (1,2)");
  const double r = std::min(std::max(z.r, 1.0), 2.0);
  return PolarPoint((tau - 1.0) * (r - 1.0) + 1.0, z.theta);
}

inline PolarPoint f_tau_inverse(double tau, const PolarPoint& z) {
  if (!(tau > 1.0)) throw std::invalid_argument("f_tau_inverse: need tau > 1");
  if (z.r < 1.0 - kBoundaryTol || z.r > tau + kBoundaryTol)
    throw std::domain_error("f_tau_inverse: point outside the annulus (1,tau)");
  const double r = std::min(std::max(z.r, 1.0), tau);
  return PolarPoint((r - 1.0) / (tau - 1.0) + 1.0, z.theta);
}

}  // namespace lqg
