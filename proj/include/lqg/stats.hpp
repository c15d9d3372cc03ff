#pragma once

// Monte-Carlo estimates, estimator combination, and the goodness-of-fit
// machinery used by the sampling modules (Kolmogorov-Smirnov against Gamma
// laws, chi-square, Kahane convex-order checks).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "lqg/linalg.hpp"
#include "lqg/rng.hpp"

namespace lqg {

struct Estimate {
  double value = 0.0;
  double stderr_ = 0.0;
  std::int64_t n_samples = 0;
  std::uint64_t seed = 0;
};

inline Estimate scale_estimate(const Estimate& e, double factor) {
  return {e.value * factor, e.stderr_ * std::abs(factor), e.n_samples, e.seed};
}

// Sample-count weighted mean.  Associative under a fixed ordering, and well
// defined for degenerate zero-variance inputs.
inline Estimate combine_estimates(const std::vector<Estimate>& parts) {
  if (parts.empty()) throw std::invalid_argument("combine_estimates: empty input");
  double wsum = 0.0, vsum = 0.0, var = 0.0;
  for (const auto& e : parts) {
    const double w = static_cast<double>(e.n_samples > 0 ? e.n_samples : 1);
    wsum += w;
    vsum += w * e.value;
    var += w * w * e.stderr_ * e.stderr_;
  }
  Estimate out;
  out.value = vsum / wsum;
  out.stderr_ = std::sqrt(var) / wsum;
  for (const auto& e : parts) out.n_samples += e.n_samples;
  out.seed = parts.front().seed;
  return out;
}

inline Estimate mean_estimate(const std::vector<double>& xs, std::uint64_t seed = 0) {
  if (xs.empty()) throw std::invalid_argument("mean_estimate: empty sample set");
  double m = 0.0;
  for (double x : xs) m += x;
  m /= static_cast<double>(xs.size());
  double v = 0.0;
  for (double x : xs) v += (x - m) * (x - m);
  const auto n = static_cast<double>(xs.size());
  v = xs.size() > 1 ? v / (n - 1.0) : 0.0;
  return {m, std::sqrt(v / n), static_cast<std::int64_t>(xs.size()), seed};
}

// ---------------------------------------------------------------------------
// Regularized incomplete gamma functions (series + continued fraction).

namespace detail {

inline double gamma_p_series(double a, double x) {
  double sum = 1.0 / a, term = sum, ap = a;
  for (int i = 0; i < 500; ++i) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

inline double gamma_q_contfrac(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace detail

// Regularized lower incomplete gamma P(a, x).
inline double gamma_p(double a, double x) {
  if (a <= 0.0) throw std::invalid_argument("gamma_p: a must be positive");
  if (x < 0.0) throw std::invalid_argument("gamma_p: x must be nonnegative");
  if (x == 0.0) return 0.0;
  return x < a + 1.0 ? detail::gamma_p_series(a, x) : 1.0 - detail::gamma_q_contfrac(a, x);
}

inline double gamma_q(double a, double x) { return 1.0 - gamma_p(a, x); }

// CDF of Gamma(shape, rate).
inline double gamma_cdf(double x, double shape, double rate) {
  if (x <= 0.0) return 0.0;
  return gamma_p(shape, rate * x);
}

inline double chi_square_p_value(double statistic, int dof) {
  return gamma_q(0.5 * dof, 0.5 * statistic);
}

// ---------------------------------------------------------------------------
// Kolmogorov-Smirnov

// Kolmogorov distribution tail Q(lambda) = 2 sum (-1)^{k-1} exp(-2 k^2 l^2).
inline double kolmogorov_q(double lambda) {
  if (lambda <= 0.0) return 1.0;
  double sum = 0.0, sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += sign * term;
    if (term < 1e-16) break;
    sign = -sign;
  }
  return std::min(1.0, std::max(0.0, 2.0 * sum));
}

struct KsResult {
  double statistic = 0.0;
  double p_value = 0.0;
  bool pass_at_1pct = false;
  bool pass_at_5pct = false;
};

// One-sample KS against Gamma(shape, rate); two-sided, asymptotic p-value
// with the Stephens finite-n correction.
inline KsResult ks_gamma_test(std::vector<double> samples, double shape, double rate) {
  if (samples.empty()) throw std::invalid_argument("ks_gamma_test: empty sample set");
  for (double s : samples)
    if (!(s > 0.0)) throw std::invalid_argument("ks_gamma_test: samples must be positive");
  std::sort(samples.begin(), samples.end());
  const auto n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = gamma_cdf(samples[i], shape, rate);
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
  }
  KsResult r;
  r.statistic = d;
  const double eff = std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n);
  r.p_value = kolmogorov_q(eff * d);
  r.pass_at_1pct = r.p_value > 0.01;
  r.pass_at_5pct = r.p_value > 0.05;
  return r;
}

// Two-sample KS.
inline KsResult ks_two_sample_test(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample_test: empty input");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j])
      ++i;
    else
      ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / a.size() -
                             static_cast<double>(j) / b.size()));
  }
  KsResult r;
  r.statistic = d;
  const double ne = static_cast<double>(a.size()) * b.size() / (a.size() + b.size());
  const double eff = std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne);
  r.p_value = kolmogorov_q(eff * d);
  r.pass_at_1pct = r.p_value > 0.01;
  r.pass_at_5pct = r.p_value > 0.05;
  return r;
}

// ---------------------------------------------------------------------------
// Random variates

// Gamma(shape, rate) via Marsaglia-Tsang; rejection draws consume from the
// given sequence, so callers wanting fixed budgets should pass a substream.
inline double gamma_draw(RngSequence& seq, double shape, double rate) {
  if (shape <= 0.0 || rate <= 0.0) throw std::invalid_argument("gamma_draw: bad parameters");
  double boost = 1.0;
  double a = shape;
  if (a < 1.0) {
    boost = std::pow(seq.uniform(), 1.0 / a);
    a += 1.0;
  }
  const double d = a - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = seq.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = seq.uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return boost * d * v / rate;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return boost * d * v / rate;
  }
}

// ---------------------------------------------------------------------------
// Kahane convex-order check

struct KahaneReport {
  double convex_small = 0.0, convex_large = 0.0, convex_se = 0.0;
  double concave_small = 0.0, concave_large = 0.0, concave_se = 0.0;
  bool convex_ordered = false;   // E[F small] <= E[F large] + 3 se, F(x) = x^2
  bool concave_ordered = false;  // E[F small] >= E[F large] - 3 se, F(x) = sqrt(x)
  bool pass = false;
};

// MC check of the convex-order inequality for exp(Y - E[Y^2]/2) masses under
// two covariances with cov_small <= cov_large entrywise.
inline KahaneReport kahane_order_check(const Matrix& cov_small, const Matrix& cov_large,
                                       const Vector& weights, int n_samples, RngStream rng) {
  if (cov_small.rows() != cov_large.rows() || cov_small.rows() != weights.size())
    throw std::invalid_argument("kahane_order_check: dimension mismatch");
  if (((cov_large - cov_small).array() < -1e-12).any())
    throw std::invalid_argument("kahane_order_check: cov_small must be <= cov_large entrywise");
  const auto ls = cholesky_with_jitter(cov_small);
  const auto ll = cholesky_with_jitter(cov_large);
  const auto dim = weights.size();

  auto run = [&](const Matrix& lower, const Matrix& cov, std::uint64_t tag,
                 std::vector<double>& conv, std::vector<double>& conc) {
    RngStream s = rng.substream(tag);
    Vector z(dim), y(dim);
    for (int k = 0; k < n_samples; ++k) {
      RngSequence seq(s.substream(k));
      for (Eigen::Index i = 0; i < dim; ++i) z[i] = seq.normal();
      y = lower * z;
      double mass = 0.0;
      for (Eigen::Index i = 0; i < dim; ++i)
        mass += weights[i] * std::exp(y[i] - 0.5 * cov(i, i));
      conv.push_back(mass * mass);
      conc.push_back(std::sqrt(mass));
    }
  };

  std::vector<double> conv_s, conc_s, conv_l, conc_l;
  run(ls.lower, cov_small, 1, conv_s, conc_s);
  run(ll.lower, cov_large, 2, conv_l, conc_l);

  const Estimate cs = mean_estimate(conv_s), cl = mean_estimate(conv_l);
  const Estimate ks = mean_estimate(conc_s), kl = mean_estimate(conc_l);
  KahaneReport r;
  r.convex_small = cs.value;
  r.convex_large = cl.value;
  r.convex_se = std::hypot(cs.stderr_, cl.stderr_);
  r.concave_small = ks.value;
  r.concave_large = kl.value;
  r.concave_se = std::hypot(ks.stderr_, kl.stderr_);
  r.convex_ordered = cs.value <= cl.value + 3.0 * r.convex_se;
  r.concave_ordered = ks.value >= kl.value - 3.0 * r.concave_se;
  r.pass = r.convex_ordered && r.concave_ordered;
  return r;
}

}  // namespace lqg
