#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "lqg/rng.hpp"
#include "lqg/stats.hpp"

using namespace lqg;

TEST_CASE("streams are reproducible and order-independent", "[rng-stats]") {
  RngStream a(42, 7), b(42, 7);
  for (std::uint64_t i : {0ull, 5ull, 3ull, 1000000ull}) REQUIRE(a.u64(i) == b.u64(i));
  REQUIRE(a.u64(3) == b.u64(3));  // re-reading a counter gives the same value

  RngStream c(42, 8);
  REQUIRE(a.u64(0) != c.u64(0));

  RngSequence s1(a), s2(a);
  std::vector<double> x1, x2;
  for (int i = 0; i < 16; ++i) x1.push_back(s1.normal());
  for (int i = 0; i < 16; ++i) x2.push_back(s2.normal());
  REQUIRE(x1 == x2);
}

TEST_CASE("distinct stream ids decorrelate", "[rng-stats]") {
  const int n = 20000;
  RngStream a(99, 0), b(99, 1);
  double sa = 0, sb = 0, sab = 0, saa = 0, sbb = 0;
  for (int i = 0; i < n; ++i) {
    const double x = a.uniform(i) - 0.5, y = b.uniform(i) - 0.5;
    sa += x; sb += y; sab += x * y; saa += x * x; sbb += y * y;
  }
  const double corr = (sab - sa * sb / n) / std::sqrt((saa - sa * sa / n) * (sbb - sb * sb / n));
  REQUIRE(std::abs(corr) < 3.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("uniform moments", "[rng-stats]") {
  RngStream s(1234, 0);
  const int n = 100000;
  double mean = 0, var = 0;
  for (int i = 0; i < n; ++i) mean += s.uniform(i);
  mean /= n;
  for (int i = 0; i < n; ++i) var += (s.uniform(i) - mean) * (s.uniform(i) - mean);
  var /= n;
  REQUIRE(mean == Catch::Approx(0.5).margin(3.0 / std::sqrt(12.0 * n)));
  REQUIRE(var == Catch::Approx(1.0 / 12.0).margin(0.002));
}

TEST_CASE("combine_estimates basics", "[rng-stats]") {
  Estimate e1{2.0, 0.1, 100, 7}, e2{2.0, 0.1, 100, 7};
  const Estimate c = combine_estimates({e1, e2});
  REQUIRE(c.value == Catch::Approx(2.0));
  REQUIRE(c.stderr_ == Catch::Approx(0.1 / std::sqrt(2.0)));
  REQUIRE(c.n_samples == 200);

  Estimate e3{3.0, 0.2, 50, 7};
  const Estimate left = combine_estimates({combine_estimates({e1, e2}), e3});
  const Estimate all = combine_estimates({e1, e2, e3});
  REQUIRE(left.value == Catch::Approx(all.value).epsilon(1e-14));
  REQUIRE(left.stderr_ == Catch::Approx(all.stderr_).epsilon(1e-12));

  // degenerate zero-variance inputs are handled by count weighting
  Estimate z1{1.0, 0.0, 10, 0}, z2{2.0, 0.0, 30, 0};
  const Estimate z = combine_estimates({z1, z2});
  REQUIRE(z.value == Catch::Approx(1.75));
}

TEST_CASE("combined 3-sigma coverage over synthetic normals", "[rng-stats]") {
  // 1000 trials, each combining 4 chunk means of N(mu, 1) draws.
  const double mu = 1.3;
  RngStream root(2024, 0);
  int covered = 0;
  const int trials = 1000;
  for (int t = 0; t < trials; ++t) {
    std::vector<Estimate> parts;
    RngStream st = root.substream(t);
    for (int c = 0; c < 4; ++c) {
      RngSequence seq(st.substream(c));
      std::vector<double> xs;
      for (int i = 0; i < 50; ++i) xs.push_back(mu + seq.normal());
      parts.push_back(mean_estimate(xs));
    }
    const Estimate e = combine_estimates(parts);
    if (std::abs(e.value - mu) <= 3.0 * e.stderr_) ++covered;
  }
  REQUIRE(covered >= 985);  // 99.7% nominal, binomial slack
}

TEST_CASE("incomplete gamma and chi-square", "[rng-stats]") {
  // P(1, x) = 1 - exp(-x)
  for (double x : {0.1, 0.5, 1.0, 3.0, 10.0})
    REQUIRE(gamma_p(1.0, x) == Catch::Approx(1.0 - std::exp(-x)).epsilon(1e-12));
  // P(1/2, x) = erf(sqrt(x))
  REQUIRE(gamma_p(0.5, 2.0) == Catch::Approx(std::erf(std::sqrt(2.0))).epsilon(1e-12));
  REQUIRE(gamma_cdf(0.0, 1.0, 1.0) == 0.0);
  // chi-square with 2 dof: p = exp(-x/2)
  REQUIRE(chi_square_p_value(3.0, 2) == Catch::Approx(std::exp(-1.5)).epsilon(1e-12));
}

TEST_CASE("KS vs Gamma: true exponential passes, Gamma(2,1) fails", "[rng-stats]") {
  RngStream root(555, 0);
  int pass = 0;
  const int trials = 100;
  for (int t = 0; t < trials; ++t) {
    RngSequence seq(root.substream(t));
    std::vector<double> xs;
    for (int i = 0; i < 2000; ++i) xs.push_back(-std::log(seq.uniform()));
    if (ks_gamma_test(xs, 1.0, 1.0).pass_at_1pct) ++pass;
  }
  REQUIRE(pass >= 95);

  // shape-2 samples against the shape-1 CDF must be rejected
  RngSequence seq(root.substream(1000));
  std::vector<double> ys;
  for (int i = 0; i < 2000; ++i) ys.push_back(-std::log(seq.uniform()) - std::log(seq.uniform()));
  REQUIRE_FALSE(ks_gamma_test(ys, 1.0, 1.0).pass_at_1pct);

  REQUIRE_THROWS(ks_gamma_test({1.0, -2.0}, 1.0, 1.0));
}

TEST_CASE("gamma_draw matches its law", "[rng-stats]") {
  RngStream root(777, 0);
  std::vector<double> xs;
  const double shape = 1.7, rate = 2.5;
  for (int i = 0; i < 4000; ++i) {
    RngSequence seq(root.substream(i));
    xs.push_back(gamma_draw(seq, shape, rate));
  }
  REQUIRE(ks_gamma_test(xs, shape, rate).pass_at_1pct);
  double mean = 0;
  for (double x : xs) mean += x;
  mean /= xs.size();
  REQUIRE(mean == Catch::Approx(shape / rate).margin(0.05));
}

TEST_CASE("kahane order check", "[rng-stats]") {
  const int d = 24;
  Matrix cov = Matrix::Zero(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) cov(i, j) = 0.8 * std::exp(-0.3 * std::abs(i - j));
  const Vector w = Vector::Constant(d, 1.0 / d);
  RngStream rng(31415, 0);

  SECTION("equal covariances agree within noise") {
    const auto r = kahane_order_check(cov, cov, w, 4000, rng);
    REQUIRE(r.pass);
    REQUIRE(std::abs(r.convex_small - r.convex_large) <= 3.0 * r.convex_se + 1e-12);
  }
  SECTION("larger covariance dominates in convex order") {
    Matrix big = cov;
    big.array() += 0.5;
    const auto r = kahane_order_check(cov, big, w, 4000, rng);
    REQUIRE(r.pass);
    REQUIRE(r.convex_small < r.convex_large);
    REQUIRE(r.concave_small > r.concave_large);
  }
  SECTION("reversed inputs violate the precondition") {
    Matrix big = cov;
    big.array() += 0.5;
    REQUIRE_THROWS(kahane_order_check(big, cov, w, 10, rng));
  }
}
