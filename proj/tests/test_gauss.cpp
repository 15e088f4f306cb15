#include "cnev/gauss.hpp"

#include <cmath>
#include <doctest.h>

#include "oracles.hpp"

using namespace cnev;

TEST_CASE("std_normal_cdf basics") {
  CHECK(std_normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(std::abs(std_normal_cdf(40.0) - 1.0) < 1e-15);
  CHECK(std_normal_cdf(-40.0) < 1e-300);
  CHECK(std_normal_cdf(1.959964) == doctest::Approx(0.975).epsilon(1e-6));

  // agreement with the series/continued-fraction oracle
  for (double x = -8.0; x <= 8.0; x += 0.37) {
    CHECK(std::abs(std_normal_cdf(x) - oracle::norm_cdf(x)) < 1e-15);
  }
  // symmetry and monotonicity
  double prev = 0.0;
  for (double x = -6.0; x <= 6.0; x += 0.25) {
    const double p = std_normal_cdf(x);
    CHECK(std::abs(p + std_normal_cdf(-x) - 1.0) < 1e-15);
    CHECK(p >= prev);
    prev = p;
  }
}

TEST_CASE("std_normal_quantile") {
  CHECK(std_normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(std_normal_quantile(0.975) ==
        doctest::Approx(oracle::norm_quantile_bisect(0.975)).epsilon(1e-10));
  CHECK(std_normal_quantile(0.975) == doctest::Approx(1.959964).epsilon(1e-6));

  for (double p = 0.01; p < 0.5; p += 0.03) {
    CHECK(std_normal_quantile(p) ==
          doctest::Approx(-std_normal_quantile(1.0 - p)).epsilon(1e-13));
  }
  // round trip contract
  for (double p : {1e-12, 1e-8, 1e-4, 0.01, 0.2, 0.5, 0.8, 0.99, 1.0 - 1e-8}) {
    CHECK(std::abs(std_normal_cdf(std_normal_quantile(p)) - p) < 1e-12);
  }
  CHECK_THROWS_AS(std_normal_quantile(0.0), std::domain_error);
  CHECK_THROWS_AS(std_normal_quantile(1.0), std::domain_error);
  CHECK_THROWS_AS(std_normal_quantile(-0.2), std::domain_error);
}

TEST_CASE("bvn_copula_cdf special values") {
  CHECK(bvn_copula_cdf(0.3, 0.7, 0.0) == doctest::Approx(0.21).epsilon(1e-14));
  CHECK(bvn_copula_cdf(0.3, 0.7, 1.0) == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(bvn_copula_cdf(0.3, 0.7, -1.0) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(bvn_copula_cdf(0.6, 0.7, -1.0) ==
        doctest::Approx(0.3).epsilon(1e-14));

  // closed form at the medians: 1/4 + asin(rho)/(2*pi)
  const double expected = 0.25 + std::asin(0.5) / (2.0 * M_PI);
  CHECK(bvn_copula_cdf(0.5, 0.5, 0.5) == doctest::Approx(expected).epsilon(1e-12));
  // and the 2-D quadrature oracle agrees
  const double quad = oracle::bvn_cdf_quad(0.0, 0.0, 0.5);
  CHECK(std::abs(expected - quad) < 1e-10);
}

TEST_CASE("bvn_copula_cdf accuracy against 2-D quadrature") {
  for (double rho : {-0.95, -0.6, -0.2, 0.0, 0.3, 0.7, 0.925, 0.99}) {
    for (double u : {0.05, 0.3, 0.5, 0.9}) {
      for (double v : {0.1, 0.45, 0.8, 0.99}) {
        const double x = oracle::norm_quantile_bisect(u);
        const double y = oracle::norm_quantile_bisect(v);
        const double ref = oracle::bvn_cdf_quad(x, y, rho);
        CHECK(std::abs(bvn_copula_cdf(u, v, rho) - ref) < 1e-10);
      }
    }
  }
}

TEST_CASE("bvn_copula_cdf Frechet bounds") {
  for (double rho = -0.9; rho <= 0.95; rho += 0.185) {
    for (double u = 0.1; u < 1.0; u += 0.2) {
      for (double v = 0.1; v < 1.0; v += 0.2) {
        const double c = bvn_copula_cdf(u, v, rho);
        CHECK(c >= std::max(u + v - 1.0, 0.0) - 1e-12);
        CHECK(c <= std::min(u, v) + 1e-12);
      }
    }
  }
}

TEST_CASE("bvn_copula_cond") {
  CHECK(bvn_copula_cond(0.37, 0.62, 0.0) == doctest::Approx(0.37).epsilon(1e-13));
  CHECK(bvn_copula_cond(0.5, 0.5, 0.5) == doctest::Approx(0.5).epsilon(1e-13));
  const double expected =
      oracle::norm_cdf(oracle::norm_quantile_bisect(0.9) / std::sqrt(0.51));
  CHECK(bvn_copula_cond(0.9, 0.5, 0.7) == doctest::Approx(expected).epsilon(1e-10));
  CHECK_THROWS_AS(bvn_copula_cond(0.5, 0.5, 1.0), std::domain_error);

  // nondecreasing in u
  double prev = -1.0;
  for (double u = 0.02; u < 1.0; u += 0.02) {
    const double c = bvn_copula_cond(u, 0.3, -0.4);
    CHECK(c >= prev);
    prev = c;
  }
}

TEST_CASE("bvn_copula_density") {
  CHECK(bvn_copula_density(0.3, 0.8, 0.0) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(bvn_copula_density(0.5, 0.5, 0.5) ==
        doctest::Approx(1.0 / std::sqrt(0.75)).epsilon(1e-13));
  for (double u : {0.2, 0.55, 0.9}) {
    for (double v : {0.15, 0.7}) {
      CHECK(bvn_copula_density(u, v, 0.6) ==
            doctest::Approx(bvn_copula_density(v, u, 0.6)).epsilon(1e-13));
      CHECK(bvn_copula_density(u, v, 0.6) > 0.0);
    }
  }
  CHECK_THROWS_AS(bvn_copula_density(0.0, 0.5, 0.3), std::domain_error);
  CHECK_THROWS_AS(bvn_copula_density(0.5, 1.0, 0.3), std::domain_error);
}

TEST_CASE("finite differences tie cdf, cond and density together") {
  const double h = 1e-5;
  for (double rho : {-0.8, -0.4, 0.0, 0.45, 0.85}) {
    for (int i = 1; i <= 9; ++i) {
      for (int j = 1; j <= 9; ++j) {
        const double u = i / 10.0, v = j / 10.0;
        const double fd_cond = oracle::central_diff(
            [&](double t) { return bvn_copula_cdf(u, t, rho); }, v, h);
        const double cond = bvn_copula_cond(u, v, rho);
        if (cond > 1e-8) {
          CHECK(fd_cond == doctest::Approx(cond).epsilon(1e-5));
        }
        const double fd_dens = oracle::central_diff(
            [&](double t) { return bvn_copula_cond(t, v, rho); }, u, h) /
            1.0;
        CHECK(fd_dens == doctest::Approx(bvn_copula_density(u, v, rho))
                             .epsilon(1e-4));
      }
    }
  }
}

TEST_CASE("density integrates to one") {
  // composite trapezoid on cell centres; the corner singularities carry
  // negligible mass at this resolution
  const int m = 400;
  const double h = 1.0 / m;
  double total = 0.0;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      total += bvn_copula_density((i + 0.5) * h, (j + 0.5) * h, 0.4);
    }
  }
  total *= h * h;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-3));
}
