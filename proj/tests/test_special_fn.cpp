#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "powsq/quadrature_moments.hpp"
#include "powsq/special_fn.hpp"

using namespace powsq;

TEST(Pochhammer, Examples)
{
  EXPECT_EQ(pochhammer(3.7, 0), 1.0);
  double fact = 1.0;
  for (unsigned m = 1; m <= 12; ++m) {
    fact *= m;
    EXPECT_EQ(pochhammer(1.0, m), fact);
  }
  EXPECT_DOUBLE_EQ(pochhammer(0.5, 3), 15.0 / 8.0);
  EXPECT_EQ(pochhammer(std::complex<double>(0.0, 1.0), 2), std::complex<double>(-1.0, 1.0));
}

TEST(Hermite, Examples)
{
  EXPECT_EQ(hermite(0, 0.37), 1.0);
  EXPECT_EQ(hermite(2, 1.0), 2.0);
  EXPECT_EQ(hermite(3, 0.0), 0.0);
  EXPECT_THROW(hermite(201, 1.0), std::domain_error);
}

TEST(Hermite, ClosedForms)
{
  for (double x : {-1.5, -0.2, 0.0, 0.9, 2.4}) {
    EXPECT_NEAR(hermite(4, x), 16 * std::pow(x, 4) - 48 * x * x + 12, 1e-12);
    EXPECT_NEAR(hermite(5, x), 32 * std::pow(x, 5) - 160 * std::pow(x, 3) + 120 * x, 1e-12);
  }
}

TEST(LogGamma, RealAxisAgainstLibm)
{
  for (double x : {0.1, 0.5, 1.0, 2.5, 7.3, 20.0, 170.0})
    EXPECT_NEAR(log_gamma({x, 0.0}).real(), std::lgamma(x), 1e-13 * std::max(1.0, std::abs(std::lgamma(x))));
  EXPECT_THROW(log_gamma({-2.0, 0.0}), std::domain_error);
}

TEST(GammaAbsSq, Examples)
{
  EXPECT_NEAR(gamma_abs_sq(1.0, 0.0), 1.0, 1e-14);
  for (double x : {0.0, 1.0, 3.0}) {
    // product formula: |Gamma(1/2 + ix)|^2 = pi prod (1 + x^2/(n+1/2)^2)^{-1}
    long double prod = std::numbers::pi_v<long double>;
    for (long n = 0; n < 20000000; ++n) {
      const long double q = x / (n + 0.5L);
      prod /= 1.0L + q * q;
    }
    const double closed = std::numbers::pi / std::cosh(std::numbers::pi * x);
    EXPECT_NEAR(gamma_abs_sq(0.5, x) / closed, 1.0, 1e-13);
    EXPECT_NEAR(gamma_abs_sq(0.5, x) / static_cast<double>(prod), 1.0, 1e-6);
  }
  const double g = gamma_abs_sq(0.25, 10.0);
  EXPECT_GT(g, 0.0);
  const double envelope = 2.0 * std::numbers::pi * std::pow(10.0, 2 * 0.25 - 1) * std::exp(-std::numbers::pi * 10.0);
  EXPECT_NEAR(std::log(g) / std::log(envelope), 1.0, 0.01);
}

TEST(GammaAbsSq, FunctionalEquation)
{
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ub(0.05, 4.0), ux(-30.0, 30.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double b = ub(rng), x = ux(rng);
    EXPECT_NEAR(gamma_abs_sq(b + 1.0, x) / ((b * b + x * x) * gamma_abs_sq(b, x)), 1.0, 1e-12) << b << " " << x;
  }
}

TEST(GammaAbsSq, RejectsNonPositiveB)
{
  EXPECT_THROW(gamma_abs_sq(0.0, 1.0), std::domain_error);
  EXPECT_THROW(weight_rho(-0.5, 1.0), std::domain_error);
}

TEST(WeightRho, NormalizationAndEvenness)
{
  EXPECT_NEAR(weight_rho(0.5, 0.0), 1.0, 1e-14);
  for (double x : {0.5, 2.5}) {
    EXPECT_EQ(weight_rho(0.25, x), weight_rho(0.25, -x));
    EXPECT_EQ(weight_rho(0.75, x), weight_rho(0.75, -x));
  }
  const auto mass = integrate_weighted([](double) { return 1.0; }, 0.25, IntegrandBound{0}, 1e-10);
  EXPECT_NEAR(mass.value, 1.0, 1e-8);
}

TEST(Pollaczek, Examples)
{
  EXPECT_EQ(pollaczek(0, 1.7, 0.25), 1.0);
  for (double x : {-1.0, 0.3, 2.0}) EXPECT_NEAR(pollaczek(1, x, 0.25), 2.0 * std::sqrt(2.0) * x, 1e-14);
  for (unsigned m = 0; m <= 20; ++m)
    for (double x : {0.3, 1.7}) {
      const double sign = m % 2 ? -1.0 : 1.0;
      EXPECT_NEAR(pollaczek(m, -x, 0.25), sign * pollaczek(m, x, 0.25), 1e-12 * std::max(1.0, std::abs(pollaczek(m, x, 0.25))));
    }
}

TEST(Pollaczek, SeriesMatchesRecursion)
{
  for (double b : {0.25, 0.75, 1.3})
    for (double x : {0.0, 0.5, -0.5, 2.0, -2.0, 4.5}) {
      const auto seq = pollaczek_sequence(30, x, b);
      for (unsigned m = 0; m <= 30; ++m) {
        const auto s = pollaczek_series(m, x, b);
        const double local = m == 0 ? 1.0 : std::max(std::abs(seq[m]), std::abs(seq[m - 1]));
        EXPECT_LE(std::abs(s.imag_residue), 1e-10 * local);
        EXPECT_LE(std::abs(s.value - seq[m]), 1e-9 * local) << "b=" << b << " x=" << x << " m=" << m;
      }
    }
}

TEST(Pollaczek, PositiveLeadingCoefficient)
{
  for (double b : {0.25, 0.75})
    for (unsigned m = 0; m <= 8; ++m) EXPECT_GT(pollaczek(m, 1e3, b), 0.0);
}

TEST(Pollaczek, RealSimpleInterlacingZeros)
{
  // sign changes on a fine grid: P_m has m of them, and between consecutive
  // zeros of P_{m+1} lies exactly one zero of P_m
  const double b = 0.25;
  const int grid = 40000;
  const double lo = -12.0, hi = 12.0;
  auto zeros = [&](unsigned m) {
    std::vector<double> z;
    double prev = pollaczek_sequence(m, lo, b)[m];
    for (int i = 1; i <= grid; ++i) {
      const double x = lo + (hi - lo) * i / grid;
      const double cur = pollaczek_sequence(m, x, b)[m];
      if ((prev < 0) != (cur < 0)) z.push_back(x);
      prev = cur;
    }
    return z;
  };
  std::vector<double> previous = zeros(1);
  ASSERT_EQ(previous.size(), 1u);
  for (unsigned m = 2; m <= 12; ++m) {
    const auto z = zeros(m);
    ASSERT_EQ(z.size(), m) << "m=" << m;
    for (std::size_t i = 0; i + 1 < z.size(); ++i) {
      int between = 0;
      for (double y : previous) between += (y > z[i] && y < z[i + 1]);
      EXPECT_EQ(between, 1) << "m=" << m << " i=" << i;
    }
    previous = z;
  }
}

TEST(Pollaczek, BeyondSeriesRangeUsesRecursionOnly)
{
  EXPECT_NO_THROW(pollaczek(200, 0.5, 0.75));
  EXPECT_THROW(pollaczek(3, 0.5, 0.0), std::domain_error);
}
