#include <gtest/gtest.h>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "edlbev/specfun.hpp"

namespace sf = edlbev::specfun;

namespace {

// Euler-Mascheroni constant from H_n - ln n with the Euler-Maclaurin tail,
// evaluated in long double. Independent of the digamma implementation.
long double euler_mascheroni_reference() {
  constexpr int n = 2000;
  long double harmonic = 0.0L;
  for (int k = n; k >= 1; --k) harmonic += 1.0L / k;
  const long double nn = n;
  return harmonic - std::log(nn) - 1.0L / (2 * nn) + 1.0L / (12 * nn * nn) - 1.0L / (120 * nn * nn * nn * nn) +
         1.0L / (252 * std::pow(nn, 6.0L));
}

std::vector<double> log_spaced(double lo, double hi, int n) {
  std::vector<double> xs;
  for (int i = 0; i < n; ++i) xs.push_back(lo * std::pow(hi / lo, double(i) / (n - 1)));
  return xs;
}

} // namespace

TEST(LogGamma, FactorialIdentities) {
  EXPECT_NEAR(sf::log_gamma(1.0), 0.0, 1e-12);
  EXPECT_NEAR(sf::log_gamma(2.0), 0.0, 1e-12);
  EXPECT_NEAR(sf::log_gamma(5.0), std::log(24.0), 1e-12);
  EXPECT_NEAR(sf::log_gamma(5.0), 3.1780538, 1e-7);
}

TEST(LogGamma, HalfIsLogSqrtPi) {
  const long double ref = 0.5L * std::log(std::numbers::pi_v<long double>);
  EXPECT_NEAR(sf::log_gamma(0.5), double(ref), 1e-12);
}

TEST(LogGamma, MatchesBoostAcrossRange) {
  // Absolute 1e-12 below |lnGamma| = 1; relative beyond, where the value
  // itself cannot be represented to 1e-12 absolute in double precision.
  for (double x : log_spaced(1e-3, 1e6, 400)) {
    const double ref = boost::math::lgamma(x);
    EXPECT_NEAR(sf::log_gamma(x), ref, 1e-12 * std::max(1.0, std::abs(ref))) << "x=" << x;
  }
}

TEST(LogGamma, RejectsNonPositive) {
  EXPECT_THROW(sf::log_gamma(0.0), std::domain_error);
  EXPECT_THROW(sf::log_gamma(-1.5), std::domain_error);
}

TEST(Digamma, UnitStepIsOne) { EXPECT_DOUBLE_EQ(sf::digamma(2.0) - sf::digamma(1.0), 1.0); }

TEST(Digamma, EulerMascheroni) {
  const long double gamma_em = euler_mascheroni_reference();
  EXPECT_NEAR(sf::digamma(1.0), -double(gamma_em), 1e-10);
  EXPECT_NEAR(sf::digamma(1.0), -0.5772156649, 1e-10);
}

TEST(Digamma, Half) {
  const long double ref = -euler_mascheroni_reference() - 2.0L * std::log(2.0L);
  EXPECT_NEAR(sf::digamma(0.5), double(ref), 1e-10);
}

TEST(Digamma, MatchesBoostAcrossRange) {
  for (double x : log_spaced(1e-3, 1e6, 400)) {
    EXPECT_NEAR(sf::digamma(x), boost::math::digamma(x), 1e-10) << "x=" << x;
  }
}

TEST(Digamma, RecurrenceOnRandomPoints) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(1e-9, 50.0);
  for (int i = 0; i < 1000; ++i) {
    const double x = dist(rng);
    EXPECT_LT(std::abs(sf::digamma(x + 1.0) - sf::digamma(x) - 1.0 / x), 1e-10) << "x=" << x;
  }
}

TEST(Digamma, RejectsNonPositive) { EXPECT_THROW(sf::digamma(0.0), std::domain_error); }

TEST(Trigamma, ZetaTwo) { EXPECT_NEAR(sf::trigamma(1.0), std::numbers::pi * std::numbers::pi / 6.0, 1e-8); }

TEST(Trigamma, Recurrence) { EXPECT_NEAR(sf::trigamma(2.0) - (sf::trigamma(1.0) - 1.0), 0.0, 1e-12); }

TEST(Trigamma, FiniteDifferenceOfDigammaAtTen) {
  const double h = 1e-5;
  const double fd = (sf::digamma(10.0 + h) - sf::digamma(10.0 - h)) / (2 * h);
  EXPECT_NEAR(sf::trigamma(10.0), fd, 1e-6);
}

TEST(Trigamma, MatchesBoostAcrossRange) {
  for (double x : log_spaced(1e-3, 1e6, 400)) {
    EXPECT_NEAR(sf::trigamma(x), boost::math::trigamma(x), 1e-8) << "x=" << x;
  }
}

TEST(Trigamma, IsDerivativeOfDigamma) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> dist(0.05, 100.0);
  for (int i = 0; i < 100; ++i) {
    const double x = dist(rng);
    const double h = 1e-5 * std::max(1.0, x);
    const double fd = (sf::digamma(x + h) - sf::digamma(x - h)) / (2 * h);
    const double tri = sf::trigamma(x);
    EXPECT_LT(std::abs(tri - fd) / std::abs(tri), 1e-5) << "x=" << x;
  }
}

TEST(Trigamma, RecurrenceOnRandomPoints) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> dist(0.01, 50.0);
  for (int i = 0; i < 1000; ++i) {
    const double x = dist(rng);
    const double residual = sf::trigamma(x + 1.0) - sf::trigamma(x) + 1.0 / (x * x);
    EXPECT_LT(std::abs(residual), 1e-10 * std::max(1.0, 1.0 / (x * x))) << "x=" << x;
  }
}

TEST(LogBeta, ClosedForms) {
  EXPECT_NEAR(sf::log_beta(1.0, 1.0), 0.0, 1e-14);
  EXPECT_NEAR(sf::log_beta(2.0, 3.0), std::log(1.0 / 12.0), 1e-12);
}

TEST(LogBeta, ExactlySymmetric) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> dist(1e-3, 100.0);
  for (int i = 0; i < 50; ++i) {
    const double a = dist(rng), b = dist(rng);
    EXPECT_EQ(sf::log_beta(a, b), sf::log_beta(b, a));
  }
}

TEST(LogBeta, RejectsNonPositive) {
  EXPECT_THROW(sf::log_beta(0.0, 1.0), std::domain_error);
  EXPECT_THROW(sf::log_beta(1.0, -2.0), std::domain_error);
}

TEST(Softplus, Values) {
  EXPECT_NEAR(sf::softplus(0.0), std::log(2.0), 1e-15);
  EXPECT_NEAR(sf::softplus(0.0), 0.6931472, 1e-7);
  const double tiny = sf::softplus(-100.0);
  EXPECT_GT(tiny, 0.0);
  EXPECT_LT(tiny, 1e-40);
  EXPECT_NEAR(sf::softplus(100.0), 100.0, 1e-12);
  EXPECT_TRUE(std::isfinite(sf::softplus(1e6)));
}

TEST(Softplus, MonotoneAndPositive) {
  double prev = 0.0;
  for (double x = -60.0; x <= 60.0; x += 0.37) {
    const double v = sf::softplus(x);
    EXPECT_GT(v, 0.0);
    EXPECT_GT(v, prev);
    prev = v;
  }
}

TEST(SpecialFunctions, FiniteOverSupportedRange) {
  for (double x : log_spaced(1e-3, 1e6, 200)) {
    EXPECT_TRUE(std::isfinite(sf::log_gamma(x)));
    EXPECT_TRUE(std::isfinite(sf::digamma(x)));
    EXPECT_TRUE(std::isfinite(sf::trigamma(x)));
    EXPECT_TRUE(std::isfinite(sf::log_beta(x, x)));
    EXPECT_TRUE(std::isfinite(sf::softplus(x)));
  }
}
