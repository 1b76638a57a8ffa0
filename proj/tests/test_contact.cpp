#include "forcefit/contact.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace forcefit;

TEST(ContactProbability, ValueAtZeroIsP0) {
  for (double p0 : {0.5, 0.1, 0.37, 0.9}) {
    for (double z : {0.002, 0.03}) EXPECT_EQ(contactProbability(0.0, {z, p0}), p0);
  }
}

TEST(ContactProbability, OneWidthInside) {
  EXPECT_NEAR(contactProbability(-0.002, {0.002, 0.5}), 1.0 / (1.0 + std::exp(-6.0)), 1e-15);
  EXPECT_NEAR(contactProbability(-0.002, {0.002, 0.5}), 0.997527, 1e-6);
}

TEST(ContactProbability, MonotoneAndScaleInvariant) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> d(-0.05, 0.05), z(1e-3, 0.05), a(0.1, 10.0), p(0.05, 0.95);
  for (int k = 0; k < 1000; ++k) {
    const ContactParams c{z(rng), p(rng)};
    double d1 = d(rng), d2 = d(rng);
    if (d1 > d2) std::swap(d1, d2);
    const double p1 = contactProbability(d1, c), p2 = contactProbability(d2, c);
    EXPECT_GE(p1, p2);
    // strict except where both have saturated in double precision
    if (d1 < d2 && !(p1 == 1.0 && p2 == 1.0) && !(p1 == 0.0 && p2 == 0.0)) EXPECT_GT(p1, p2);
    const double alpha = a(rng);
    EXPECT_NEAR(contactProbability(d1, c), contactProbability(alpha * d1, {alpha * c.z, c.p0}), 1e-12);
  }
}

TEST(ContactProbability, DerivativeMatchesFiniteDifferences) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> d(-0.01, 0.01);
  const ContactParams c{0.004, 0.3};
  for (int k = 0; k < 100; ++k) {
    const double x = d(rng), h = 1e-8;
    const double fd = (contactProbability(x + h, c) - contactProbability(x - h, c)) / (2 * h);
    EXPECT_NEAR(contactProbabilityDerivative(x, c), fd, 1e-5 * std::max(1.0, std::abs(fd)));
  }
}

TEST(ContactProbability, FarAwayIsZeroAndSaturatesWithoutNan) {
  EXPECT_LT(contactProbability(0.03, {0.002, 0.5}), 1e-6);
  EXPECT_EQ(contactProbability(-1e3, {0.002, 0.5}), 1.0);
  EXPECT_EQ(contactProbability(1e3, {0.002, 0.5}), 0.0);
}

TEST(ContactParams, Validation) {
  EXPECT_THROW((ContactParams{0.0, 0.5}.validate()), std::invalid_argument);
  EXPECT_THROW((ContactParams{0.002, 1.0}.validate()), std::invalid_argument);
  EXPECT_THROW((ContactParams{0.002, 0.0}.validate()), std::invalid_argument);
  EXPECT_NO_THROW((ContactParams{0.002, 0.5}.validate()));
}

TEST(Anneal, EndpointsAndMidpoint) {
  const AnnealSchedule s{0.030, 0.002, 300};
  EXPECT_EQ(annealedZ(0, s), 0.030);
  EXPECT_NEAR(annealedZ(299, s), 0.002, 1e-18);
  EXPECT_NEAR(annealedZ(150, s), 0.030 * std::pow(0.002 / 0.030, 150.0 / 299.0), 1e-15);
  EXPECT_NEAR(annealedZ(150, s), 0.00770, 0.01 * 0.00770);
  EXPECT_EQ(annealedZ(0, {0.030, 0.002, 1}), 0.002);
  for (int e = 1; e < 300; ++e) EXPECT_LT(annealedZ(e, s), annealedZ(e - 1, s));
  EXPECT_THROW((AnnealSchedule{0.03, 0.002, 0}.validate()), std::invalid_argument);
}

TEST(Sigmoid, StableAtExtremes) {
  EXPECT_EQ(sigmoid(0.0), 0.5);
  EXPECT_EQ(sigmoid(-800.0), 0.0);
  EXPECT_EQ(sigmoid(800.0), 1.0);
  EXPECT_NEAR(sigmoid(-30.0), std::exp(-30.0) / (1 + std::exp(-30.0)), 1e-25);
}
