#include "forcefit/energy.hpp"

#include <gtest/gtest.h>

using namespace forcefit;

TEST(Physics, Terms) {
  EXPECT_EQ(ePhysics({Vec3(1, 2, 3)}, {Vec3(1, 2, 3)}), 0.0);
  EXPECT_NEAR(ePhysics({Vec3(0, -0.98, 0)}, {Vec3::Zero()}), 0.9604, 1e-15);
  EXPECT_THROW(ePhysics({Vec3::Zero()}, {}), std::invalid_argument);
}

TEST(ForceReg, ManySmallForcesAreCheaper) {
  EXPECT_EQ(eForceReg({}), 0.0);
  const Vec3 F(0.3, -1.2, 0.4);
  double prev = 1e300;
  for (int k : {1, 2, 4}) {
    std::vector<VertexForceState> f(k);
    for (auto& s : f) s.fn = F / k;
    const double e = eForceReg(f);
    EXPECT_NEAR(e, F.squaredNorm() / k, 1e-15);
    EXPECT_LT(e, prev);
    prev = e;
  }
  VertexForceState s;
  s.fn = Vec3(0, 0, 1);
  s.fs = Vec3(2, 0, 0);
  EXPECT_EQ(eForceReg({s}), 5.0);
}

TEST(Penetration, HingeBeyondTolerance) {
  EXPECT_EQ(ePenetration({0.0, 0.01}, {0.003}, 0.002), 0.0);
  EXPECT_EQ(ePenetration({-0.002}, {}, 0.002), 0.0);
  EXPECT_NEAR(ePenetration({-0.003}, {-0.0025, -0.001}, 0.002), 0.0015, 1e-15);
}

TEST(Deviation, SquaredDisplacement) {
  std::vector<Vec3> a{Vec3(0, 0, 0), Vec3(1, 1, 1)};
  EXPECT_EQ(eDeviation(a, a), 0.0);
  auto b = a;
  b[1].x() += 0.001;
  EXPECT_NEAR(eDeviation(b, a), 1e-6, 1e-18);
  EXPECT_THROW(eDeviation(a, {Vec3::Zero()}), std::invalid_argument);
}

TEST(Smooth, ZeroForConstantVelocity) {
  const double dt = 1.0 / 30;
  std::vector<Vec3> still(5, Vec3(1, 2, 3)), moving;
  for (int t = 0; t < 5; ++t) moving.push_back(Vec3(0.01 * t, 0, -0.02 * t));
  EXPECT_EQ(eSmooth({still}, dt), 0.0);
  EXPECT_NEAR(eSmooth({moving}, dt), 0.0, 1e-20);
  std::vector<Vec3> jump{Vec3::Zero(), Vec3::Zero(), Vec3(0.001, 0, 0)};
  EXPECT_NEAR(eSmooth({jump, still}, dt), 1e-6 / std::pow(dt, 4), 1e-6);
  EXPECT_EQ(eSmooth({{Vec3::Zero(), Vec3(1, 0, 0)}}, dt), 0.0);
}

TEST(Weights, TotalOfUnitParts) {
  EXPECT_EQ(totalEnergy(1, 1, 1, 1, 1, EnergyWeights::zero()).total, 0.0);
  const EnergyBreakdown e = totalEnergy(1, 1, 1, 1, 1, EnergyWeights{});
  EXPECT_NEAR(e.total, 5.21e7, 1e-3 * 5.21e7);
  EXPECT_NEAR(e.total, 5e2 + 0.3 + 5e7 + 2e6 + 1e5, 1e-6);
  EXPECT_EQ(e.physics, 1.0);
  EnergyWeights bad;
  bad.deviation = -1;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}
