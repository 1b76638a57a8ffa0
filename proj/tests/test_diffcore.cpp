#include "forcefit/diffcore.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace forcefit;

namespace {

const SceneTrajectory& scene4() {
  static const SceneTrajectory s = forcefit::testing::movingGrasp(4, 3);
  return s;
}

EnergyOptions smallOptions() {
  EnergyOptions o;
  o.hidden = 8;
  o.contact.z = 0.01;
  return o;
}

BatchSpec smallBatch(const SceneTrajectory& s, std::vector<int> frames, int count, std::uint64_t seed) {
  BatchSpec b;
  b.frames = std::move(frames);
  b.objectVertices = sampleVertices(count, s.objectMesh, seed);
  b.handVertices = sampleVertices(count, s.hand->restMesh, seed + 1);
  return b;
}

// Parameters moved away from the reference so that deviation terms have gradient.
Eigen::VectorXd perturbed(const EnergyModel& m, std::uint64_t seed) {
  Eigen::VectorXd x = m.initialParameters(seed);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1e-3);
  for (int k = 0; k < m.layout().fieldOffset(); ++k) x[k] += g(rng);
  return x;
}

}  // namespace

TEST(ParamVector, FlattenRoundTrip) {
  const auto& s = scene4();
  ParamVector p{s.objectDof, s.handDof, Eigen::VectorXd::LinSpaced(7, 0, 1)};
  const Eigen::VectorXd flat = p.flatten();
  ASSERT_EQ(flat.size(), p.layout().size());
  EXPECT_EQ(flat.segment<6>(p.layout().objectOffset(2)), s.objectDof.row(2).transpose());
  EXPECT_EQ(flat.segment<21>(p.layout().handOffset(3)), s.handDof.row(3).transpose());
  const ParamVector back = ParamVector::unflatten(flat, p.layout());
  EXPECT_EQ(back.objectDof, s.objectDof);
  EXPECT_EQ(back.handDof, s.handDof);
  EXPECT_EQ(back.field, p.field);
}

TEST(FiniteDifference, QuadraticAndSecondOrder) {
  auto quad = [](const Eigen::VectorXd& x) { return x.squaredNorm(); };
  const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(5, -1, 2);
  EXPECT_LT((finiteDifferenceGradient(quad, x, 1e-4) - 2 * x).norm(), 1e-9);
  auto smooth = [](const Eigen::VectorXd& x) { return std::sin(x[0]) * std::exp(x[1]); };
  Eigen::VectorXd y(2);
  y << 0.3, -0.2;
  const Eigen::Vector2d exact(std::cos(0.3) * std::exp(-0.2), std::sin(0.3) * std::exp(-0.2));
  const double e1 = (finiteDifferenceGradient(smooth, y, 1e-2) - exact).norm();
  const double e2 = (finiteDifferenceGradient(smooth, y, 5e-3) - exact).norm();
  EXPECT_NEAR(e1 / e2, 4.0, 0.1);
  EXPECT_THROW(finiteDifferenceGradient(quad, x, 0.0), std::invalid_argument);
}

TEST(Energy, ZeroWeightsGiveZero) {
  auto o = smallOptions();
  o.weights = EnergyWeights::zero();
  EnergyModel m(scene4(), o);
  const auto r = m.evaluateWithGradient(perturbed(m, 1), smallBatch(scene4(), {1, 2, 3}, 100, 2));
  EXPECT_EQ(r.value(), 0.0);
  EXPECT_EQ(r.gradient.norm(), 0.0);
}

TEST(Energy, DeviationAtReferenceIsStationary) {
  auto o = smallOptions();
  o.weights = EnergyWeights::zero();
  o.weights.deviation = 2e6;
  EnergyModel m(scene4(), o);
  const auto r = m.evaluateWithGradient(m.initialParameters(4), smallBatch(scene4(), {0, 1, 2, 3}, 200, 5));
  EXPECT_EQ(r.energy.deviation, 0.0);
  EXPECT_LT(r.gradient.norm(), 1e-10);
}

TEST(Energy, NoFieldGradientWithoutForceTerms) {
  auto o = smallOptions();
  o.weights.physics = 0.0;
  o.weights.forceReg = 0.0;
  EnergyModel m(scene4(), o);
  const auto r = m.evaluateWithGradient(perturbed(m, 2), smallBatch(scene4(), {2, 3}, 150, 3));
  EXPECT_GT(r.gradient.head(m.layout().fieldOffset()).norm(), 0.0);
  EXPECT_EQ(r.gradient.tail(m.layout().fieldSize).norm(), 0.0);
}

TEST(Energy, DeterministicAcrossThreadCounts) {
  auto o = smallOptions();
  o.threads = 1;
  EnergyModel a(scene4(), o);
  o.threads = 3;
  EnergyModel b(scene4(), o);
  const auto x = perturbed(a, 6);
  const auto batch = smallBatch(scene4(), {3, 1, 2}, 120, 8);
  const auto ra = a.evaluateWithGradient(x, batch), rb = b.evaluateWithGradient(x, batch);
  EXPECT_EQ(ra.value(), rb.value());
  EXPECT_EQ(ra.gradient, rb.gradient);
  EXPECT_EQ(a.evaluate(x, batch).total, ra.value());
}

TEST(Energy, GradientMatchesFiniteDifferences) {
  EnergyModel m(scene4(), smallOptions());
  const auto x = perturbed(m, 9);
  const auto batch = smallBatch(scene4(), {2, 3}, 120, 10);
  const auto r = m.evaluateWithGradient(x, batch);
  EXPECT_GT(r.energy.physics, 0.0);
  EXPECT_GT(r.energy.forceReg, 0.0);
  EXPECT_GT(r.energy.deviation, 0.0);
  EXPECT_GT(r.energy.smooth, 0.0);
  // Every pose coordinate and a spread of field coordinates.
  std::vector<int> coords;
  for (int k = 0; k < m.layout().fieldOffset(); ++k) coords.push_back(k);
  for (int k = m.layout().fieldOffset(); k < m.layout().size(); k += 7) coords.push_back(k);
  const Eigen::VectorXd fd = finiteDifferenceGradient(m, x, batch, 1e-6, coords);
  const double scale = r.gradient.cwiseAbs().maxCoeff();
  int bad = 0;
  for (int k : coords) {
    const double err = std::abs(fd[k] - r.gradient[k]);
    if (err > 1e-4 * std::max(std::abs(fd[k]), 1e-6 * scale)) {
      ++bad;
      ADD_FAILURE() << "coordinate " << k << " analytic " << r.gradient[k] << " fd " << fd[k];
    }
  }
  EXPECT_EQ(bad, 0);
}

TEST(Energy, InspectReportsForcesAndNetForce) {
  EnergyModel m(scene4(), smallOptions());
  const auto x = perturbed(m, 12);
  const auto batch = smallBatch(scene4(), {2, 3}, 80, 13);
  const auto reports = m.inspect(x, batch);
  ASSERT_EQ(reports.size(), 2u);
  PhysicsConstants c;
  for (const auto& r : reports) {
    ASSERT_EQ(r.states.size(), 80u);
    EXPECT_TRUE(r.physicsDefined);
    EXPECT_NEAR((r.netForce - netForce(r.states, c)).norm(), 0.0, 1e-12);
  }
}

TEST(Energy, BatchValidation) {
  EnergyModel m(scene4(), smallOptions());
  const auto x = m.initialParameters(0);
  EXPECT_THROW(m.evaluate(x, smallBatch(scene4(), {}, 10, 1)), std::invalid_argument);
  EXPECT_THROW(m.evaluate(x, smallBatch(scene4(), {4}, 10, 1)), std::out_of_range);
  EXPECT_THROW(m.evaluate(x, smallBatch(scene4(), {1, 1}, 10, 1)), std::invalid_argument);
  EXPECT_THROW(m.evaluate(x.head(10), smallBatch(scene4(), {1}, 10, 1)), std::invalid_argument);
}

TEST(Energy, NonFiniteTermIsNamed) {
  EnergyModel m(scene4(), smallOptions());
  Eigen::VectorXd x = m.initialParameters(0);
  x[m.layout().objectOffset(3) + 3] = 1e200;
  try {
    m.evaluate(x, smallBatch(scene4(), {3}, 20, 1));
    FAIL() << "expected NonFiniteEnergyError";
  } catch (const NonFiniteEnergyError& e) {
    EXPECT_FALSE(e.term().empty());
  }
}
