#include "forcefit/eval.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

using namespace forcefit;

namespace {

double bruteRoc(const std::vector<double>& p, const std::vector<int>& y) {
  double wins = 0;
  long pairs = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = 0; j < p.size(); ++j) {
      if (y[i] != 1 || y[j] != 0) continue;
      ++pairs;
      wins += p[i] > p[j] ? 1.0 : p[i] == p[j] ? 0.5 : 0.0;
    }
  }
  return wins / pairs;
}

// Precision at each distinct threshold, weighted by the recall gained there.
double bruteAp(const std::vector<double>& p, const std::vector<int>& y) {
  std::map<double, int, std::greater<>> thresholds;
  for (double v : p) thresholds[v] = 0;
  const long pos = std::count(y.begin(), y.end(), 1);
  double ap = 0, prevRecall = 0;
  for (const auto& [th, unused] : thresholds) {
    long tp = 0, sel = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (p[i] >= th) {
        ++sel;
        tp += y[i];
      }
    }
    const double recall = static_cast<double>(tp) / pos;
    ap += (recall - prevRecall) * tp / sel;
    prevRecall = recall;
  }
  return ap;
}

}  // namespace

TEST(Roc, FourPointExample) {
  EXPECT_EQ(rocAuc({0.9, 0.8, 0.3, 0.1}, {1, 0, 1, 0}), 0.75);
  EXPECT_NEAR(prAuc({0.9, 0.8, 0.3, 0.1}, {1, 0, 1, 0}), 0.5 + 0.5 * 2.0 / 3.0, 1e-15);
}

TEST(Roc, SeparationAndTies) {
  EXPECT_EQ(rocAuc({0.9, 0.7, 0.2}, {1, 1, 0}), 1.0);
  EXPECT_EQ(prAuc({0.9, 0.7, 0.2}, {1, 1, 0}), 1.0);
  EXPECT_EQ(rocAuc({0.4, 0.4, 0.4, 0.4}, {1, 0, 0, 1}), 0.5);
  EXPECT_THROW(rocAuc({0.1, 0.2}, {1, 1}), std::invalid_argument);
  EXPECT_THROW(rocAuc({0.1, 0.2}, {1, 2}), std::invalid_argument);
  EXPECT_THROW(rocAuc({0.1}, {1, 0}), std::invalid_argument);
}

TEST(Roc, MatchesBruteForceAndMonotoneMaps) {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> size(2, 200), coarse(0, 9);
  std::uniform_real_distribution<double> u(0, 1);
  for (int k = 0; k < 100; ++k) {
    const int n = size(rng);
    std::vector<double> p(n);
    std::vector<int> y(n);
    for (int i = 0; i < n; ++i) {
      p[i] = k % 2 ? coarse(rng) / 10.0 : u(rng);
      y[i] = u(rng) < 0.4;
    }
    y[0] = 1;
    y[1] = 0;
    EXPECT_EQ(rocAuc(p, y), bruteRoc(p, y));
    EXPECT_NEAR(prAuc(p, y), bruteAp(p, y), 1e-12);
    const double a = 0.5 + 3 * u(rng);
    std::vector<double> q(n);
    for (int i = 0; i < n; ++i) q[i] = std::exp(a * p[i]) + std::pow(p[i], 3);
    EXPECT_EQ(rocAuc(q, y), rocAuc(p, y));
    EXPECT_EQ(prAuc(q, y), prAuc(p, y));
  }
}

TEST(Noise, MultiplierStatistics) {
  Eigen::MatrixXd dof = Eigen::MatrixXd::Zero(1000, kHandDof);
  dof.rightCols(15).setOnes();
  dof.leftCols(6).setConstant(0.25);
  const Eigen::MatrixXd noisy = injectFingerNoise(dof, 12, false);
  EXPECT_EQ(noisy.leftCols(6), dof.leftCols(6));
  const Eigen::ArrayXd m = Eigen::Map<const Eigen::ArrayXd>(Eigen::MatrixXd(noisy.rightCols(15)).data(), 15000);
  const double mean = m.mean();
  const double sd = std::sqrt((m - mean).square().sum() / (m.size() - 1));
  EXPECT_NEAR(mean, 1.0, 0.01);
  EXPECT_NEAR(sd, 0.1, 0.01);
  EXPECT_EQ(injectFingerNoise(dof, 12, false), noisy);
  const Eigen::MatrixXd shared = injectFingerNoise(dof, 12, true);
  for (int t = 1; t < 1000; ++t) EXPECT_EQ(shared.row(t), shared.row(0));
  EXPECT_EQ(injectFingerNoise(Eigen::MatrixXd::Zero(3, kHandDof), 1), Eigen::MatrixXd::Zero(3, kHandDof));
}

TEST(Mpjpe, OffsetInMillimeters) {
  std::vector<std::vector<Vec3>> a(2, std::vector<Vec3>(21, Vec3(0.1, 0.2, 0.3)));
  auto b = a;
  EXPECT_EQ(mpjpe(a, b), 0.0);
  for (auto& f : b) {
    for (auto& j : f) j.x() += 0.003;
  }
  EXPECT_NEAR(mpjpe(b, a), 3.0, 1e-9);
}

TEST(SceneMetrics, TruthAgainstItself) {
  const SceneTrajectory truth = generateStaticGrasp(ObjectShape::Sphere, GraspStyle::Wrap, 3, 2).scene;
  const auto m = evaluateScene(truth, truth, ContactParams{0.002, 0.5});
  EXPECT_EQ(m.mpjpe, 0.0);
  EXPECT_EQ(m.prAuc, 1.0);
  EXPECT_EQ(m.rocAuc, 1.0);
  SceneTrajectory far = truth;
  for (int t = 0; t < far.frameCount(); ++t) far.objectDof(t, 4) += 1.0;
  for (double p : contactMapFromPose(far, ContactParams{0.002, 0.5})) EXPECT_LT(p, 1e-6);
  EXPECT_EQ(countPenetrating(far, 0.002), 0);
}
