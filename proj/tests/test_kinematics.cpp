#include "forcefit/kinematics.hpp"
#include "forcefit/shapes.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

using namespace forcefit;

namespace {

Vec3 randomVec(std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return Vec3(u(rng), u(rng), u(rng));
}

HandPose randomHandPose(std::mt19937_64& rng) {
  HandPose p;
  p.axisAngle = randomVec(rng, 1.0);
  p.translation = randomVec(rng, 0.1);
  std::uniform_real_distribution<double> c(-0.3, 0.9);
  for (int k = 0; k < kPoseCoeffs; ++k) p.coeffs[k] = c(rng);
  return p;
}

}  // namespace

TEST(Rodrigues, KnownRotations) {
  EXPECT_EQ(axisAngleToMatrix(Vec3::Zero()), Mat3::Identity());
  const Vec3 r = axisAngleToMatrix(Vec3(0, 0, std::numbers::pi / 2)) * Vec3(1, 0, 0);
  EXPECT_NEAR((r - Vec3(0, 1, 0)).norm(), 0.0, 1e-9);
}

TEST(Rodrigues, MatchesEigenAngleAxis) {
  std::mt19937_64 rng(1);
  for (int k = 0; k < 200; ++k) {
    Vec3 aa = randomVec(rng, 3.0);
    if (k % 4 == 0) aa *= 1e-9;
    const double angle = aa.norm();
    const Mat3 ref = angle > 0 ? Eigen::AngleAxisd(angle, aa / angle).toRotationMatrix() : Mat3::Identity();
    EXPECT_LT((axisAngleToMatrix(aa) - ref).norm(), 1e-14);
  }
}

TEST(Rodrigues, JacobianMatchesFiniteDifferences) {
  std::mt19937_64 rng(2);
  const double h = 1e-6;
  for (int k = 0; k < 50; ++k) {
    const Vec3 aa = k == 0 ? Vec3::Zero() : randomVec(rng, k % 2 ? 2.5 : 1e-4);
    const auto J = axisAngleJacobian(aa);
    for (int a = 0; a < 3; ++a) {
      Vec3 e = Vec3::Zero();
      e[a] = h;
      const Mat3 fd = (axisAngleToMatrix(aa + e) - axisAngleToMatrix(aa - e)) / (2 * h);
      EXPECT_LT((fd - J[a]).norm(), 1e-8) << "aa " << aa.transpose();
    }
  }
}

TEST(Rodrigues, ScalarGradientPullback) {
  std::mt19937_64 rng(4);
  const Mat3 W = Mat3::Random();
  for (int k = 0; k < 20; ++k) {
    const Vec3 aa = randomVec(rng, 2.0);
    const Vec3 g = axisAngleGradient(aa, W);
    for (int a = 0; a < 3; ++a) {
      Vec3 e = Vec3::Zero();
      e[a] = 1e-6;
      const double fd =
          ((W.cwiseProduct(axisAngleToMatrix(aa + e))).sum() - (W.cwiseProduct(axisAngleToMatrix(aa - e))).sum()) /
          2e-6;
      EXPECT_NEAR(fd, g[a], 1e-8);
    }
  }
}

TEST(ObjectPose, IdentityAndTranslation) {
  const TriMesh box = makeBox(Vec3::Zero(), Vec3(0.01, 0.02, 0.03), {2, 2, 2});
  const TriMesh same = poseObject(ObjectPose{}, box);
  for (std::size_t i = 0; i < box.vertexCount(); ++i) EXPECT_EQ(same.vertices[i], box.vertices[i]);
  ObjectPose shift;
  shift.translation = Vec3(0, 0.1, 0);
  const TriMesh moved = poseObject(shift, box);
  for (std::size_t i = 0; i < box.vertexCount(); ++i) {
    EXPECT_NEAR((moved.vertices[i] - box.vertices[i] - Vec3(0, 0.1, 0)).norm(), 0.0, 1e-15);
    EXPECT_NEAR((moved.vertexNormals[i] - box.vertexNormals[i]).norm(), 0.0, 1e-12);
  }
}

TEST(SurrogateHand, Shape) {
  const auto hand = builtinHand();
  EXPECT_NO_THROW(hand->validate());
  EXPECT_EQ(hand->jointCount(), 16);
  EXPECT_GT(hand->restMesh.vertexCount(), 500u);
  EXPECT_LT(hand->restMesh.vertexCount(), 1200u);
  EXPECT_EQ(hand->jointRegressor.rows(), kReportedJoints);
  // Skinning weights are a partition of unity.
  for (int v = 0; v < hand->skinWeights.rows(); ++v) EXPECT_NEAR(hand->skinWeights.row(v).sum(), 1.0, 1e-12);
}

TEST(SurrogateHand, ZeroPoseIsRest) {
  const auto hand = builtinHand();
  const PosedHand posed = poseHand(HandPose{}, *hand);
  for (std::size_t i = 0; i < posed.mesh.vertexCount(); ++i) {
    EXPECT_NEAR((posed.mesh.vertices[i] - hand->restMesh.vertices[i]).norm(), 0.0, 1e-14);
  }
  for (int j = 0; j < hand->jointCount(); ++j) EXPECT_NEAR((posed.joints[j] - hand->jointRest[j]).norm(), 0.0, 1e-12);
}

TEST(SurrogateHand, CoefficientOnlyMovesItsFinger) {
  const auto hand = builtinHand();
  const PosedHand rest = poseHand(HandPose{}, *hand);
  for (int f = 0; f < 5; ++f) {
    HandPose p;
    p.coeffs[3 * f] = 0.5;
    const PosedHand bent = poseHand(p, *hand);
    int moved = 0;
    for (int v = 0; v < hand->skinWeights.rows(); ++v) {
      double onFinger = 0.0;
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(hand->skinWeights, v); it; ++it) {
        if (it.col() >= 1 + 3 * f && it.col() <= 3 + 3 * f) onFinger += it.value();
      }
      const double shift = (bent.mesh.vertices[v] - rest.mesh.vertices[v]).norm();
      if (onFinger == 0.0) {
        EXPECT_EQ(shift, 0.0) << "finger " << f << " vertex " << v;
      } else {
        moved += shift > 0.0;
      }
    }
    EXPECT_GT(moved, 10);
  }
}

TEST(SurrogateHand, BackpropMatchesFiniteDifferences) {
  const auto hand = builtinHand();
  std::mt19937_64 rng(8);
  const HandPose pose = randomHandPose(rng);
  const HandForward fwd = forwardHand(pose, *hand);
  std::vector<Vec3> va(fwd.vertices.size()), ja(fwd.joints.size());
  for (auto& a : va) a = randomVec(rng, 1.0);
  for (auto& a : ja) a = randomVec(rng, 1.0);
  const Vector21d g = backpropHand(fwd, *hand, va, ja);
  auto scalar = [&](const Vector21d& dof) {
    const HandForward f = forwardHand(HandPose::fromRow(dof.transpose()), *hand);
    double s = 0.0;
    for (std::size_t i = 0; i < va.size(); ++i) s += va[i].dot(f.vertices[i]);
    for (std::size_t j = 0; j < ja.size(); ++j) s += ja[j].dot(f.joints[j]);
    return s;
  };
  const Vector21d x = pose.toVector();
  for (int k = 0; k < kHandDof; ++k) {
    Vector21d e = Vector21d::Zero();
    e[k] = 1e-6;
    const double fd = (scalar(x + e) - scalar(x - e)) / 2e-6;
    EXPECT_NEAR(fd, g[k], 1e-6 * std::max(1.0, std::abs(fd))) << "dof " << k;
  }
}

TEST(SkinModelIo, RoundTrip) {
  const auto hand = builtinHand();
  std::stringstream ss;
  writeSkinModel(ss, *hand);
  const SkinnedHandModel back = readSkinModel(ss);
  EXPECT_EQ(back.jointCount(), hand->jointCount());
  EXPECT_EQ(back.parents, hand->parents);
  std::mt19937_64 rng(5);
  const HandPose p = randomHandPose(rng);
  const PosedHand a = poseHand(p, *hand), b = poseHand(p, back);
  for (std::size_t i = 0; i < a.mesh.vertexCount(); ++i) EXPECT_EQ(a.mesh.vertices[i], b.mesh.vertices[i]);
}

TEST(SkinModelIo, RejectsGarbage) {
  std::istringstream in("NOT A MODEL\n");
  EXPECT_ANY_THROW(readSkinModel(in));
}
