#pragma once

#include "forcefit/geometry.hpp"

#include <Eigen/SparseCore>

#include <array>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace forcefit {

inline constexpr int kObjectDof = 6;
inline constexpr int kPoseCoeffs = 15;
inline constexpr int kHandDof = 6 + kPoseCoeffs;
inline constexpr int kReportedJoints = 21;

using PoseCoeffs = Eigen::Matrix<double, kPoseCoeffs, 1>;
using Vector6d = Eigen::Matrix<double, 6, 1>;
using Vector21d = Eigen::Matrix<double, kHandDof, 1>;

/// Rigid object pose for one frame: rotation as an axis-angle vector (radians)
/// and a translation in meters. Row layout: [axisAngle, translation].
struct ObjectPose {
  Vec3 axisAngle = Vec3::Zero();
  Vec3 translation = Vec3::Zero();

  static ObjectPose fromRow(const Eigen::Ref<const Eigen::RowVectorXd>& row);
  Vector6d toVector() const;
};

/// Hand pose for one frame. Row layout: [axisAngle, translation, poseCoeffs].
struct HandPose {
  Vec3 axisAngle = Vec3::Zero();
  Vec3 translation = Vec3::Zero();
  PoseCoeffs coeffs = PoseCoeffs::Zero();

  static HandPose fromRow(const Eigen::Ref<const Eigen::RowVectorXd>& row);
  Vector21d toVector() const;
};

Mat3 skew(const Vec3& v);

/// Rodrigues' formula; exact to machine precision for all angles.
Mat3 axisAngleToMatrix(const Vec3& aa);

/// Partial derivatives dR/daa_k, k = 0..2. A power series is used near the
/// origin so the derivative stays finite at aa = 0.
std::array<Mat3, 3> axisAngleJacobian(const Vec3& aa);

/// Gradient with respect to aa of a scalar whose gradient with respect to
/// R = axisAngleToMatrix(aa) is `dR` (Frobenius pairing).
Vec3 axisAngleGradient(const Vec3& aa, const Mat3& dR);

TriMesh poseObject(const ObjectPose& pose, const TriMesh& restMesh);

/// Linear blend skinning model with a linear pose basis.
///
/// Joint j is posed as G_j = G_parent(j) * [R(r_j) | J_j - J_parent(j)], with
/// r = poseBasis * coeffs stacked per joint, and the posed vertex is
/// sum_j w_vj * G_j * (v - J_j), followed by the global rigid transform.
/// The 21 reported joints are jointRegressor applied to the posed vertices.
struct SkinnedHandModel {
  TriMesh restMesh;
  std::vector<Vec3> jointRest;
  std::vector<int> parents;  // parents[0] == -1, parents[j] < j
  Eigen::SparseMatrix<double, Eigen::RowMajor> skinWeights;     // vertices x joints
  Eigen::MatrixXd poseBasis;                                    // (3 * joints) x 15
  Eigen::SparseMatrix<double, Eigen::RowMajor> jointRegressor;  // 21 x vertices

  int jointCount() const { return static_cast<int>(jointRest.size()); }
  void validate() const;
};

/// Everything a forward pass of the hand produces, kept so the pass can be
/// reversed for gradients.
struct HandForward {
  Vec3 globalAxisAngle;
  Mat3 globalRotation;
  Vec3 globalTranslation;
  Eigen::VectorXd jointAxisAngles;  // 3 * joints
  std::vector<Mat3> localRotations;
  std::vector<Mat3> worldRotations;
  std::vector<Vec3> worldPositions;
  std::vector<Vec3> skinned;  // before the global rigid transform
  std::vector<Vec3> vertices;  // world
  std::vector<Vec3> joints;    // 21 reported joints, world
};

HandForward forwardHand(const HandPose& pose, const SkinnedHandModel& model);

/// Pulls vertex and reported-joint adjoints back to the 21 hand DoF.
/// Either adjoint span may be empty.
Vector21d backpropHand(const HandForward& fwd, const SkinnedHandModel& model,
                       const std::vector<Vec3>& vertexAdjoint,
                       const std::vector<Vec3>& jointAdjoint);

struct PosedHand {
  TriMesh mesh;
  std::vector<Vec3> joints;
};

PosedHand poseHand(const HandPose& pose, const SkinnedHandModel& model);

/// Procedural five-finger hand: a palm block and one tube per finger, 16
/// joints (wrist plus three per finger, ordered thumb, index, middle, ring,
/// pinky), and per finger the modes [proximal flexion, distal flexion,
/// abduction] as pose coefficients 3f..3f+2. Reported joints are the 16
/// skeleton joints followed by the five fingertips.
SkinnedHandModel makeSurrogateHand();

/// Shared instance of makeSurrogateHand().
std::shared_ptr<const SkinnedHandModel> builtinHand();

void writeSkinModel(std::ostream& out, const SkinnedHandModel& model);
void writeSkinModel(const std::string& path, const SkinnedHandModel& model);
SkinnedHandModel readSkinModel(std::istream& in);
SkinnedHandModel readSkinModel(const std::string& path);

}  // namespace forcefit
