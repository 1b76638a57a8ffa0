#include "forcefit/kinematics.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace forcefit {

ObjectPose ObjectPose::fromRow(const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  if (row.size() != kObjectDof) throw std::invalid_argument("object DoF row must have 6 entries");
  ObjectPose p;
  p.axisAngle = row.segment<3>(0).transpose();
  p.translation = row.segment<3>(3).transpose();
  return p;
}

Vector6d ObjectPose::toVector() const {
  Vector6d v;
  v << axisAngle, translation;
  return v;
}

HandPose HandPose::fromRow(const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  if (row.size() != kHandDof) throw std::invalid_argument("hand DoF row must have 21 entries");
  HandPose p;
  p.axisAngle = row.segment<3>(0).transpose();
  p.translation = row.segment<3>(3).transpose();
  p.coeffs = row.segment<kPoseCoeffs>(6).transpose();
  return p;
}

Vector21d HandPose::toVector() const {
  Vector21d v;
  v << axisAngle, translation, coeffs;
  return v;
}

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

Mat3 axisAngleToMatrix(const Vec3& aa) {
  const double theta = aa.norm();
  const Mat3 k = skew(aa);
  double a = 1.0;
  double b = 0.5;
  if (theta > 1e-8) {
    a = std::sin(theta) / theta;
    const double h = std::sin(0.5 * theta);
    b = 2.0 * h * h / (theta * theta);
  } else {
    a = 1.0 - theta * theta / 6.0;
    b = 0.5 - theta * theta / 24.0;
  }
  return Mat3::Identity() + a * k + b * k * k;
}

std::array<Mat3, 3> axisAngleJacobian(const Vec3& aa) {
  std::array<Mat3, 3> d;
  const double theta = aa.norm();
  if (theta >= 1e-2) {
    // Gallego & Yezzi closed form.
    const Mat3 r = axisAngleToMatrix(aa);
    const Mat3 k = skew(aa);
    const Mat3 iMinusR = Mat3::Identity() - r;
    const double inv = 1.0 / (theta * theta);
    for (int i = 0; i < 3; ++i) {
      const Vec3 e = Vec3::Unit(i);
      d[i] = (aa[i] * k + skew(aa.cross(iMinusR * e))) * inv * r;
    }
    return d;
  }
  // d/dv_i exp([v]) = sum_k 1/k! sum_j A^j E A^(k-1-j).
  const Mat3 a = skew(aa);
  std::array<Mat3, 9> powers;
  powers[0] = Mat3::Identity();
  for (int k = 1; k < 9; ++k) powers[k] = powers[k - 1] * a;
  for (int i = 0; i < 3; ++i) {
    const Mat3 e = skew(Vec3::Unit(i));
    Mat3 acc = Mat3::Zero();
    double factorial = 1.0;
    for (int k = 1; k <= 8; ++k) {
      factorial *= k;
      Mat3 term = Mat3::Zero();
      for (int j = 0; j < k; ++j) term += powers[j] * e * powers[k - 1 - j];
      acc += term / factorial;
    }
    d[i] = acc;
  }
  return d;
}

Vec3 axisAngleGradient(const Vec3& aa, const Mat3& dR) {
  const auto jac = axisAngleJacobian(aa);
  return Vec3(dR.cwiseProduct(jac[0]).sum(), dR.cwiseProduct(jac[1]).sum(),
              dR.cwiseProduct(jac[2]).sum());
}

TriMesh poseObject(const ObjectPose& pose, const TriMesh& restMesh) {
  const Mat3 r = axisAngleToMatrix(pose.axisAngle);
  TriMesh out;
  out.triangles = restMesh.triangles;
  out.vertices.reserve(restMesh.vertices.size());
  for (const auto& v : restMesh.vertices) out.vertices.push_back(r * v + pose.translation);
  out.vertexNormals.reserve(restMesh.vertexNormals.size());
  for (const auto& n : restMesh.vertexNormals) out.vertexNormals.push_back(r * n);
  return out;
}

void SkinnedHandModel::validate() const {
  restMesh.validate();
  const int nv = static_cast<int>(restMesh.vertexCount());
  const int nj = jointCount();
  if (nj < 1) throw std::invalid_argument("skinning model needs at least one joint");
  if (static_cast<int>(parents.size()) != nj) throw std::invalid_argument("parent count mismatch");
  if (parents[0] != -1) throw std::invalid_argument("joint 0 must be the root");
  for (int j = 1; j < nj; ++j) {
    if (parents[j] < 0 || parents[j] >= j) {
      throw std::invalid_argument("joint parents must form a rooted tree in topological order");
    }
  }
  if (skinWeights.rows() != nv || skinWeights.cols() != nj) {
    throw std::invalid_argument("skin weight matrix has the wrong shape");
  }
  for (int v = 0; v < nv; ++v) {
    double sum = 0.0;
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(skinWeights, v); it; ++it) {
      if (it.value() < 0.0) throw std::invalid_argument("negative skin weight");
      sum += it.value();
    }
    if (std::abs(sum - 1.0) > 1e-6) {
      throw std::invalid_argument("skin weights of vertex " + std::to_string(v) + " do not sum to 1");
    }
  }
  if (poseBasis.rows() != 3 * nj || poseBasis.cols() != kPoseCoeffs) {
    throw std::invalid_argument("pose basis must be (3 * joints) x 15");
  }
  if (jointRegressor.rows() != kReportedJoints || jointRegressor.cols() != nv) {
    throw std::invalid_argument("joint regressor must be 21 x vertices");
  }
}

HandForward forwardHand(const HandPose& pose, const SkinnedHandModel& model) {
  const int nj = model.jointCount();
  HandForward f;
  f.globalAxisAngle = pose.axisAngle;
  f.globalRotation = axisAngleToMatrix(pose.axisAngle);
  f.globalTranslation = pose.translation;
  f.jointAxisAngles = model.poseBasis * pose.coeffs;
  f.localRotations.resize(nj);
  f.worldRotations.resize(nj);
  f.worldPositions.resize(nj);
  for (int j = 0; j < nj; ++j) {
    f.localRotations[j] = axisAngleToMatrix(f.jointAxisAngles.segment<3>(3 * j));
    const int p = model.parents[j];
    if (p < 0) {
      f.worldRotations[j] = f.localRotations[j];
      f.worldPositions[j] = model.jointRest[j];
    } else {
      f.worldRotations[j] = f.worldRotations[p] * f.localRotations[j];
      f.worldPositions[j] =
          f.worldRotations[p] * (model.jointRest[j] - model.jointRest[p]) + f.worldPositions[p];
    }
  }
  const auto& rest = model.restMesh.vertices;
  const std::size_t nv = rest.size();
  f.skinned.assign(nv, Vec3::Zero());
  f.vertices.resize(nv);
  for (std::size_t v = 0; v < nv; ++v) {
    Vec3 acc = Vec3::Zero();
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(model.skinWeights, v); it; ++it) {
      const int j = static_cast<int>(it.col());
      acc += it.value() * (f.worldRotations[j] * (rest[v] - model.jointRest[j]) + f.worldPositions[j]);
    }
    f.skinned[v] = acc;
    f.vertices[v] = f.globalRotation * acc + f.globalTranslation;
  }
  f.joints.assign(kReportedJoints, Vec3::Zero());
  for (int k = 0; k < kReportedJoints; ++k) {
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(model.jointRegressor, k); it; ++it) {
      f.joints[k] += it.value() * f.vertices[it.col()];
    }
  }
  return f;
}

Vector21d backpropHand(const HandForward& fwd, const SkinnedHandModel& model,
                       const std::vector<Vec3>& vertexAdjoint,
                       const std::vector<Vec3>& jointAdjoint) {
  const int nj = model.jointCount();
  const std::size_t nv = model.restMesh.vertexCount();
  std::vector<Vec3> adj(nv, Vec3::Zero());
  if (!vertexAdjoint.empty()) {
    if (vertexAdjoint.size() != nv) throw std::invalid_argument("vertex adjoint size mismatch");
    adj = vertexAdjoint;
  }
  if (!jointAdjoint.empty()) {
    for (int k = 0; k < kReportedJoints; ++k) {
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(model.jointRegressor, k); it; ++it) {
        adj[it.col()] += it.value() * jointAdjoint[k];
      }
    }
  }

  Vec3 gradTranslation = Vec3::Zero();
  Mat3 gradGlobalRot = Mat3::Zero();
  std::vector<Mat3> gradWorldRot(nj, Mat3::Zero());
  std::vector<Vec3> gradWorldPos(nj, Vec3::Zero());
  const Mat3 rgT = fwd.globalRotation.transpose();
  const auto& rest = model.restMesh.vertices;
  for (std::size_t v = 0; v < nv; ++v) {
    const Vec3& g = adj[v];
    if (g.isZero(0.0)) continue;
    gradTranslation += g;
    gradGlobalRot += g * fwd.skinned[v].transpose();
    const Vec3 gs = rgT * g;
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(model.skinWeights, v); it; ++it) {
      const int j = static_cast<int>(it.col());
      gradWorldRot[j] += it.value() * gs * (rest[v] - model.jointRest[j]).transpose();
      gradWorldPos[j] += it.value() * gs;
    }
  }

  Eigen::VectorXd gradJointAA = Eigen::VectorXd::Zero(3 * nj);
  for (int j = nj - 1; j >= 0; --j) {
    const int p = model.parents[j];
    Mat3 gradLocal;
    if (p < 0) {
      gradLocal = gradWorldRot[j];
    } else {
      gradWorldRot[p] += gradWorldRot[j] * fwd.localRotations[j].transpose();
      gradLocal = fwd.worldRotations[p].transpose() * gradWorldRot[j];
      gradWorldRot[p] += gradWorldPos[j] * (model.jointRest[j] - model.jointRest[p]).transpose();
      gradWorldPos[p] += gradWorldPos[j];
    }
    gradJointAA.segment<3>(3 * j) =
        axisAngleGradient(fwd.jointAxisAngles.segment<3>(3 * j), gradLocal);
  }

  Vector21d out;
  out.segment<3>(0) = axisAngleGradient(fwd.globalAxisAngle, gradGlobalRot);
  out.segment<3>(3) = gradTranslation;
  out.segment<kPoseCoeffs>(6) = model.poseBasis.transpose() * gradJointAA;
  return out;
}

PosedHand poseHand(const HandPose& pose, const SkinnedHandModel& model) {
  HandForward f = forwardHand(pose, model);
  PosedHand out;
  out.mesh.vertices = std::move(f.vertices);
  out.mesh.triangles = model.restMesh.triangles;
  out.mesh.updateNormals();
  out.joints = std::move(f.joints);
  return out;
}

}  // namespace forcefit
