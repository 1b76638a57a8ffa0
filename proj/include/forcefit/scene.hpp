#pragma once

#include "forcefit/kinematics.hpp"

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace forcefit {

/// Oracle force at one object vertex, world frame.
struct CertificateForce {
  int vertex = -1;
  Vec3 fn = Vec3::Zero();
  Vec3 fs = Vec3::Zero();
};

/// A force assignment over contact vertices that balances gravity when
/// averaged over the contact vertices.
struct EquilibriumCertificate {
  std::vector<CertificateForce> forces;

  Vec3 meanForce() const;
};

/// Hand and object trajectories over T frames plus the data needed to pose
/// them. Truth labels are per object vertex: 1 contact, 0 free, -1 unlabeled.
struct SceneTrajectory {
  TriMesh objectMesh;
  std::string objectMeshRef = "builtin:sphere";
  std::shared_ptr<const SkinnedHandModel> hand;
  std::string modelRef = "builtin:hand";
  double mass = 0.1;
  double frameDt = 1.0 / 30.0;
  Eigen::MatrixXd objectDof;  // T x 6
  Eigen::MatrixXd handDof;    // T x 21
  std::vector<int> truthContact;
  std::optional<EquilibriumCertificate> certificate;

  int frameCount() const { return static_cast<int>(objectDof.rows()); }
  ObjectPose objectPose(int t) const { return ObjectPose::fromRow(objectDof.row(t)); }
  HandPose handPose(int t) const { return HandPose::fromRow(handDof.row(t)); }
  Eigen::MatrixXd objectTranslations() const { return objectDof.rightCols(3); }

  void validate() const;
};

/// Text format, header "SCENE 1". Mesh and model references are either
/// "builtin:..." names or paths relative to the scene file's directory.
void writeScene(std::ostream& out, const SceneTrajectory& scene);
void writeScene(const std::string& path, const SceneTrajectory& scene);
SceneTrajectory readScene(std::istream& in, const std::string& baseDir = ".");
SceneTrajectory readScene(const std::string& path);

std::shared_ptr<const SkinnedHandModel> loadHandModel(const std::string& ref,
                                                      const std::string& baseDir = ".");
TriMesh loadObjectMesh(const std::string& ref, const std::string& baseDir = ".");

}  // namespace forcefit
