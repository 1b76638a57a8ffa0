#pragma once

#include "forcefit/contact.hpp"
#include "forcefit/energy.hpp"
#include "forcefit/forces.hpp"
#include "forcefit/scene.hpp"

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace forcefit {

/// Position of each block in the flat parameter vector
/// [object DoF (T x 6, row-major), hand DoF (T x 21, row-major), field].
struct ParamLayout {
  int frames = 0;
  int fieldSize = 0;

  int objectOffset(int t) const { return kObjectDof * t; }
  int handOffset(int t) const { return kObjectDof * frames + kHandDof * t; }
  int coeffOffset(int t) const { return handOffset(t) + 6; }
  int fieldOffset() const { return (kObjectDof + kHandDof) * frames; }
  int size() const { return fieldOffset() + fieldSize; }
};

struct ParamVector {
  Eigen::MatrixXd objectDof;  // T x 6
  Eigen::MatrixXd handDof;    // T x 21
  Eigen::VectorXd field;

  ParamLayout layout() const;
  Eigen::VectorXd flatten() const;
  static ParamVector unflatten(const Eigen::VectorXd& flat, const ParamLayout& layout);
};

/// Frames and vertex samples that one energy evaluation covers.
struct BatchSpec {
  std::vector<int> frames;
  std::vector<int> objectVertices;
  std::vector<int> handVertices;

  /// Every vertex of both meshes over the given frames.
  static BatchSpec allVertices(const SceneTrajectory& scene, std::vector<int> frames);
};

struct GradientReport {
  EnergyBreakdown energy;
  Eigen::VectorXd gradient;

  double value() const { return energy.total; }
};

class NonFiniteEnergyError : public std::runtime_error {
 public:
  explicit NonFiniteEnergyError(const std::string& term)
      : std::runtime_error("non-finite energy term '" + term + "'"), term_(term) {}
  const std::string& term() const { return term_; }

 private:
  std::string term_;
};

struct EnergyOptions {
  EnergyWeights weights;
  PhysicsConstants consts;
  ContactParams contact;
  int hidden = 64;
  bool includeHand = true;  // hand-side penetration, deviation and smoothing
  DistanceMode distanceMode = DistanceMode::Surface;
  int threads = 0;          // 0: threadCount()
};

/// Forces and distances of one frame of a batch.
struct FrameForceReport {
  int frame = -1;
  std::vector<int> vertices;
  std::vector<VertexForceState> states;
  std::vector<Vec3> normals;
  std::vector<double> handDistances;
  Vec3 netForce = Vec3::Zero();
  Vec3 netForceFd = Vec3::Zero();
  bool physicsDefined = false;
};

/// The energy of a scene as a function of the flat parameter vector. The
/// scene passed at construction is the reference for the deviation term and
/// supplies meshes, mass and frame interval; its DoF are not otherwise used.
class EnergyModel {
 public:
  EnergyModel(const SceneTrajectory& reference, EnergyOptions options);

  const ParamLayout& layout() const { return layout_; }
  const EnergyOptions& options() const { return options_; }
  const SceneTrajectory& reference() const { return reference_; }
  void setContactWidth(double z);
  void setWeights(const EnergyWeights& weights);

  /// The reference DoF followed by a freshly initialized force field.
  Eigen::VectorXd initialParameters(std::uint64_t fieldSeed) const;

  EnergyBreakdown evaluate(const Eigen::VectorXd& params, const BatchSpec& batch) const;
  GradientReport evaluateWithGradient(const Eigen::VectorXd& params, const BatchSpec& batch) const;
  std::vector<FrameForceReport> inspect(const Eigen::VectorXd& params, const BatchSpec& batch) const;

  /// Network input centering: the object centroid at the first reference frame.
  const Vec3& fieldOrigin() const { return origin_; }
  double normalizedTime(int t) const;

 private:
  struct FrameState;
  void run(const Eigen::VectorXd& params, const BatchSpec& batch, EnergyBreakdown* energy,
           Eigen::VectorXd* gradient, std::vector<FrameForceReport>* inspect) const;

  SceneTrajectory reference_;
  EnergyOptions options_;
  ParamLayout layout_;
  std::shared_ptr<MeshDistanceField> objectField_;  // object local frame
  std::vector<std::vector<Vec3>> referenceHand_;    // per frame, world
  Vec3 origin_;
};

/// Central differences (E(x + h e_k) - E(x - h e_k)) / 2h for every
/// coordinate of x.
Eigen::VectorXd finiteDifferenceGradient(const std::function<double(const Eigen::VectorXd&)>& energy,
                                         const Eigen::VectorXd& x, double h);

/// Central differences of the model energy, taken per term and then
/// weighted, which limits cancellation between large terms. `coordinates`
/// selects the entries to difference (all when empty); other entries are 0.
Eigen::VectorXd finiteDifferenceGradient(const EnergyModel& model, const Eigen::VectorXd& params,
                                         const BatchSpec& batch, double h,
                                         const std::vector<int>& coordinates = {});

}  // namespace forcefit
