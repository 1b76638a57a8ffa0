#pragma once

#include "forcefit/forces.hpp"
#include "forcefit/scene.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace forcefit {

enum class ObjectShape { Sphere, Box, Cylinder };
enum class GraspStyle { Pinch, Wrap, WrapSide };

ObjectShape parseObjectShape(const std::string& name);
GraspStyle parseGraspStyle(const std::string& name);
std::string toString(ObjectShape shape);
std::string toString(GraspStyle style);

/// Raised when no force assignment balances gravity.
class NoCertificateError : public std::runtime_error {
 public:
  NoCertificateError() : std::runtime_error("no equilibrium certificate") {}
};

/// Forces f_i at contacts with outward object normals n_i such that
/// mean_i f_i + m g = 0, each f_i = f_n + f_s with f_n = -a n_i,
/// 0 <= a <= cap, f_s orthogonal to n_i, |f_s| <= mu a. Among all such
/// assignments the one of least sum |f_i|^2 is returned, found by Newton
/// iterations on the three-dimensional dual. The cap is fMax (1 - 1e-6).
struct EquilibriumSolution {
  std::vector<Vec3> fn;
  std::vector<Vec3> fs;
  Vec3 residual = Vec3::Zero();  // mean force + m g
  int iterations = 0;
};

/// Throws NoCertificateError when the residual cannot be driven below
/// `tolerance` newtons.
EquilibriumSolution solveEquilibrium(const std::vector<Vec3>& normals, const PhysicsConstants& consts,
                                     double tolerance = 1e-11);

struct GraspOptions {
  PhysicsConstants consts;
  double contactDepth = 3e-4;    // target penetration of each contacting finger
  double contactBand = 0.001;    // truth positive: d < contactBand
  double freeBand = 0.005;       // truth negative: d > freeBand
  double minCurl = 0.4;          // knuckle flexion of contacting fingers other than the thumb
  int maxAttempts = 200;
  int maxCertificateFailures = 30;  // placements that pass every geometric check
};

struct SyntheticScene {
  SceneTrajectory scene;  // ground truth with truthContact and certificate
  std::vector<int> contactFingers;
  int attempts = 0;
};

/// Static grasp of a built-in object by the built-in hand, held fixed over
/// `frames` frames. Deterministic in `seed`.
SyntheticScene generateStaticGrasp(ObjectShape shape, GraspStyle style, int frames, std::uint64_t seed,
                                   const GraspOptions& options = {});

/// Truth labels from signed distances: 1 below contactBand, 0 above
/// freeBand, -1 between.
std::vector<int> contactLabels(const std::vector<double>& distances, double contactBand, double freeBand);

/// E_physics of a static scene whose per-frame contact forces are the
/// certificate, averaged over the certificate's vertices.
double certificatePhysicsEnergy(const SceneTrajectory& scene);

}  // namespace forcefit
