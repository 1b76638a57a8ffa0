#pragma once

#include "forcefit/contact.hpp"
#include "forcefit/scene.hpp"

#include <cstdint>
#include <vector>

namespace forcefit {

/// Multiplies each of the 15 finger coefficients by a draw from N(1, 0.1).
/// With `shared`, one set of 15 draws applies to every frame; otherwise each
/// frame draws its own. Rigid DoF are untouched.
Eigen::MatrixXd injectFingerNoise(const Eigen::MatrixXd& handDof, std::uint64_t seed, bool shared = true,
                                  double stddev = 0.1);

/// 21 reported joints per frame, world frame.
std::vector<std::vector<Vec3>> jointTrajectory(const SceneTrajectory& scene);

/// Mean joint position error over joints and frames, in millimeters.
double mpjpe(const std::vector<std::vector<Vec3>>& predicted, const std::vector<std::vector<Vec3>>& truth);

/// Per object vertex contact probability, averaged over frames.
std::vector<double> contactMapFromPose(const SceneTrajectory& scene, const ContactParams& params);

/// Signed distance of every object vertex to the hand, per frame.
std::vector<std::vector<double>> objectDistances(const SceneTrajectory& scene);

/// Mann-Whitney statistic with tied ranks averaged. Labels are 0/1; throws
/// std::invalid_argument("undefined AUC") unless both classes occur.
double rocAuc(const std::vector<double>& predicted, const std::vector<int>& truth);

/// Average precision: step integration of precision over recall, with tied
/// scores entering as one threshold.
double prAuc(const std::vector<double>& predicted, const std::vector<int>& truth);

struct MetricsReport {
  double mpjpe = 0.0;  // mm
  double prAuc = 0.0;
  double rocAuc = 0.0;
};

/// Metrics of `predicted` against `truth`, whose truthContact labels are
/// used with -1 entries skipped. The contact map uses `contact`.
MetricsReport evaluateScene(const SceneTrajectory& predicted, const SceneTrajectory& truth,
                            const ContactParams& contact);

/// Count of object vertices deeper than `depth` inside the hand, over all frames.
int countPenetrating(const SceneTrajectory& scene, double depth);

}  // namespace forcefit
