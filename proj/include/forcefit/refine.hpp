#pragma once

#include "forcefit/diffcore.hpp"

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace forcefit {

struct RefineConfig {
  int epochs = 300;
  int batchFrames = 40;
  int sampleVertices = 5000;
  double lrPose = 1e-4;
  double lrField = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilonAdam = 1e-8;
  bool shareFingerPose = true;
  std::uint64_t seed = 0;
  EnergyWeights weights;
  double zStart = 0.030;
  double zEnd = 0.002;
  double p0 = 0.5;
  double fMax = 5.0;
  double mu = 0.8;
  int hidden = 64;
  bool includeHand = true;
  DistanceMode distanceMode = DistanceMode::Surface;
  int threads = 0;

  void validate() const;
  AnnealSchedule anneal() const { return {zStart, zEnd, epochs}; }
  EnergyOptions energyOptions() const;
};

struct AdamState {
  long step = 0;
  Eigen::VectorXd m;
  Eigen::VectorXd v;
};

/// Bias-corrected Adam with a per-coordinate learning rate.
void adamStep(Eigen::VectorXd& params, const Eigen::VectorXd& grad, AdamState& state,
              const Eigen::VectorXd& lr, double beta1, double beta2, double epsilon);
void adamStep(Eigen::VectorXd& params, const Eigen::VectorXd& grad, AdamState& state, double lr,
              double beta1, double beta2, double epsilon);

/// Energies summed over the batches of one epoch.
struct EpochRecord {
  int epoch = 0;
  double z = 0.0;
  int batches = 0;
  EnergyBreakdown energy;
};

struct RefineResult {
  SceneTrajectory scene;  // refined DoF; meshes, truth and mass from the input
  ForceField field;
  Vec3 fieldOrigin = Vec3::Zero();  // subtracted from positions before the network
  Eigen::VectorXd params;
  std::vector<EpochRecord> history;
  std::vector<double> epochSeconds;
  std::vector<std::string> warnings;
};

class RefineError : public std::runtime_error {
 public:
  RefineError(const std::string& what, int epoch, int batch, std::string term)
      : std::runtime_error(what), epoch_(epoch), batch_(batch), term_(std::move(term)) {}
  int epoch() const { return epoch_; }
  int batch() const { return batch_; }
  const std::string& term() const { return term_; }

 private:
  int epoch_;
  int batch_;
  std::string term_;
};

/// Contiguous frame blocks of at most batchFrames; the block order is
/// shuffled with `rng` (the last block may be smaller).
std::vector<std::vector<int>> frameBatches(int frames, int batchFrames, std::mt19937_64& rng);

/// Joint Adam minimization of the energy over object DoF, hand DoF and the
/// force field, starting from the scene's poses, which are also the
/// deviation reference.
RefineResult refine(const SceneTrajectory& scene, const RefineConfig& config,
                    const std::function<void(const EpochRecord&)>& onEpoch = {});

}  // namespace forcefit
