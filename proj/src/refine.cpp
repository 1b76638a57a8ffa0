#include "forcefit/refine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace forcefit {

void RefineConfig::validate() const {
  if (epochs < 1) throw std::invalid_argument("epochs must be at least 1");
  if (batchFrames < 1) throw std::invalid_argument("batch frames must be at least 1");
  if (sampleVertices < 1) throw std::invalid_argument("sample vertices must be at least 1");
  if (!(lrPose >= 0.0) || !(lrField >= 0.0)) throw std::invalid_argument("learning rates must be nonnegative");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw std::invalid_argument("Adam betas must lie in [0, 1)");
  }
  if (!(epsilonAdam > 0.0)) throw std::invalid_argument("Adam epsilon must be positive");
  if (hidden < 1) throw std::invalid_argument("hidden width must be positive");
  weights.validate();
  anneal().validate();
  ContactParams{zEnd, p0}.validate();
}

EnergyOptions RefineConfig::energyOptions() const {
  EnergyOptions o;
  o.weights = weights;
  o.contact = {zStart, p0};
  o.consts.fMax = fMax;
  o.consts.mu = mu;
  o.hidden = hidden;
  o.includeHand = includeHand;
  o.distanceMode = distanceMode;
  o.threads = threads;
  return o;
}

void adamStep(Eigen::VectorXd& params, const Eigen::VectorXd& grad, AdamState& state,
              const Eigen::VectorXd& lr, double beta1, double beta2, double epsilon) {
  if (grad.size() != params.size() || lr.size() != params.size()) {
    throw std::invalid_argument("Adam: size mismatch");
  }
  if (state.m.size() != params.size()) {
    state.m = Eigen::VectorXd::Zero(params.size());
    state.v = Eigen::VectorXd::Zero(params.size());
  }
  ++state.step;
  state.m = beta1 * state.m + (1.0 - beta1) * grad;
  state.v = beta2 * state.v + (1.0 - beta2) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
  for (int k = 0; k < params.size(); ++k) {
    const double mHat = state.m[k] / c1;
    const double vHat = state.v[k] / c2;
    params[k] -= lr[k] * mHat / (std::sqrt(vHat) + epsilon);
  }
}

void adamStep(Eigen::VectorXd& params, const Eigen::VectorXd& grad, AdamState& state, double lr,
              double beta1, double beta2, double epsilon) {
  adamStep(params, grad, state, Eigen::VectorXd::Constant(params.size(), lr), beta1, beta2, epsilon);
}

std::vector<std::vector<int>> frameBatches(int frames, int batchFrames, std::mt19937_64& rng) {
  std::vector<std::vector<int>> blocks;
  for (int start = 0; start < frames; start += batchFrames) {
    std::vector<int> b;
    for (int t = start; t < std::min(frames, start + batchFrames); ++t) b.push_back(t);
    blocks.push_back(std::move(b));
  }
  // Fisher-Yates with explicit draws so the order does not depend on the
  // standard library's shuffle.
  for (int i = static_cast<int>(blocks.size()) - 1; i > 0; --i) {
    std::uniform_int_distribution<int> pick(0, i);
    std::swap(blocks[i], blocks[pick(rng)]);
  }
  return blocks;
}

namespace {

std::mt19937_64 streamRng(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b),
                    static_cast<std::uint32_t>(tag)};
  return std::mt19937_64(seq);
}

}  // namespace

RefineResult refine(const SceneTrajectory& scene, const RefineConfig& config,
                    const std::function<void(const EpochRecord&)>& onEpoch) {
  config.validate();
  scene.validate();
  RefineResult result;
  const int T = scene.frameCount();
  if (T < 3) {
    result.warnings.push_back("fewer than 3 frames: physics and smoothness terms are disabled");
  }
  EnergyModel model(scene, config.energyOptions());
  const ParamLayout& layout = model.layout();
  Eigen::VectorXd params = model.initialParameters(config.seed);

  if (config.shareFingerPose) {
    PoseCoeffs mean = PoseCoeffs::Zero();
    for (int t = 0; t < T; ++t) mean += params.segment<kPoseCoeffs>(layout.coeffOffset(t));
    mean /= T;
    for (int t = 0; t < T; ++t) params.segment<kPoseCoeffs>(layout.coeffOffset(t)) = mean;
  }

  Eigen::VectorXd lr(layout.size());
  lr.head(layout.fieldOffset()).setConstant(config.lrPose);
  lr.tail(layout.fieldSize).setConstant(config.lrField);

  const int objectCount = static_cast<int>(scene.objectMesh.vertexCount());
  const int handCount = static_cast<int>(scene.hand->restMesh.vertexCount());
  AdamState adam;
  auto orderRng = streamRng(config.seed, 0, 0, 1);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    EpochRecord record;
    record.epoch = epoch;
    record.z = annealedZ(epoch, config.anneal());
    model.setContactWidth(record.z);
    const auto batches = frameBatches(T, config.batchFrames, orderRng);
    for (std::size_t b = 0; b < batches.size(); ++b) {
      BatchSpec spec;
      spec.frames = batches[b];
      auto sampleRng = streamRng(config.seed, epoch, b, 2);
      spec.objectVertices = sampleIndices(config.sampleVertices, objectCount, sampleRng);
      spec.handVertices = sampleIndices(config.sampleVertices, handCount, sampleRng);
      GradientReport report;
      try {
        report = model.evaluateWithGradient(params, spec);
      } catch (const NonFiniteEnergyError& e) {
        throw RefineError("epoch " + std::to_string(epoch) + ", batch " + std::to_string(b) + ": " + e.what(),
                          epoch, static_cast<int>(b), e.term());
      }
      if (!report.gradient.allFinite()) {
        throw RefineError("epoch " + std::to_string(epoch) + ", batch " + std::to_string(b) +
                              ": non-finite gradient",
                          epoch, static_cast<int>(b), "gradient");
      }
      if (config.shareFingerPose) {
        PoseCoeffs sum = PoseCoeffs::Zero();
        for (int t = 0; t < T; ++t) sum += report.gradient.segment<kPoseCoeffs>(layout.coeffOffset(t));
        for (int t = 0; t < T; ++t) report.gradient.segment<kPoseCoeffs>(layout.coeffOffset(t)) = sum;
      }
      adamStep(params, report.gradient, adam, lr, config.beta1, config.beta2, config.epsilonAdam);
      record.energy += report.energy;
      ++record.batches;
    }
    result.history.push_back(record);
    result.epochSeconds.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    if (onEpoch) onEpoch(record);
  }

  const ParamVector p = ParamVector::unflatten(params, layout);
  result.scene = scene;
  result.scene.objectDof = p.objectDof;
  result.scene.handDof = p.handDof;
  result.scene.certificate.reset();
  result.field = ForceField(config.hidden);
  result.field.setParameters(p.field);
  result.fieldOrigin = model.fieldOrigin();
  result.params = std::move(params);
  return result;
}

}  // namespace forcefit
