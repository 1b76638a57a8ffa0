#include "forcefit/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace forcefit {

Eigen::MatrixXd injectFingerNoise(const Eigen::MatrixXd& handDof, std::uint64_t seed, bool shared,
                                  double stddev) {
  if (handDof.cols() != kHandDof) throw std::invalid_argument("hand DoF must have 21 columns");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(1.0, stddev);
  Eigen::MatrixXd out = handDof;
  Eigen::Matrix<double, 1, kPoseCoeffs> factors;
  for (int t = 0; t < out.rows(); ++t) {
    if (t == 0 || !shared) {
      for (int k = 0; k < kPoseCoeffs; ++k) factors[k] = noise(rng);
    }
    out.row(t).tail<kPoseCoeffs>() = out.row(t).tail<kPoseCoeffs>().cwiseProduct(factors);
  }
  return out;
}

std::vector<std::vector<Vec3>> jointTrajectory(const SceneTrajectory& scene) {
  std::vector<std::vector<Vec3>> joints;
  for (int t = 0; t < scene.frameCount(); ++t) {
    joints.push_back(forwardHand(scene.handPose(t), *scene.hand).joints);
  }
  return joints;
}

double mpjpe(const std::vector<std::vector<Vec3>>& predicted, const std::vector<std::vector<Vec3>>& truth) {
  if (predicted.size() != truth.size() || predicted.empty()) throw std::invalid_argument("joint shape mismatch");
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t t = 0; t < predicted.size(); ++t) {
    if (predicted[t].size() != truth[t].size()) throw std::invalid_argument("joint shape mismatch");
    for (std::size_t j = 0; j < predicted[t].size(); ++j) {
      sum += (predicted[t][j] - truth[t][j]).norm();
      ++count;
    }
  }
  if (count == 0) throw std::invalid_argument("joint shape mismatch");
  return 1000.0 * sum / count;
}

std::vector<std::vector<double>> objectDistances(const SceneTrajectory& scene) {
  std::vector<std::vector<double>> out;
  for (int t = 0; t < scene.frameCount(); ++t) {
    const PosedHand hand = poseHand(scene.handPose(t), *scene.hand);
    const MeshDistanceField field(hand.mesh);
    const TriMesh object = poseObject(scene.objectPose(t), scene.objectMesh);
    std::vector<double> d(object.vertexCount());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = field.query(object.vertices[i]).distance;
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<double> contactMapFromPose(const SceneTrajectory& scene, const ContactParams& params) {
  params.validate();
  const auto distances = objectDistances(scene);
  std::vector<double> map(scene.objectMesh.vertexCount(), 0.0);
  for (const auto& frame : distances) {
    for (std::size_t i = 0; i < map.size(); ++i) map[i] += contactProbability(frame[i], params);
  }
  for (double& p : map) p /= static_cast<double>(distances.size());
  return map;
}

namespace {

void checkLabels(const std::vector<double>& predicted, const std::vector<int>& truth, long& pos, long& neg) {
  if (predicted.size() != truth.size()) throw std::invalid_argument("prediction and truth lengths differ");
  pos = neg = 0;
  for (int y : truth) {
    if (y == 1) {
      ++pos;
    } else if (y == 0) {
      ++neg;
    } else {
      throw std::invalid_argument("truth labels must be 0 or 1");
    }
  }
  if (pos == 0 || neg == 0) throw std::invalid_argument("undefined AUC");
}

}  // namespace

double rocAuc(const std::vector<double>& predicted, const std::vector<int>& truth) {
  long pos = 0, neg = 0;
  checkLabels(predicted, truth, pos, neg);
  const std::size_t n = predicted.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return predicted[a] < predicted[b]; });
  double positiveRankSum = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && predicted[order[j]] == predicted[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + 1 + j);  // mean of ranks i+1..j
    for (std::size_t k = i; k < j; ++k) {
      if (truth[order[k]] == 1) positiveRankSum += rank;
    }
    i = j;
  }
  const double p = static_cast<double>(pos);
  return (positiveRankSum - p * (p + 1.0) / 2.0) / (p * static_cast<double>(neg));
}

double prAuc(const std::vector<double>& predicted, const std::vector<int>& truth) {
  long pos = 0, neg = 0;
  checkLabels(predicted, truth, pos, neg);
  const std::size_t n = predicted.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return predicted[a] > predicted[b]; });
  double ap = 0.0;
  long tp = 0, seen = 0;
  double lastRecall = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && predicted[order[j]] == predicted[order[i]]) ++j;
    for (std::size_t k = i; k < j; ++k) tp += truth[order[k]] == 1;
    seen += static_cast<long>(j - i);
    const double recall = static_cast<double>(tp) / pos;
    const double precision = static_cast<double>(tp) / seen;
    ap += (recall - lastRecall) * precision;
    lastRecall = recall;
    i = j;
  }
  return ap;
}

MetricsReport evaluateScene(const SceneTrajectory& predicted, const SceneTrajectory& truth,
                            const ContactParams& contact) {
  MetricsReport r;
  r.mpjpe = mpjpe(jointTrajectory(predicted), jointTrajectory(truth));
  if (truth.truthContact.size() != predicted.objectMesh.vertexCount()) {
    throw std::invalid_argument("truth scene has no contact labels for this object");
  }
  const std::vector<double> map = contactMapFromPose(predicted, contact);
  std::vector<double> scores;
  std::vector<int> labels;
  for (std::size_t i = 0; i < map.size(); ++i) {
    if (truth.truthContact[i] < 0) continue;
    scores.push_back(map[i]);
    labels.push_back(truth.truthContact[i]);
  }
  r.prAuc = prAuc(scores, labels);
  r.rocAuc = rocAuc(scores, labels);
  return r;
}

int countPenetrating(const SceneTrajectory& scene, double depth) {
  int count = 0;
  for (const auto& frame : objectDistances(scene)) {
    for (double d : frame) count += d < -depth;
  }
  return count;
}

}  // namespace forcefit
