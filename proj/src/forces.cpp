#include "forcefit/forces.hpp"

#include "forcefit/contact.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <random>
#include <stdexcept>

namespace forcefit {

void PhysicsConstants::validate() const {
  if (!(mass > 0.0)) throw std::invalid_argument("mass must be positive");
  if (!(fMax > 0.0)) throw std::invalid_argument("F_max must be positive");
  if (!(mu >= 0.0)) throw std::invalid_argument("friction coefficient must be nonnegative");
  if (!(frameDt > 0.0)) throw std::invalid_argument("frame interval must be positive");
  if (!gravity.allFinite()) throw std::invalid_argument("gravity must be finite");
}

double elu(double x) { return x >= 0.0 ? x : std::expm1(x); }

ForceField::ForceField(int hidden, std::uint64_t seed) : hidden_(hidden) {
  if (hidden < 1) throw std::invalid_argument("hidden width must be positive");
  std::mt19937_64 rng(seed);
  for (int l = 0; l < kWeightLayers; ++l) {
    const int in = l == 0 ? kInputs : hidden;
    const int out = l + 1 == kWeightLayers ? kOutputs : hidden;
    const double limit = std::sqrt(6.0 / (in + out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    Eigen::MatrixXd w(out, in);
    for (int r = 0; r < out; ++r) {
      for (int c = 0; c < in; ++c) w(r, c) = dist(rng);
    }
    weights_.push_back(std::move(w));
    biases_.push_back(Eigen::VectorXd::Zero(out));
  }
}

int ForceField::parameterCount(int hidden) {
  int n = 0;
  for (int l = 0; l < kWeightLayers; ++l) {
    const int in = l == 0 ? kInputs : hidden;
    const int out = l + 1 == kWeightLayers ? kOutputs : hidden;
    n += out * in + out;
  }
  return n;
}

int ForceField::parameterCount() const { return parameterCount(hidden_); }

Eigen::VectorXd ForceField::parameters() const {
  Eigen::VectorXd flat(parameterCount());
  int k = 0;
  for (int l = 0; l < kWeightLayers; ++l) {
    const auto& w = weights_[l];
    for (int r = 0; r < w.rows(); ++r) {
      for (int c = 0; c < w.cols(); ++c) flat[k++] = w(r, c);
    }
    flat.segment(k, biases_[l].size()) = biases_[l];
    k += static_cast<int>(biases_[l].size());
  }
  return flat;
}

void ForceField::setParameters(const Eigen::Ref<const Eigen::VectorXd>& flat) {
  if (flat.size() != parameterCount()) throw std::invalid_argument("force field parameter count mismatch");
  int k = 0;
  for (int l = 0; l < kWeightLayers; ++l) {
    auto& w = weights_[l];
    for (int r = 0; r < w.rows(); ++r) {
      for (int c = 0; c < w.cols(); ++c) w(r, c) = flat[k++];
    }
    biases_[l] = flat.segment(k, biases_[l].size());
    k += static_cast<int>(biases_[l].size());
  }
}

Eigen::MatrixXd ForceField::forward(const Eigen::MatrixXd& inputs, Cache* cache) const {
  if (inputs.rows() != kInputs) throw std::invalid_argument("force field input must have 4 rows");
  Eigen::MatrixXd a = inputs;
  if (cache) {
    cache->layers.clear();
    cache->layers.push_back(a);
  }
  for (int l = 0; l < kWeightLayers; ++l) {
    Eigen::MatrixXd z = weights_[l] * a;
    z.colwise() += biases_[l];
    if (l + 1 < kWeightLayers) z = z.unaryExpr([](double x) { return elu(x); });
    a = std::move(z);
    if (cache) cache->layers.push_back(a);
  }
  return a;
}

void ForceField::backward(const Cache& cache, const Eigen::MatrixXd& outputGrad,
                          Eigen::Ref<Eigen::VectorXd> paramGrad, Eigen::MatrixXd* inputGrad) const {
  if (paramGrad.size() != parameterCount()) throw std::invalid_argument("gradient size mismatch");
  // Offsets of each layer's block in the flat layout.
  std::vector<int> offset(kWeightLayers);
  int k = 0;
  for (int l = 0; l < kWeightLayers; ++l) {
    offset[l] = k;
    k += static_cast<int>(weights_[l].size() + biases_[l].size());
  }
  Eigen::MatrixXd delta = outputGrad;  // dE / d(pre-activation) of layer l
  for (int l = kWeightLayers - 1; l >= 0; --l) {
    const Eigen::MatrixXd& in = cache.layers[l];
    const Eigen::MatrixXd gw = delta * in.transpose();
    const int rows = static_cast<int>(gw.rows()), cols = static_cast<int>(gw.cols());
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        paramGrad.data() + offset[l], rows, cols) += gw;
    paramGrad.segment(offset[l] + rows * cols, rows) += delta.rowwise().sum();
    if (l == 0 && !inputGrad) break;
    Eigen::MatrixXd up = weights_[l].transpose() * delta;
    if (l > 0) {
      // ELU'(z) = 1 for z >= 0, else e^z = a + 1, with a the stored output.
      up.array() *= in.array().unaryExpr([](double a) { return a >= 0.0 ? 1.0 : a + 1.0; });
    } else {
      *inputGrad = std::move(up);
      break;
    }
    delta = std::move(up);
  }
}

FieldOutput ForceField::evaluate(const Vec3& position, double t) const {
  Eigen::MatrixXd in(kInputs, 1);
  in << position.x(), position.y(), position.z(), t;
  const Eigen::MatrixXd out = forward(in);
  FieldOutput o;
  o.normalActivation = out(0, 0);
  o.frictionParam = Vec3(out(1, 0), out(2, 0), out(3, 0));
  return o;
}

double ForceField::lipschitzBound() const {
  double bound = 1.0;
  for (const auto& w : weights_) {
    bound *= Eigen::JacobiSVD<Eigen::MatrixXd>(w).singularValues()(0);
  }
  return bound;
}

double flushTinyForce(double magnitude) {
  return magnitude < kForceFloor ? 0.0 : magnitude;
}

Vec3 normalForce(double pc, double fna, const Vec3& n, double fMax) {
  return -flushTinyForce(fMax * pc * sigmoid(fna)) * n;
}

double tanhRatio(double r) {
  if (r < 1e-4) return 1.0 - r * r / 3.0;
  return std::tanh(r) / r;
}

double tanhRatioDerivativeOverR(double r) {
  if (r < 1e-4) return -2.0 / 3.0 + 8.0 * r * r / 15.0;
  const double th = std::tanh(r);
  return ((1.0 - th * th) * r - th) / (r * r * r);
}

Vec3 frictionForce(const Vec3& fn, const Vec3& fsa, double mu) {
  const double mag = fn.norm();
  if (mag == 0.0) return Vec3::Zero();
  const Vec3 u = fn / mag;
  const Vec3 fsp = fsa - fsa.dot(u) * u;
  const double r = fsp.norm();
  if (r < 1e-12) return Vec3::Zero();
  return (mu * mag * tanhRatio(r)) * fsp;
}

Vec3 netForce(const std::vector<VertexForceState>& forces, const PhysicsConstants& consts, int count) {
  if (count < 1) throw std::invalid_argument("net force needs N_v >= 1");
  Vec3 sum = Vec3::Zero();
  for (const auto& f : forces) sum += f.fn + f.fs;
  return consts.mass * consts.gravity + sum / count;
}

Vec3 netForce(const std::vector<VertexForceState>& forces, const PhysicsConstants& consts) {
  return netForce(forces, consts, static_cast<int>(forces.size()));
}

FiniteDifferenceDynamics finiteDifferenceDynamics(const Eigen::MatrixXd& translations,
                                                  const PhysicsConstants& consts) {
  const int frames = static_cast<int>(translations.rows());
  if (translations.cols() != 3) throw std::invalid_argument("translations must be T x 3");
  if (frames < 3) throw std::invalid_argument("physics term inapplicable: fewer than 3 frames");
  FiniteDifferenceDynamics out;
  out.velocity = Eigen::MatrixXd::Zero(frames, 3);
  out.acceleration = Eigen::MatrixXd::Zero(frames, 3);
  const double dt = consts.frameDt;
  for (int t = 1; t < frames; ++t) {
    out.velocity.row(t) = (translations.row(t) - translations.row(t - 1)) / dt;
  }
  for (int t = 2; t < frames; ++t) {
    out.acceleration.row(t) =
        (translations.row(t) - 2.0 * translations.row(t - 1) + translations.row(t - 2)) / (dt * dt);
  }
  out.netForce = consts.mass * out.acceleration;
  return out;
}

}  // namespace forcefit
