#pragma once

#include "forcefit/geometry.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace forcefit {

struct PhysicsConstants {
  double mass = 0.1;                     // kg
  Vec3 gravity = Vec3(0.0, -9.8, 0.0);   // m/s^2
  double fMax = 5.0;                     // N
  double mu = 0.8;                       // static friction coefficient
  double frameDt = 1.0 / 30.0;           // s

  void validate() const;
};

/// Network output for one (position, time) input.
struct FieldOutput {
  double normalActivation = 0.0;           // f_{n,a}
  Vec3 frictionParam = Vec3::Zero();       // f_{s,a}
};

/// Feedforward network (position, normalized time) -> (f_{n,a}, f_{s,a}).
/// Six weight layers [4, H, H, H, H, H, 4], ELU on hidden layers, identity
/// output. Parameters flatten layer by layer as W (row-major) then b.
class ForceField {
 public:
  static constexpr int kWeightLayers = 6;
  static constexpr int kInputs = 4;
  static constexpr int kOutputs = 4;

  /// Glorot-uniform weights, zero biases.
  explicit ForceField(int hidden = 64, std::uint64_t seed = 0);

  int hidden() const { return hidden_; }
  int parameterCount() const;
  static int parameterCount(int hidden);

  Eigen::VectorXd parameters() const;
  void setParameters(const Eigen::Ref<const Eigen::VectorXd>& flat);

  const std::vector<Eigen::MatrixXd>& weights() const { return weights_; }
  const std::vector<Eigen::VectorXd>& biases() const { return biases_; }
  std::vector<Eigen::MatrixXd>& weights() { return weights_; }
  std::vector<Eigen::VectorXd>& biases() { return biases_; }

  FieldOutput evaluate(const Vec3& position, double t) const;

  /// Activations of every layer for a batch (one column per sample); kept for
  /// the backward pass. layers[0] is the input, layers.back() the output.
  struct Cache {
    std::vector<Eigen::MatrixXd> layers;
  };

  /// inputs: 4 x N. Returns 4 x N outputs.
  Eigen::MatrixXd forward(const Eigen::MatrixXd& inputs, Cache* cache = nullptr) const;

  /// Given dE/d(outputs) (4 x N), adds dE/d(parameters) into `paramGrad`
  /// (same layout as parameters()) and, if requested, writes dE/d(inputs).
  void backward(const Cache& cache, const Eigen::MatrixXd& outputGrad,
                Eigen::Ref<Eigen::VectorXd> paramGrad, Eigen::MatrixXd* inputGrad) const;

  /// Upper bound on the Lipschitz constant of the map (ELU is 1-Lipschitz):
  /// the product of the layers' spectral norms.
  double lipschitzBound() const;

 private:
  int hidden_;
  std::vector<Eigen::MatrixXd> weights_;
  std::vector<Eigen::VectorXd> biases_;
};

double elu(double x);

/// Per object vertex, per frame.
struct VertexForceState {
  double d = 0.0;
  double pc = 0.0;
  Vec3 fn = Vec3::Zero();
  Vec3 fs = Vec3::Zero();
};

/// Normal force magnitudes below this (N) are set to 0. Friction built from
/// such a magnitude would fall into the subnormal range, where the force
/// invariants no longer hold to rounding.
inline constexpr double kForceFloor = 1e-200;
double flushTinyForce(double magnitude);

/// f_n = -F_max p_c sigmoid(f_na) n, flushed as above.
Vec3 normalForce(double pc, double fna, const Vec3& n, double fMax);

/// f_s = mu ||f_n|| tanh(||f_sp||) f_sp / ||f_sp||, with f_sp the part of
/// f_sa orthogonal to f_n. Zero when ||f_sp|| < 1e-12 or f_n = 0.
Vec3 frictionForce(const Vec3& fn, const Vec3& fsa, double mu);

/// tanh(r) / r and its derivative divided by r, with series near r = 0.
double tanhRatio(double r);
double tanhRatioDerivativeOverR(double r);

/// m g + mean over vertices of (f_n + f_s). `count` is N_v.
Vec3 netForce(const std::vector<VertexForceState>& forces, const PhysicsConstants& consts,
              int count);
Vec3 netForce(const std::vector<VertexForceState>& forces, const PhysicsConstants& consts);

/// Backward differences of per-frame translations (rows). Velocity rows are
/// divided by frameDt, acceleration rows by frameDt^2; rows without a defined
/// value (t < 1, resp. t < 2) are zero. netForce = mass * acceleration.
struct FiniteDifferenceDynamics {
  Eigen::MatrixXd velocity;
  Eigen::MatrixXd acceleration;
  Eigen::MatrixXd netForce;
  int firstDefinedFrame = 2;
};

FiniteDifferenceDynamics finiteDifferenceDynamics(const Eigen::MatrixXd& translations,
                                                  const PhysicsConstants& consts);

}  // namespace forcefit
