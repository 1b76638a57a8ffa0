#include "forcefit/energy.hpp"

#include <stdexcept>

namespace forcefit {

void EnergyWeights::validate() const {
  for (double w : {physics, forceReg, penetration, deviation, smooth, dPen}) {
    if (!(w >= 0.0)) throw std::invalid_argument("energy weights and d_pen must be nonnegative");
  }
}

EnergyWeights EnergyWeights::zero() {
  EnergyWeights w;
  w.physics = w.forceReg = w.penetration = w.deviation = w.smooth = 0.0;
  return w;
}

EnergyBreakdown& EnergyBreakdown::operator+=(const EnergyBreakdown& other) {
  physics += other.physics;
  forceReg += other.forceReg;
  penetration += other.penetration;
  deviation += other.deviation;
  smooth += other.smooth;
  total += other.total;
  return *this;
}

double ePhysics(const std::vector<Vec3>& fNet, const std::vector<Vec3>& fNetFd) {
  if (fNet.size() != fNetFd.size()) throw std::invalid_argument("force sequences differ in length");
  double e = 0.0;
  for (std::size_t t = 0; t < fNet.size(); ++t) e += (fNetFd[t] - fNet[t]).squaredNorm();
  return e;
}

double eForceReg(const std::vector<VertexForceState>& forces) {
  double e = 0.0;
  for (const auto& f : forces) e += f.fn.squaredNorm() + f.fs.squaredNorm();
  return e;
}

double ePenetration(const std::vector<double>& objectDistances,
                    const std::vector<double>& handDistances, double dPen) {
  double e = 0.0;
  for (const auto* list : {&objectDistances, &handDistances}) {
    for (double d : *list) e += std::max(0.0, -(d + dPen));
  }
  return e;
}

double eDeviation(const std::vector<Vec3>& current, const std::vector<Vec3>& initial) {
  if (current.size() != initial.size()) throw std::invalid_argument("vertex counts differ");
  double e = 0.0;
  for (std::size_t i = 0; i < current.size(); ++i) e += (current[i] - initial[i]).squaredNorm();
  return e;
}

double eSmooth(const std::vector<std::vector<Vec3>>& trajectories, double frameDt) {
  const double scale = 1.0 / (frameDt * frameDt);
  double e = 0.0;
  for (const auto& x : trajectories) {
    for (std::size_t t = 2; t < x.size(); ++t) {
      e += ((x[t] - 2.0 * x[t - 1] + x[t - 2]) * scale).squaredNorm();
    }
  }
  return e;
}

void applyWeights(EnergyBreakdown& p, const EnergyWeights& w) {
  p.total = w.physics * p.physics + w.forceReg * p.forceReg + w.penetration * p.penetration +
            w.deviation * p.deviation + w.smooth * p.smooth;
}

EnergyBreakdown totalEnergy(double physics, double forceReg, double penetration, double deviation,
                            double smooth, const EnergyWeights& weights) {
  weights.validate();
  EnergyBreakdown b{physics, forceReg, penetration, deviation, smooth, 0.0};
  applyWeights(b, weights);
  return b;
}

}  // namespace forcefit
