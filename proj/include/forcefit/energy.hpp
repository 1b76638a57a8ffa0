#pragma once

#include "forcefit/forces.hpp"

#include <string>
#include <vector>

namespace forcefit {

struct EnergyWeights {
  double physics = 5e2;
  double forceReg = 0.3;
  double penetration = 5e7;
  double deviation = 2e6;
  double smooth = 1e5;
  double dPen = 0.002;  // meters of tolerated penetration

  void validate() const;
  static EnergyWeights zero();
};

/// Unweighted terms and the weighted total.
struct EnergyBreakdown {
  double physics = 0.0;
  double forceReg = 0.0;
  double penetration = 0.0;
  double deviation = 0.0;
  double smooth = 0.0;
  double total = 0.0;

  EnergyBreakdown& operator+=(const EnergyBreakdown& other);
};

/// sum_t ||f_fd - f_net||^2 over matching frame lists.
double ePhysics(const std::vector<Vec3>& fNet, const std::vector<Vec3>& fNetFd);

/// sum ||f_n||^2 + ||f_s||^2.
double eForceReg(const std::vector<VertexForceState>& forces);

/// sum max(0, -(d + dPen)) over both distance lists.
double ePenetration(const std::vector<double>& objectDistances,
                    const std::vector<double>& handDistances, double dPen);

/// sum ||v - v0||^2; throws on a count mismatch.
double eDeviation(const std::vector<Vec3>& current, const std::vector<Vec3>& initial);

/// sum over t >= 2 of ||x^t - 2 x^(t-1) + x^(t-2)||^2 / frameDt^4 for each
/// trajectory. Contributes 0 when there are fewer than 3 frames.
double eSmooth(const std::vector<std::vector<Vec3>>& trajectories, double frameDt);

EnergyBreakdown totalEnergy(double physics, double forceReg, double penetration, double deviation,
                            double smooth, const EnergyWeights& weights);

/// Recomputes `total` from the parts.
void applyWeights(EnergyBreakdown& parts, const EnergyWeights& weights);

}  // namespace forcefit
