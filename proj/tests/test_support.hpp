#pragma once

#include "forcefit/scenegen.hpp"

#include <random>

namespace forcefit::testing {

// A generated grasp with small random motion added to every DoF so that all
// energy terms are active.
inline SceneTrajectory movingGrasp(int frames, std::uint64_t seed, ObjectShape shape = ObjectShape::Sphere) {
  SceneTrajectory s = generateStaticGrasp(shape, GraspStyle::Wrap, frames, seed).scene;
  std::mt19937_64 rng(seed + 77);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int t = 0; t < frames; ++t) {
    for (int k = 0; k < 3; ++k) {
      s.objectDof(t, k) += 0.01 * g(rng);
      s.objectDof(t, 3 + k) += 0.001 * g(rng);
      s.handDof(t, k) += 0.01 * g(rng);
      s.handDof(t, 3 + k) += 0.001 * g(rng);
    }
    for (int k = 6; k < 21; ++k) s.handDof(t, k) += 0.02 * g(rng);
  }
  s.certificate.reset();
  return s;
}

}  // namespace forcefit::testing
