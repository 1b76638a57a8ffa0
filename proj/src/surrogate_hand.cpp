#include "forcefit/kinematics.hpp"
#include "forcefit/shapes.hpp"

#include <cmath>
#include <mutex>
#include <numbers>

namespace forcefit {

namespace {

struct FingerSpec {
  Vec3 base;       // MCP joint
  Vec3 direction;  // along the finger at rest
  Vec3 flexAxis;   // positive rotation curls toward the palm side
  Vec3 spreadAxis;
  std::array<double, 3> lengths;  // MCP-PIP, PIP-DIP, DIP-tip
  double radius;
  double tipRadius;
};

constexpr double kPalmLength = 0.085;
constexpr double kPalmHalfThickness = 0.011;
constexpr double kPalmHalfWidth = 0.04;
constexpr double kBackInset = 0.012;  // finger tubes start inside the palm
constexpr double kBlendHalfWidth = 0.005;
constexpr int kRingSides = 8;
constexpr double kRingSpacing = 0.006;

std::array<FingerSpec, 5> fingerSpecs() {
  const Vec3 x = Vec3::UnitX();
  const Vec3 flex = -Vec3::UnitZ();
  const Vec3 spread = Vec3::UnitY();
  std::array<FingerSpec, 5> f;

  // Thumb: rooted near the wrist, pointing forward and outward; its flexion
  // sweeps the tip under the palm toward the index finger.
  const Vec3 thumbBase(0.022, -0.008, -0.036);
  const Vec3 thumbDir = Vec3(0.55, -0.3, -0.78).normalized();
  const Vec3 target(0.095, -0.05, -0.005);
  const Vec3 thumbFlex = thumbDir.cross((target - thumbBase).normalized()).normalized();
  f[0] = {thumbBase, thumbDir, thumbFlex, thumbDir.cross(thumbFlex).normalized(),
          {0.036, 0.032, 0.027}, 0.0095, 0.0085};

  const double zs[4] = {-0.027, -0.009, 0.009, 0.027};
  const std::array<double, 3> lens[4] = {
      {0.042, 0.025, 0.022}, {0.046, 0.028, 0.024}, {0.043, 0.027, 0.023}, {0.034, 0.021, 0.020}};
  const double radii[4] = {0.0085, 0.0088, 0.0084, 0.0078};
  for (int i = 0; i < 4; ++i) {
    f[i + 1] = {Vec3(kPalmLength, 0.0, zs[i]), x, flex, spread, lens[i], radii[i],
                radii[i] - 0.001};
  }
  return f;
}

// Orthonormal frame around `d` with e2 = d x e1.
std::pair<Vec3, Vec3> ringFrame(const Vec3& d) {
  Vec3 helper = std::abs(d.y()) < 0.9 ? Vec3::UnitY() : Vec3::UnitX();
  Vec3 e1 = (helper - helper.dot(d) * d).normalized();
  Vec3 e2 = d.cross(e1);
  return {e1, e2};
}

}  // namespace

SkinnedHandModel makeSurrogateHand() {
  SkinnedHandModel model;
  TriMesh& mesh = model.restMesh;
  std::vector<std::vector<std::pair<int, double>>> weights;

  // Palm block; the wrist sits at the center of its proximal face.
  TriMesh palm = makeBox(Vec3(kPalmLength / 2, 0, 0),
                         Vec3(kPalmLength / 2, kPalmHalfThickness, kPalmHalfWidth), {6, 2, 6});
  mesh.vertices = palm.vertices;
  mesh.triangles = palm.triangles;
  weights.assign(mesh.vertices.size(), {{0, 1.0}});
  std::vector<int> wristVertices;
  for (int v = 0; v < static_cast<int>(palm.vertices.size()); ++v) {
    const Vec3& p = palm.vertices[v];
    if (std::abs(p.x()) < 1e-12 && std::abs(std::abs(p.y()) - kPalmHalfThickness) < 1e-12 &&
        std::abs(std::abs(p.z()) - kPalmHalfWidth) < 1e-12) {
      wristVertices.push_back(v);
    }
  }

  model.jointRest.push_back(Vec3::Zero());
  model.parents.push_back(-1);
  model.poseBasis = Eigen::MatrixXd::Zero(3 * 16, kPoseCoeffs);

  std::vector<std::vector<std::pair<int, double>>> regressor(kReportedJoints);
  for (int v : wristVertices) regressor[0].push_back({v, 1.0 / wristVertices.size()});

  const auto specs = fingerSpecs();
  for (int fi = 0; fi < 5; ++fi) {
    const FingerSpec& f = specs[fi];
    const int firstJoint = static_cast<int>(model.jointRest.size());
    const double s1 = 0.0;
    const double s2 = f.lengths[0];
    const double s3 = f.lengths[0] + f.lengths[1];
    const double total = s3 + f.lengths[2];
    const double capStart = total - f.tipRadius;
    for (int k = 0; k < 3; ++k) {
      const double s = (k == 0 ? s1 : k == 1 ? s2 : s3);
      model.jointRest.push_back(f.base + s * f.direction);
      model.parents.push_back(k == 0 ? 0 : firstJoint + k - 1);
    }

    // Ring stations: uniform within each interval, with stations exactly at
    // the three joints so their rings can regress the joint centers.
    std::vector<double> stations;
    const double breaks[5] = {-kBackInset, s1, s2, s3, capStart};
    for (int b = 0; b < 4; ++b) {
      const double len = breaks[b + 1] - breaks[b];
      const int n = std::max(1, static_cast<int>(std::ceil(len / kRingSpacing)));
      for (int i = 0; i < n; ++i) stations.push_back(breaks[b] + len * i / n);
    }
    stations.push_back(capStart);

    const auto [e1, e2] = ringFrame(f.direction);
    auto radiusAt = [&](double s) {
      const double t = std::clamp((s + kBackInset) / (capStart + kBackInset), 0.0, 1.0);
      return f.radius + (f.tipRadius - f.radius) * t;
    };
    auto blend = [](double s, double at) {
      return std::clamp((s - at + kBlendHalfWidth) / (2 * kBlendHalfWidth), 0.0, 1.0);
    };
    auto skin = [&](double s) {
      const double h1 = blend(s, s1), h2 = blend(s, s2), h3 = blend(s, s3);
      std::vector<std::pair<int, double>> w;
      const double parts[4] = {1 - h1, h1 - h2, h2 - h3, h3};
      const int joints[4] = {0, firstJoint, firstJoint + 1, firstJoint + 2};
      for (int k = 0; k < 4; ++k) {
        if (parts[k] > 0.0) w.push_back({joints[k], parts[k]});
      }
      return w;
    };

    auto addVertex = [&](const Vec3& p, double s) {
      mesh.vertices.push_back(p);
      weights.push_back(skin(s));
      return static_cast<int>(mesh.vertices.size()) - 1;
    };

    // Base cap center, then rings (tube stations followed by the tip cap).
    const int baseCenter = addVertex(f.base - kBackInset * f.direction, -kBackInset);
    std::vector<int> ringStart;
    for (double s : stations) {
      ringStart.push_back(static_cast<int>(mesh.vertices.size()));
      const double r = radiusAt(s);
      for (int k = 0; k < kRingSides; ++k) {
        const double phi = 2 * std::numbers::pi * k / kRingSides;
        addVertex(f.base + s * f.direction + r * (std::cos(phi) * e1 + std::sin(phi) * e2), s);
      }
      if (std::abs(s - s1) < 1e-12 || std::abs(s - s2) < 1e-12 || std::abs(s - s3) < 1e-12) {
        const int joint = firstJoint + (std::abs(s - s1) < 1e-12 ? 0 : std::abs(s - s2) < 1e-12 ? 1 : 2);
        for (int k = 0; k < kRingSides; ++k) {
          regressor[joint].push_back({ringStart.back() + k, 1.0 / kRingSides});
        }
      }
    }
    const Vec3 capCenter = f.base + capStart * f.direction;
    for (double alpha : {std::numbers::pi / 6, std::numbers::pi / 3}) {
      ringStart.push_back(static_cast<int>(mesh.vertices.size()));
      for (int k = 0; k < kRingSides; ++k) {
        const double phi = 2 * std::numbers::pi * k / kRingSides;
        const Vec3 p = capCenter + f.tipRadius * (std::cos(alpha) * (std::cos(phi) * e1 + std::sin(phi) * e2) +
                                                  std::sin(alpha) * f.direction);
        addVertex(p, capStart + f.tipRadius * std::sin(alpha));
      }
    }
    const int apex = addVertex(f.base + total * f.direction, total);
    regressor[16 + fi].push_back({apex, 1.0});

    for (int k = 0; k < kRingSides; ++k) {
      const int kn = (k + 1) % kRingSides;
      mesh.triangles.push_back({baseCenter, ringStart[0] + kn, ringStart[0] + k});
    }
    for (std::size_t r = 0; r + 1 < ringStart.size(); ++r) {
      for (int k = 0; k < kRingSides; ++k) {
        const int kn = (k + 1) % kRingSides;
        const int a = ringStart[r] + k, b = ringStart[r] + kn;
        const int c = ringStart[r + 1] + k, d = ringStart[r + 1] + kn;
        mesh.triangles.push_back({a, b, c});
        mesh.triangles.push_back({b, d, c});
      }
    }
    for (int k = 0; k < kRingSides; ++k) {
      const int kn = (k + 1) % kRingSides;
      mesh.triangles.push_back({ringStart.back() + k, ringStart.back() + kn, apex});
    }

    // Pose modes: proximal flexion, distal flexion, abduction.
    model.poseBasis.block<3, 1>(3 * firstJoint, 3 * fi) = f.flexAxis;
    model.poseBasis.block<3, 1>(3 * (firstJoint + 1), 3 * fi + 1) = 0.8 * f.flexAxis;
    model.poseBasis.block<3, 1>(3 * (firstJoint + 2), 3 * fi + 1) = 0.6 * f.flexAxis;
    model.poseBasis.block<3, 1>(3 * firstJoint, 3 * fi + 2) = f.spreadAxis;
  }

  const int nv = static_cast<int>(mesh.vertices.size());
  std::vector<Eigen::Triplet<double>> trips;
  for (int v = 0; v < nv; ++v) {
    for (const auto& [j, w] : weights[v]) trips.emplace_back(v, j, w);
  }
  model.skinWeights.resize(nv, 16);
  model.skinWeights.setFromTriplets(trips.begin(), trips.end());
  trips.clear();
  for (int k = 0; k < kReportedJoints; ++k) {
    for (const auto& [v, w] : regressor[k]) trips.emplace_back(k, v, w);
  }
  model.jointRegressor.resize(kReportedJoints, nv);
  model.jointRegressor.setFromTriplets(trips.begin(), trips.end());
  mesh.updateNormals();
  model.validate();
  return model;
}

std::shared_ptr<const SkinnedHandModel> builtinHand() {
  static std::once_flag once;
  static std::shared_ptr<const SkinnedHandModel> hand;
  std::call_once(once, [] { hand = std::make_shared<const SkinnedHandModel>(makeSurrogateHand()); });
  return hand;
}

}  // namespace forcefit
