#include "forcefit/scenegen.hpp"

#include "forcefit/shapes.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace forcefit {

ObjectShape parseObjectShape(const std::string& name) {
  if (name == "sphere") return ObjectShape::Sphere;
  if (name == "box") return ObjectShape::Box;
  if (name == "cylinder") return ObjectShape::Cylinder;
  throw std::invalid_argument("unknown object shape '" + name + "'");
}

GraspStyle parseGraspStyle(const std::string& name) {
  if (name == "pinch") return GraspStyle::Pinch;
  if (name == "wrap") return GraspStyle::Wrap;
  if (name == "wrap-side") return GraspStyle::WrapSide;
  throw std::invalid_argument("unknown grasp style '" + name + "'");
}

std::string toString(ObjectShape shape) {
  switch (shape) {
    case ObjectShape::Sphere: return "sphere";
    case ObjectShape::Box: return "box";
    case ObjectShape::Cylinder: return "cylinder";
  }
  return "?";
}

std::string toString(GraspStyle style) {
  switch (style) {
    case GraspStyle::Pinch: return "pinch";
    case GraspStyle::Wrap: return "wrap";
    case GraspStyle::WrapSide: return "wrap-side";
  }
  return "?";
}

namespace {

// Closest point of (a, r) to the triangle (0,0), (cap,0), (cap, mu cap).
std::pair<double, double> projectCone2d(double a, double r, double cap, double mu) {
  if (a <= cap && r <= mu * a && a >= 0.0) return {a, r};
  auto onSegment = [](double px, double py, double ax, double ay, double bx, double by) {
    const double dx = bx - ax, dy = by - ay;
    const double len2 = dx * dx + dy * dy;
    double t = len2 > 0.0 ? ((px - ax) * dx + (py - ay) * dy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return std::make_pair(ax + t * dx, ay + t * dy);
  };
  const std::pair<double, double> candidates[3] = {
      onSegment(a, r, 0.0, 0.0, cap, 0.0),
      onSegment(a, r, cap, 0.0, cap, mu * cap),
      onSegment(a, r, 0.0, 0.0, cap, mu * cap),
  };
  std::pair<double, double> best = candidates[0];
  double bestD = std::numeric_limits<double>::infinity();
  for (const auto& c : candidates) {
    const double d = (c.first - a) * (c.first - a) + (c.second - r) * (c.second - r);
    if (d < bestD) {
      bestD = d;
      best = c;
    }
  }
  return best;
}

struct ConeForce {
  Vec3 fn;
  Vec3 fs;
};

ConeForce projectCone(const Vec3& y, const Vec3& n, double cap, double mu) {
  const double a0 = -y.dot(n);
  const Vec3 s0 = y + a0 * n;
  const double r0 = s0.norm();
  auto [a, r] = projectCone2d(a0, r0, cap, mu);
  r = std::min(r, mu * a);
  ConeForce f;
  f.fn = -a * n;
  f.fs = r0 > 0.0 && r > 0.0 ? Vec3(r * (s0 / r0)) : Vec3::Zero();
  return f;
}

}  // namespace

EquilibriumSolution solveEquilibrium(const std::vector<Vec3>& normals, const PhysicsConstants& consts,
                                     double tolerance) {
  consts.validate();
  if (normals.empty()) throw NoCertificateError();
  const double cap = consts.fMax * (1.0 - 1e-6);
  const Vec3 weight = consts.mass * consts.gravity;
  const double n = static_cast<double>(normals.size());

  // With f_i = Proj_K_i(u), the dual optimality condition is r(u) = 0.
  auto residual = [&](const Vec3& u) {
    Vec3 sum = Vec3::Zero();
    for (const auto& nv : normals) {
      const ConeForce f = projectCone(u, nv, cap, consts.mu);
      sum += f.fn + f.fs;
    }
    return Vec3(sum / n + weight);
  };

  Vec3 u = -2.0 * weight;
  Vec3 r = residual(u);
  int it = 0;
  for (; it < 400 && r.norm() >= tolerance; ++it) {
    const double h = 1e-7 * std::max(1.0, u.norm());
    Mat3 jac;
    for (int k = 0; k < 3; ++k) {
      Vec3 up = u, um = u;
      up[k] += h;
      um[k] -= h;
      jac.col(k) = (residual(up) - residual(um)) / (2.0 * h);
    }
    bool moved = false;
    Eigen::FullPivLU<Mat3> lu(jac + 1e-12 * Mat3::Identity());
    if (lu.isInvertible()) {
      const Vec3 step = -lu.solve(r);
      for (double t = 1.0; t > 1e-6; t *= 0.5) {
        const Vec3 trial = residual(u + t * step);
        if (trial.norm() < (1.0 - 1e-4 * t) * r.norm()) {
          u += t * step;
          r = trial;
          moved = true;
          break;
        }
      }
    }
    if (!moved) {
      // Dual gradient step; the residual map is 1-Lipschitz in u.
      const Vec3 trialU = u - r;
      const Vec3 trial = residual(trialU);
      if (!(trial.norm() < r.norm())) break;
      u = trialU;
      r = trial;
    }
  }
  if (!(r.norm() < tolerance)) throw NoCertificateError();

  EquilibriumSolution sol;
  sol.iterations = it;
  Vec3 sum = Vec3::Zero();
  for (const auto& nv : normals) {
    const ConeForce f = projectCone(u, nv, cap, consts.mu);
    sol.fn.push_back(f.fn);
    sol.fs.push_back(f.fs);
    sum += f.fn + f.fs;
  }
  sol.residual = sum / n + weight;
  return sol;
}

std::vector<int> contactLabels(const std::vector<double>& distances, double contactBand, double freeBand) {
  std::vector<int> labels(distances.size());
  for (std::size_t i = 0; i < distances.size(); ++i) {
    labels[i] = distances[i] < contactBand ? 1 : distances[i] > freeBand ? 0 : -1;
  }
  return labels;
}

double certificatePhysicsEnergy(const SceneTrajectory& scene) {
  if (!scene.certificate) throw std::invalid_argument("scene has no certificate");
  PhysicsConstants c;
  c.mass = scene.mass;
  c.frameDt = scene.frameDt;
  const Vec3 net = c.mass * c.gravity + scene.certificate->meanForce();
  const int frames = scene.frameCount();
  if (frames < 3) return 0.0;
  const FiniteDifferenceDynamics fd = finiteDifferenceDynamics(scene.objectTranslations(), c);
  double e = 0.0;
  for (int t = 2; t < frames; ++t) e += (fd.netForce.row(t).transpose() - net).squaredNorm();
  return e;
}

namespace {

constexpr int kFingers = 5;

Mat3 rotX(double a) { return Eigen::AngleAxisd(a, Vec3::UnitX()).toRotationMatrix(); }
Mat3 rotY(double a) { return Eigen::AngleAxisd(a, Vec3::UnitY()).toRotationMatrix(); }
Mat3 rotZ(double a) { return Eigen::AngleAxisd(a, Vec3::UnitZ()).toRotationMatrix(); }

Vec3 matrixToAxisAngle(const Mat3& r) {
  const Eigen::AngleAxisd aa(r);
  return aa.angle() * aa.axis();
}

// Finger of each hand vertex (-1 for the palm and the rigid finger bases).
std::vector<int> fingerOwnership(const SkinnedHandModel& hand) {
  std::vector<int> owner(hand.restMesh.vertexCount(), -1);
  for (int v = 0; v < static_cast<int>(owner.size()); ++v) {
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(hand.skinWeights, v); it; ++it) {
      if (it.col() > 0 && it.value() > 0.0) owner[v] = static_cast<int>((it.col() - 1) / 3);
    }
  }
  return owner;
}

struct GraspEval {
  std::vector<double> objectD;      // object vertex to hand
  std::vector<int> objectOwner;     // finger owning the closest hand point
  std::vector<double> handD;        // hand vertex to object
  std::array<double, kFingers> fingerMin{};
  double palmMin = 0.0;
  double minAll = 0.0;
};

struct GraspContext {
  const SkinnedHandModel& hand;
  const TriMesh& objectRest;
  const MeshDistanceField& objectField;
  std::vector<int> owner;
  Mat3 objectRot;
  Vec3 objectCenter;

  GraspEval evaluate(const PoseCoeffs& coeffs) const {
    HandPose pose;
    pose.coeffs = coeffs;
    const HandForward fwd = forwardHand(pose, hand);
    TriMesh mesh;
    mesh.vertices = fwd.vertices;
    mesh.triangles = hand.restMesh.triangles;
    const MeshDistanceField handField(mesh);
    GraspEval e;
    e.fingerMin.fill(std::numeric_limits<double>::infinity());
    e.palmMin = std::numeric_limits<double>::infinity();
    e.objectD.resize(objectRest.vertexCount());
    e.objectOwner.resize(objectRest.vertexCount());
    auto note = [&](int who, double d) {
      if (who < 0) {
        e.palmMin = std::min(e.palmMin, d);
      } else {
        e.fingerMin[who] = std::min(e.fingerMin[who], d);
      }
    };
    for (std::size_t i = 0; i < objectRest.vertexCount(); ++i) {
      const Vec3 p = objectRot * objectRest.vertices[i] + objectCenter;
      const SignedDistanceResult r = handField.query(p);
      int k = 0;
      r.weights.maxCoeff(&k);
      e.objectD[i] = r.distance;
      e.objectOwner[i] = owner[r.support[k]];
      note(e.objectOwner[i], r.distance);
    }
    e.handD.resize(fwd.vertices.size());
    const Mat3 rt = objectRot.transpose();
    for (std::size_t v = 0; v < fwd.vertices.size(); ++v) {
      e.handD[v] = objectField.query(rt * (fwd.vertices[v] - objectCenter)).distance;
      note(owner[v], e.handD[v]);
    }
    e.minAll = std::min(e.palmMin, *std::min_element(e.fingerMin.begin(), e.fingerMin.end()));
    return e;
  }
};

struct Region {
  Vec3 lo;
  Vec3 hi;
};

struct StyleSetup {
  std::vector<int> fingers;
  double distalRatio;
  Mat3 objectRot;
  Region center;
  bool palmMayTouch;
};

StyleSetup setupFor(ObjectShape shape, GraspStyle style, const TriMesh& object, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double pi = std::numbers::pi;
  const double jitter = 0.2 * (unit(rng) - 0.5);
  StyleSetup s;
  const bool pinch = style == GraspStyle::Pinch;
  switch (shape) {
    case ObjectShape::Sphere:
      s.objectRot = rotY(2 * pi * unit(rng));
      break;
    case ObjectShape::Box:
      if (pinch) {
        // any orientation; a normalized gaussian quaternion is uniform on SO(3)
        std::normal_distribution<double> g(0.0, 1.0);
        const double w = g(rng), a = g(rng), b = g(rng), c = g(rng);
        s.objectRot = Eigen::Quaterniond(w, a, b, c).normalized().toRotationMatrix();
      } else {
        // long side across the hand, an edge pointing at the fingers
        s.objectRot = rotZ(pi / 4 + jitter) * rotX(pi / 2);
      }
      break;
    case ObjectShape::Cylinder:
      // Lying; turned diagonally for a pinch so the thumb and index meet its sides.
      s.objectRot = pinch ? Mat3(rotY(pi / 4 + jitter) * rotX(pi / 2)) : Mat3(rotZ(jitter) * rotX(pi / 2));
      break;
  }
  double halfY = 0.0;
  for (const auto& v : object.vertices) halfY = std::max(halfY, (s.objectRot * v).y());
  if (pinch) {
    s.fingers = {0, 1};
    s.distalRatio = 0.6;
    s.center = {Vec3(0.08, -0.011 - 0.035 - halfY, -0.10), Vec3(0.16, -0.011 - 0.006 - halfY, -0.03)};
    s.palmMayTouch = false;
  } else {
    s.fingers = {0, 1, 2, 3, 4};
    s.distalRatio = 0.8;
    s.center = {Vec3(0.06, -0.011 - 0.004 - halfY, -0.012), Vec3(0.09, -0.011 - 0.0015 - halfY, 0.012)};
    s.palmMayTouch = true;
  }
  return s;
}

enum class Failure { None, Reach, Clearance, Penetration, Contacts, Certificate };

}  // namespace

SyntheticScene generateStaticGrasp(ObjectShape shape, GraspStyle style, int frames, std::uint64_t seed,
                                   const GraspOptions& options) {
  if (frames < 3) throw std::invalid_argument("static grasp needs at least 3 frames");
  options.consts.validate();
  const auto hand = builtinHand();
  const std::string objectRef = "builtin:" + toString(shape);
  const TriMesh object = builtinObject(objectRef);
  const MeshDistanceField objectField(object);
  const std::vector<int> owner = fingerOwnership(*hand);

  bool reachedCertificate = false;
  int certificateFailures = 0;
  for (int attempt = 0; attempt < options.maxAttempts; ++attempt) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(attempt), 0x5ce9u};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const StyleSetup setup = setupFor(shape, style, object, rng);
    Vec3 center;
    for (int k = 0; k < 3; ++k) center[k] = setup.center.lo[k] + (setup.center.hi[k] - setup.center.lo[k]) * unit(rng);
    const double yaw = 2 * std::numbers::pi * unit(rng);
    Vec3 offset;
    for (int k = 0; k < 3; ++k) offset[k] = 0.2 * (unit(rng) - 0.5);

    GraspContext ctx{*hand, object, objectField, owner, setup.objectRot, center};
    Failure failure = Failure::None;

    const GraspEval open = ctx.evaluate(PoseCoeffs::Zero());
    if (open.minAll <= 0.0) continue;

    // Curl each participating finger until it presses contactDepth into the object.
    PoseCoeffs coeffs = PoseCoeffs::Zero();
    for (int f : setup.fingers) {
      auto depthAt = [&](double c) {
        PoseCoeffs trial = PoseCoeffs::Zero();
        trial[3 * f] = c;
        trial[3 * f + 1] = setup.distalRatio * c;
        return ctx.evaluate(trial).fingerMin[f] + options.contactDepth;
      };
      double lo = 0.0, hi = -1.0;
      for (double c = 0.05; c <= 2.2 + 1e-9; c += 0.05) {
        if (depthAt(c) <= 0.0) {
          hi = c;
          break;
        }
        lo = c;
      }
      if (hi < 0.0) {
        failure = Failure::Reach;
        break;
      }
      for (int it = 0; it < 40; ++it) {
        const double mid = 0.5 * (lo + hi);
        (depthAt(mid) > 0.0 ? lo : hi) = mid;
      }
      if (f != 0 && hi < options.minCurl) {
        failure = Failure::Reach;
        break;
      }
      coeffs[3 * f] = hi;
      coeffs[3 * f + 1] = setup.distalRatio * hi;
    }
    if (failure != Failure::None) continue;

    const GraspEval g = ctx.evaluate(coeffs);
    const double dPen = 0.002;
    if (*std::min_element(g.objectD.begin(), g.objectD.end()) < -0.75 * dPen ||
        *std::min_element(g.handD.begin(), g.handD.end()) < -0.75 * dPen) {
      continue;
    }
    bool clear = setup.palmMayTouch ? g.palmMin > 0.0 : g.palmMin > options.freeBand;
    for (int f = 0; f < kFingers; ++f) {
      const bool participates = std::find(setup.fingers.begin(), setup.fingers.end(), f) != setup.fingers.end();
      if (!participates && g.fingerMin[f] <= options.freeBand) clear = false;
    }
    if (!clear) continue;

    // Contact patches: per finger, the object vertices in the contact band.
    std::vector<Vec3> patchNormal(kFingers, Vec3::Zero());
    std::vector<int> patchFingers;
    for (std::size_t i = 0; i < g.objectD.size(); ++i) {
      if (g.objectD[i] < options.contactBand && g.objectOwner[i] >= 0) {
        patchNormal[g.objectOwner[i]] += setup.objectRot * object.vertexNormals[i];
      }
    }
    for (int f : setup.fingers) {
      if (std::abs(g.fingerMin[f]) < 5e-4 && patchNormal[f].norm() > 0.0) patchFingers.push_back(f);
    }
    bool opposing = false;
    for (std::size_t a = 0; a < patchFingers.size(); ++a) {
      for (std::size_t b = a + 1; b < patchFingers.size(); ++b) {
        if (patchNormal[patchFingers[a]].dot(patchNormal[patchFingers[b]]) < 0.0) opposing = true;
      }
    }
    if (patchFingers.size() < 2 || !opposing) continue;

    // World placement: the hand frame is rotated and shifted as a whole.
    const Mat3 styleRot = style == GraspStyle::WrapSide ? rotX(-std::numbers::pi / 2) : Mat3::Identity();
    const Mat3 handRot = rotY(yaw) * styleRot;
    const Mat3 objectRot = handRot * setup.objectRot;
    const Vec3 objectTrans = handRot * center + offset;

    std::vector<int> contactVertices;
    std::vector<Vec3> contactNormals;
    for (std::size_t i = 0; i < g.objectD.size(); ++i) {
      if (g.objectD[i] < options.contactBand) {
        contactVertices.push_back(static_cast<int>(i));
        contactNormals.push_back(objectRot * object.vertexNormals[i]);
      }
    }
    reachedCertificate = true;
    EquilibriumSolution sol;
    try {
      sol = solveEquilibrium(contactNormals, options.consts);
    } catch (const NoCertificateError&) {
      if (++certificateFailures >= options.maxCertificateFailures) throw;
      continue;
    }

    SyntheticScene out;
    out.attempts = attempt + 1;
    out.contactFingers = patchFingers;
    SceneTrajectory& s = out.scene;
    s.objectMesh = object;
    s.objectMeshRef = objectRef;
    s.hand = hand;
    s.modelRef = "builtin:hand";
    s.mass = options.consts.mass;
    s.frameDt = options.consts.frameDt;
    s.objectDof.resize(frames, kObjectDof);
    s.handDof.resize(frames, kHandDof);
    Eigen::Matrix<double, 1, kObjectDof> objectRow;
    objectRow << matrixToAxisAngle(objectRot).transpose(), objectTrans.transpose();
    Eigen::Matrix<double, 1, kHandDof> handRow;
    handRow << matrixToAxisAngle(handRot).transpose(), offset.transpose(), coeffs.transpose();
    for (int t = 0; t < frames; ++t) {
      s.objectDof.row(t) = objectRow;
      s.handDof.row(t) = handRow;
    }
    s.truthContact = contactLabels(g.objectD, options.contactBand, options.freeBand);
    EquilibriumCertificate cert;
    for (std::size_t k = 0; k < contactVertices.size(); ++k) {
      cert.forces.push_back({contactVertices[k], sol.fn[k], sol.fs[k]});
    }
    s.certificate = std::move(cert);
    s.validate();
    return out;
  }
  if (reachedCertificate) throw NoCertificateError();
  throw std::runtime_error("could not place a " + toString(style) + " grasp on the " + toString(shape) +
                           " within " + std::to_string(options.maxAttempts) + " attempts");
}

}  // namespace forcefit
