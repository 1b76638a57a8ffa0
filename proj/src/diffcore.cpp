#include "forcefit/diffcore.hpp"

#include "forcefit/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace forcefit {

ParamLayout ParamVector::layout() const {
  ParamLayout l;
  l.frames = static_cast<int>(objectDof.rows());
  l.fieldSize = static_cast<int>(field.size());
  return l;
}

Eigen::VectorXd ParamVector::flatten() const {
  const ParamLayout l = layout();
  if (handDof.rows() != l.frames) throw std::invalid_argument("object and hand frame counts differ");
  Eigen::VectorXd flat(l.size());
  for (int t = 0; t < l.frames; ++t) {
    flat.segment<kObjectDof>(l.objectOffset(t)) = objectDof.row(t).transpose();
    flat.segment<kHandDof>(l.handOffset(t)) = handDof.row(t).transpose();
  }
  flat.tail(l.fieldSize) = field;
  return flat;
}

ParamVector ParamVector::unflatten(const Eigen::VectorXd& flat, const ParamLayout& l) {
  if (flat.size() != l.size()) throw std::invalid_argument("parameter vector length mismatch");
  ParamVector p;
  p.objectDof.resize(l.frames, kObjectDof);
  p.handDof.resize(l.frames, kHandDof);
  for (int t = 0; t < l.frames; ++t) {
    p.objectDof.row(t) = flat.segment<kObjectDof>(l.objectOffset(t)).transpose();
    p.handDof.row(t) = flat.segment<kHandDof>(l.handOffset(t)).transpose();
  }
  p.field = flat.tail(l.fieldSize);
  return p;
}

BatchSpec BatchSpec::allVertices(const SceneTrajectory& scene, std::vector<int> frames) {
  BatchSpec b;
  b.frames = std::move(frames);
  b.objectVertices.resize(scene.objectMesh.vertexCount());
  for (std::size_t i = 0; i < b.objectVertices.size(); ++i) b.objectVertices[i] = static_cast<int>(i);
  b.handVertices.resize(scene.hand->restMesh.vertexCount());
  for (std::size_t i = 0; i < b.handVertices.size(); ++i) b.handVertices[i] = static_cast<int>(i);
  return b;
}

EnergyModel::EnergyModel(const SceneTrajectory& reference, EnergyOptions options)
    : reference_(reference), options_(std::move(options)) {
  reference_.validate();
  if (reference_.objectMesh.vertexNormals.size() != reference_.objectMesh.vertexCount()) {
    reference_.objectMesh.updateNormals();
  }
  options_.weights.validate();
  options_.consts.validate();
  options_.contact.validate();
  options_.consts.mass = reference_.mass;
  options_.consts.frameDt = reference_.frameDt;
  layout_.frames = reference_.frameCount();
  layout_.fieldSize = ForceField::parameterCount(options_.hidden);
  objectField_ = std::make_shared<MeshDistanceField>(reference_.objectMesh, options_.distanceMode);
  referenceHand_.resize(layout_.frames);
  for (int t = 0; t < layout_.frames; ++t) {
    referenceHand_[t] = forwardHand(reference_.handPose(t), *reference_.hand).vertices;
  }
  const ObjectPose first = reference_.objectPose(0);
  origin_ = axisAngleToMatrix(first.axisAngle) * meshCentroid(reference_.objectMesh) + first.translation;
}

void EnergyModel::setContactWidth(double z) {
  ContactParams c = options_.contact;
  c.z = z;
  c.validate();
  options_.contact = c;
}

void EnergyModel::setWeights(const EnergyWeights& weights) {
  weights.validate();
  options_.weights = weights;
}

double EnergyModel::normalizedTime(int t) const {
  return layout_.frames > 1 ? static_cast<double>(t) / (layout_.frames - 1) : 0.0;
}

Eigen::VectorXd EnergyModel::initialParameters(std::uint64_t fieldSeed) const {
  ParamVector p;
  p.objectDof = reference_.objectDof;
  p.handDof = reference_.handDof;
  p.field = ForceField(options_.hidden, fieldSeed).parameters();
  return p.flatten();
}

struct EnergyModel::FrameState {
  int frame = -1;
  bool inBatch = false;

  Vec3 axisAngle;
  Mat3 rotation;
  Vec3 translation;
  HandForward hand;

  std::vector<Vec3> v, n, v0;
  std::vector<SignedDistanceResult> dist;
  std::vector<double> pc, sa, mn, r;
  std::vector<Vec3> s, fsp;
  std::vector<VertexForceState> states;
  ForceField::Cache cache;
  std::vector<SignedDistanceResult> handDist;

  double forceReg = 0.0, penetration = 0.0, deviation = 0.0;
  Vec3 forceSum = Vec3::Zero();

  // Adjoints filled by the serial pass.
  Vec3 netAdj = Vec3::Zero();
  Vec3 translationAdj = Vec3::Zero();
  Vec3 handRootAdj = Vec3::Zero();
  std::vector<Vec3> jointAdj;

  Vector6d objectGrad = Vector6d::Zero();
  Vector21d handGrad = Vector21d::Zero();
  Eigen::VectorXd fieldGrad;
};

namespace {

void checkBatch(const BatchSpec& batch, int frames, int objectVertices, int handVertices) {
  if (batch.frames.empty()) throw std::invalid_argument("batch has no frames");
  std::set<int> seen;
  for (int t : batch.frames) {
    if (t < 0 || t >= frames) throw std::out_of_range("batch frame out of range");
    if (!seen.insert(t).second) throw std::invalid_argument("batch frames must be distinct");
  }
  if (batch.objectVertices.empty()) throw std::invalid_argument("batch samples no object vertices");
  for (int i : batch.objectVertices) {
    if (i < 0 || i >= objectVertices) throw std::out_of_range("object vertex sample out of range");
  }
  for (int i : batch.handVertices) {
    if (i < 0 || i >= handVertices) throw std::out_of_range("hand vertex sample out of range");
  }
}

}  // namespace

void EnergyModel::run(const Eigen::VectorXd& params, const BatchSpec& batch, EnergyBreakdown* energy,
                      Eigen::VectorXd* gradient, std::vector<FrameForceReport>* inspect) const {
  const int T = layout_.frames;
  if (params.size() != layout_.size()) throw std::invalid_argument("parameter vector length mismatch");
  const SkinnedHandModel& model = *reference_.hand;
  const TriMesh& object = reference_.objectMesh;
  checkBatch(batch, T, static_cast<int>(object.vertexCount()), static_cast<int>(model.restMesh.vertexCount()));

  const EnergyWeights& w = options_.weights;
  const PhysicsConstants& c = options_.consts;
  const ContactParams& contact = options_.contact;
  const bool dynamics = T >= 3;
  const bool withHand = options_.includeHand;
  const int threads = options_.threads;

  ForceField field(options_.hidden);
  field.setParameters(params.tail(layout_.fieldSize));

  // Frames touched: the batch plus the two predecessors of every frame whose
  // acceleration is defined.
  std::set<int> needed(batch.frames.begin(), batch.frames.end());
  if (dynamics) {
    for (int t : batch.frames) {
      if (t >= 2) {
        needed.insert(t - 1);
        needed.insert(t - 2);
      }
    }
  }
  std::vector<FrameState> frames(needed.size());
  std::map<int, int> slot;
  {
    int k = 0;
    const std::set<int> inBatch(batch.frames.begin(), batch.frames.end());
    for (int t : needed) {
      frames[k].frame = t;
      frames[k].inBatch = inBatch.count(t) > 0;
      slot[t] = k++;
    }
  }

  const int nObj = static_cast<int>(batch.objectVertices.size());
  const int nHand = static_cast<int>(batch.handVertices.size());

  // Forward, per frame.
  parallelFor(frames.size(), [&](std::size_t idx) {
    FrameState& f = frames[idx];
    const int t = f.frame;
    f.axisAngle = params.segment<3>(layout_.objectOffset(t));
    f.translation = params.segment<3>(layout_.objectOffset(t) + 3);
    f.rotation = axisAngleToMatrix(f.axisAngle);
    f.hand = forwardHand(HandPose::fromRow(params.segment<kHandDof>(layout_.handOffset(t)).transpose()), model);
    if (!f.inBatch) return;

    TriMesh handMesh;
    handMesh.vertices = f.hand.vertices;
    handMesh.triangles = model.restMesh.triangles;
    if (options_.distanceMode == DistanceMode::VertexOnly) handMesh.updateNormals();
    const MeshDistanceField handField(handMesh, options_.distanceMode);

    const ObjectPose ref = reference_.objectPose(t);
    const Mat3 refRot = axisAngleToMatrix(ref.axisAngle);
    f.v.resize(nObj);
    f.n.resize(nObj);
    f.v0.resize(nObj);
    f.dist.resize(nObj);
    f.pc.resize(nObj);
    Eigen::MatrixXd inputs(4, nObj);
    const double tau = normalizedTime(t);
    for (int k = 0; k < nObj; ++k) {
      const int i = batch.objectVertices[k];
      f.v[k] = f.rotation * object.vertices[i] + f.translation;
      f.n[k] = f.rotation * object.vertexNormals[i];
      f.v0[k] = refRot * object.vertices[i] + ref.translation;
      f.dist[k] = handField.query(f.v[k]);
      f.pc[k] = contactProbability(f.dist[k].distance, contact);
      inputs.block<3, 1>(0, k) = f.v[k] - origin_;
      inputs(3, k) = tau;
    }
    const Eigen::MatrixXd out = field.forward(inputs, &f.cache);
    f.sa.resize(nObj);
    f.mn.resize(nObj);
    f.r.resize(nObj);
    f.s.resize(nObj);
    f.fsp.resize(nObj);
    f.states.resize(nObj);
    for (int k = 0; k < nObj; ++k) {
      const Vec3& n = f.n[k];
      f.sa[k] = sigmoid(out(0, k));
      f.mn[k] = flushTinyForce(c.fMax * f.pc[k] * f.sa[k]);
      f.s[k] = out.block<3, 1>(1, k);
      f.fsp[k] = f.s[k] - f.s[k].dot(n) * n;
      f.r[k] = f.fsp[k].norm();
      VertexForceState& st = f.states[k];
      st.d = f.dist[k].distance;
      st.pc = f.pc[k];
      st.fn = -f.mn[k] * n;
      st.fs = f.r[k] < 1e-12 ? Vec3::Zero() : Vec3(c.mu * f.mn[k] * tanhRatio(f.r[k]) * f.fsp[k]);
      f.forceReg += st.fn.squaredNorm() + st.fs.squaredNorm();
      f.penetration += std::max(0.0, -(st.d + w.dPen));
      f.deviation += (f.v[k] - f.v0[k]).squaredNorm();
      f.forceSum += st.fn + st.fs;
    }
    if (withHand) {
      const Mat3 rt = f.rotation.transpose();
      f.handDist.resize(nHand);
      for (int k = 0; k < nHand; ++k) {
        const int h = batch.handVertices[k];
        const Vec3& vh = f.hand.vertices[h];
        f.handDist[k] = objectField_->query(rt * (vh - f.translation));
        f.penetration += std::max(0.0, -(f.handDist[k].distance + w.dPen));
        f.deviation += (vh - referenceHand_[t][h]).squaredNorm();
      }
    }
  }, threads);

  // Serial pass: per-frame sums, physics and smoothness, and their adjoints.
  EnergyBreakdown e;
  for (int t : batch.frames) {
    const FrameState& f = frames[slot[t]];
    e.forceReg += f.forceReg;
    e.penetration += f.penetration;
    e.deviation += f.deviation;
  }
  const double invDt2 = 1.0 / (c.frameDt * c.frameDt);
  std::vector<Vec3> fNet(batch.frames.size(), Vec3::Zero()), fFd(batch.frames.size(), Vec3::Zero());
  std::vector<char> defined(batch.frames.size(), 0);
  for (std::size_t b = 0; b < batch.frames.size(); ++b) {
    const int t = batch.frames[b];
    FrameState& f = frames[slot[t]];
    fNet[b] = c.mass * c.gravity + f.forceSum / nObj;
    if (!dynamics || t < 2) continue;
    defined[b] = 1;
    FrameState& f1 = frames[slot[t - 1]];
    FrameState& f2 = frames[slot[t - 2]];
    auto second = [&](const Vec3& a, const Vec3& b1, const Vec3& b2) -> Vec3 {
      return (a - 2.0 * b1 + b2) * invDt2;
    };
    fFd[b] = c.mass * second(f.translation, f1.translation, f2.translation);
    const Vec3 diff = fFd[b] - fNet[b];
    e.physics += diff.squaredNorm();

    // Smoothness: object translation, hand root translation and joints.
    const Vec3 accObj = second(f.translation, f1.translation, f2.translation);
    e.smooth += accObj.squaredNorm();
    std::vector<Vec3> accJoint;
    Vec3 accRoot = Vec3::Zero();
    if (withHand) {
      accRoot = second(f.hand.globalTranslation, f1.hand.globalTranslation, f2.hand.globalTranslation);
      e.smooth += accRoot.squaredNorm();
      accJoint.resize(kReportedJoints);
      for (int j = 0; j < kReportedJoints; ++j) {
        accJoint[j] = second(f.hand.joints[j], f1.hand.joints[j], f2.hand.joints[j]);
        e.smooth += accJoint[j].squaredNorm();
      }
    }

    if (!gradient) continue;
    f.netAdj += -2.0 * w.physics * diff;
    const Vec3 gFd = 2.0 * w.physics * diff * c.mass * invDt2;
    const Vec3 gObj = 2.0 * w.smooth * accObj * invDt2;
    f.translationAdj += gFd + gObj;
    f1.translationAdj -= 2.0 * (gFd + gObj);
    f2.translationAdj += gFd + gObj;
    if (withHand) {
      const Vec3 gRoot = 2.0 * w.smooth * accRoot * invDt2;
      f.handRootAdj += gRoot;
      f1.handRootAdj -= 2.0 * gRoot;
      f2.handRootAdj += gRoot;
      for (FrameState* g : {&f, &f1, &f2}) {
        if (g->jointAdj.empty()) g->jointAdj.assign(kReportedJoints, Vec3::Zero());
      }
      for (int j = 0; j < kReportedJoints; ++j) {
        const Vec3 gj = 2.0 * w.smooth * accJoint[j] * invDt2;
        f.jointAdj[j] += gj;
        f1.jointAdj[j] -= 2.0 * gj;
        f2.jointAdj[j] += gj;
      }
    }
  }
  applyWeights(e, w);
  const std::pair<const char*, double> terms[] = {{"physics", e.physics},         {"forceReg", e.forceReg},
                                                  {"penetration", e.penetration}, {"deviation", e.deviation},
                                                  {"smooth", e.smooth},           {"total", e.total}};
  for (const auto& [name, value] : terms) {
    if (!std::isfinite(value)) throw NonFiniteEnergyError(name);
  }
  if (energy) *energy = e;

  if (inspect) {
    inspect->clear();
    for (std::size_t b = 0; b < batch.frames.size(); ++b) {
      const FrameState& f = frames[slot[batch.frames[b]]];
      FrameForceReport rep;
      rep.frame = f.frame;
      rep.vertices = batch.objectVertices;
      rep.states = f.states;
      rep.normals = f.n;
      for (const auto& hd : f.handDist) rep.handDistances.push_back(hd.distance);
      rep.netForce = fNet[b];
      rep.netForceFd = fFd[b];
      rep.physicsDefined = defined[b] != 0;
      inspect->push_back(std::move(rep));
    }
  }
  if (!gradient) return;

  // Reverse pass, per frame.
  const double dpdScale = -6.0 / contact.z;
  parallelFor(frames.size(), [&](std::size_t idx) {
    FrameState& f = frames[idx];
    Mat3 gradR = Mat3::Zero();
    Vec3 gradT = f.translationAdj;
    std::vector<Vec3> handAdj;
    if (f.inBatch) {
      handAdj.assign(model.restMesh.vertexCount(), Vec3::Zero());
      f.fieldGrad = Eigen::VectorXd::Zero(layout_.fieldSize);
      Eigen::MatrixXd outGrad(4, nObj);
      std::vector<Vec3> vAdj(nObj), nAdj(nObj);
      const Vec3 netShare = f.netAdj / nObj;
      for (int k = 0; k < nObj; ++k) {
        const VertexForceState& st = f.states[k];
        const Vec3& n = f.n[k];
        const Vec3 gFn = 2.0 * w.forceReg * st.fn + netShare;
        const Vec3 gFs = 2.0 * w.forceReg * st.fs + netShare;
        double gMn = 0.0;
        Vec3 gN = Vec3::Zero();
        Vec3 gS = Vec3::Zero();
        if (f.r[k] >= 1e-12) {
          const double phi = tanhRatio(f.r[k]);
          const double psi = tanhRatioDerivativeOverR(f.r[k]);
          const double proj = gFs.dot(f.fsp[k]);
          gMn += c.mu * phi * proj;
          const Vec3 gFsp = c.mu * f.mn[k] * (phi * gFs + psi * proj * f.fsp[k]);
          gS = gFsp - n * n.dot(gFsp);
          gN += -n.dot(f.s[k]) * gFsp - n.dot(gFsp) * f.s[k];
        }
        gMn += -gFn.dot(n);
        if (f.mn[k] == 0.0) gMn = 0.0;  // flushed: constant zero force
        gN += -f.mn[k] * gFn;
        const double gPc = gMn * c.fMax * f.sa[k];
        const double gA = gMn * c.fMax * f.pc[k] * f.sa[k] * (1.0 - f.sa[k]);
        double gD = gPc * dpdScale * f.pc[k] * (1.0 - f.pc[k]);
        if (st.d < -w.dPen) gD -= w.penetration;
        const SignedDistanceResult& dr = f.dist[k];
        Vec3 gV = gD * dr.gradient + 2.0 * w.deviation * (f.v[k] - f.v0[k]);
        for (int j = 0; j < 3; ++j) {
          if (dr.weights[j] != 0.0) handAdj[dr.support[j]] -= dr.weights[j] * gD * dr.gradient;
        }
        vAdj[k] = gV;
        nAdj[k] = gN;
        outGrad(0, k) = gA;
        outGrad.block<3, 1>(1, k) = gS;
      }
      Eigen::MatrixXd inputGrad;
      field.backward(f.cache, outGrad, f.fieldGrad, &inputGrad);
      for (int k = 0; k < nObj; ++k) {
        const int i = batch.objectVertices[k];
        const Vec3 gV = vAdj[k] + inputGrad.block<3, 1>(0, k);
        gradR += gV * object.vertices[i].transpose() + nAdj[k] * object.vertexNormals[i].transpose();
        gradT += gV;
      }
      if (withHand) {
        for (int k = 0; k < nHand; ++k) {
          const int h = batch.handVertices[k];
          const Vec3& vh = f.hand.vertices[h];
          const SignedDistanceResult& hd = f.handDist[k];
          if (hd.distance < -w.dPen) {
            const Vec3 gQ = -w.penetration * hd.gradient;
            const Vec3 gWorld = f.rotation * gQ;
            handAdj[h] += gWorld;
            gradT -= gWorld;
            gradR += (vh - f.translation) * gQ.transpose();
          }
          handAdj[h] += 2.0 * w.deviation * (vh - referenceHand_[f.frame][h]);
        }
      }
    }
    f.objectGrad.head<3>() = axisAngleGradient(f.axisAngle, gradR);
    f.objectGrad.tail<3>() = gradT;
    if (!handAdj.empty() || !f.jointAdj.empty()) {
      f.handGrad = backpropHand(f.hand, model, handAdj, f.jointAdj);
    }
    f.handGrad.segment<3>(3) += f.handRootAdj;
  }, threads);

  // Ordered reduction.
  gradient->setZero(layout_.size());
  for (const FrameState& f : frames) {
    gradient->segment<kObjectDof>(layout_.objectOffset(f.frame)) += f.objectGrad;
    gradient->segment<kHandDof>(layout_.handOffset(f.frame)) += f.handGrad;
    if (f.inBatch) gradient->tail(layout_.fieldSize) += f.fieldGrad;
  }
}

EnergyBreakdown EnergyModel::evaluate(const Eigen::VectorXd& params, const BatchSpec& batch) const {
  EnergyBreakdown e;
  run(params, batch, &e, nullptr, nullptr);
  return e;
}

GradientReport EnergyModel::evaluateWithGradient(const Eigen::VectorXd& params, const BatchSpec& batch) const {
  GradientReport r;
  run(params, batch, &r.energy, &r.gradient, nullptr);
  return r;
}

std::vector<FrameForceReport> EnergyModel::inspect(const Eigen::VectorXd& params, const BatchSpec& batch) const {
  std::vector<FrameForceReport> out;
  EnergyBreakdown e;
  run(params, batch, &e, nullptr, &out);
  return out;
}

Eigen::VectorXd finiteDifferenceGradient(const std::function<double(const Eigen::VectorXd&)>& energy,
                                         const Eigen::VectorXd& x, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite difference step must be positive");
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd probe = x;
  for (int k = 0; k < x.size(); ++k) {
    probe[k] = x[k] + h;
    const double plus = energy(probe);
    probe[k] = x[k] - h;
    const double minus = energy(probe);
    probe[k] = x[k];
    g[k] = (plus - minus) / (2.0 * h);
  }
  return g;
}

Eigen::VectorXd finiteDifferenceGradient(const EnergyModel& model, const Eigen::VectorXd& params,
                                         const BatchSpec& batch, double h,
                                         const std::vector<int>& coordinates) {
  if (!(h > 0.0)) throw std::invalid_argument("finite difference step must be positive");
  const EnergyWeights& w = model.options().weights;
  Eigen::VectorXd g = Eigen::VectorXd::Zero(params.size());
  Eigen::VectorXd probe = params;
  auto one = [&](int k) {
    probe[k] = params[k] + h;
    const EnergyBreakdown plus = model.evaluate(probe, batch);
    probe[k] = params[k] - h;
    const EnergyBreakdown minus = model.evaluate(probe, batch);
    probe[k] = params[k];
    g[k] = (w.physics * (plus.physics - minus.physics) + w.forceReg * (plus.forceReg - minus.forceReg) +
            w.penetration * (plus.penetration - minus.penetration) +
            w.deviation * (plus.deviation - minus.deviation) + w.smooth * (plus.smooth - minus.smooth)) /
           (2.0 * h);
  };
  if (coordinates.empty()) {
    for (int k = 0; k < params.size(); ++k) one(k);
  } else {
    for (int k : coordinates) one(k);
  }
  return g;
}

}  // namespace forcefit
