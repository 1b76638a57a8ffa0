#include "forcefit/scene.hpp"

#include "forcefit/shapes.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace forcefit {

namespace fs = std::filesystem;

Vec3 EquilibriumCertificate::meanForce() const {
  Vec3 sum = Vec3::Zero();
  for (const auto& f : forces) sum += f.fn + f.fs;
  return forces.empty() ? sum : Vec3(sum / double(forces.size()));
}

void SceneTrajectory::validate() const {
  objectMesh.validate();
  if (!hand) throw std::invalid_argument("scene has no hand model");
  if (!(mass > 0.0)) throw std::invalid_argument("scene mass must be positive");
  if (!(frameDt > 0.0)) throw std::invalid_argument("scene frame interval must be positive");
  if (objectDof.rows() < 1) throw std::invalid_argument("scene has no frames");
  if (objectDof.cols() != kObjectDof) throw std::invalid_argument("object DoF must be T x 6");
  if (handDof.cols() != kHandDof || handDof.rows() != objectDof.rows()) {
    throw std::invalid_argument("hand DoF must be T x 21 with T matching the object");
  }
  if (!objectDof.allFinite() || !handDof.allFinite()) throw std::invalid_argument("non-finite DoF");
  if (!truthContact.empty() && truthContact.size() != objectMesh.vertexCount()) {
    throw std::invalid_argument("truth contact length must equal the object vertex count");
  }
}

std::shared_ptr<const SkinnedHandModel> loadHandModel(const std::string& ref, const std::string& baseDir) {
  if (ref == "builtin:hand") return builtinHand();
  const fs::path p = fs::path(ref).is_absolute() ? fs::path(ref) : fs::path(baseDir) / ref;
  return std::make_shared<const SkinnedHandModel>(readSkinModel(p.string()));
}

TriMesh loadObjectMesh(const std::string& ref, const std::string& baseDir) {
  if (isBuiltinObject(ref)) return builtinObject(ref);
  const fs::path p = fs::path(ref).is_absolute() ? fs::path(ref) : fs::path(baseDir) / ref;
  return readObj(p.string());
}

namespace {

void writeMatrix(std::ostream& out, const Eigen::MatrixXd& m) {
  for (int r = 0; r < m.rows(); ++r) {
    for (int c = 0; c < m.cols(); ++c) out << m(r, c) << (c + 1 < m.cols() ? ' ' : '\n');
  }
}

std::string nextWord(std::istream& in) {
  std::string w;
  if (!(in >> w)) throw std::runtime_error("scene: unexpected end of file");
  return w;
}

template <typename T>
T nextValue(std::istream& in, const char* what) {
  T v;
  if (!(in >> v)) throw std::runtime_error(std::string("scene: malformed ") + what);
  return v;
}

Eigen::MatrixXd readMatrix(std::istream& in, int rows, int cols, const char* what) {
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = nextValue<double>(in, what);
  }
  return m;
}

}  // namespace

void writeScene(std::ostream& out, const SceneTrajectory& scene) {
  scene.validate();
  out << std::setprecision(17);
  out << "SCENE 1\n";
  out << "object_mesh " << scene.objectMeshRef << '\n';
  out << "model " << scene.modelRef << '\n';
  out << "mass " << scene.mass << '\n';
  out << "frame_dt " << scene.frameDt << '\n';
  out << "frames " << scene.frameCount() << '\n';
  out << "object_dof\n";
  writeMatrix(out, scene.objectDof);
  out << "hand_dof\n";
  writeMatrix(out, scene.handDof);
  if (!scene.truthContact.empty()) {
    out << "truth_contact " << scene.truthContact.size() << '\n';
    for (std::size_t i = 0; i < scene.truthContact.size(); ++i) {
      out << scene.truthContact[i] << ((i + 1) % 40 == 0 || i + 1 == scene.truthContact.size() ? '\n' : ' ');
    }
  }
  if (scene.certificate) {
    out << "certificate " << scene.certificate->forces.size() << '\n';
    for (const auto& f : scene.certificate->forces) {
      out << f.vertex << ' ' << f.fn.x() << ' ' << f.fn.y() << ' ' << f.fn.z() << ' ' << f.fs.x() << ' '
          << f.fs.y() << ' ' << f.fs.z() << '\n';
    }
  }
  out << "end\n";
}

void writeScene(const std::string& path, const SceneTrajectory& scene) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  writeScene(out, scene);
  if (!out) throw std::runtime_error("failed writing " + path);
}

SceneTrajectory readScene(std::istream& in, const std::string& baseDir) {
  if (nextWord(in) != "SCENE" || nextValue<int>(in, "version") != 1) {
    throw std::runtime_error("scene: expected header 'SCENE 1'");
  }
  SceneTrajectory s;
  int frames = -1;
  bool haveObject = false, haveHand = false;
  for (;;) {
    const std::string key = nextWord(in);
    if (key == "end") break;
    if (key == "object_mesh") {
      s.objectMeshRef = nextWord(in);
    } else if (key == "model") {
      s.modelRef = nextWord(in);
    } else if (key == "mass") {
      s.mass = nextValue<double>(in, "mass");
    } else if (key == "frame_dt") {
      s.frameDt = nextValue<double>(in, "frame_dt");
    } else if (key == "frames") {
      frames = nextValue<int>(in, "frame count");
      if (frames < 1) throw std::runtime_error("scene: frame count must be positive");
    } else if (key == "object_dof") {
      if (frames < 1) throw std::runtime_error("scene: 'frames' must precede DoF rows");
      s.objectDof = readMatrix(in, frames, kObjectDof, "object DoF");
      haveObject = true;
    } else if (key == "hand_dof") {
      if (frames < 1) throw std::runtime_error("scene: 'frames' must precede DoF rows");
      s.handDof = readMatrix(in, frames, kHandDof, "hand DoF");
      haveHand = true;
    } else if (key == "truth_contact") {
      const long n = nextValue<long>(in, "truth count");
      s.truthContact.resize(n);
      for (auto& v : s.truthContact) v = nextValue<int>(in, "truth label");
    } else if (key == "certificate") {
      const long n = nextValue<long>(in, "certificate count");
      EquilibriumCertificate c;
      for (long k = 0; k < n; ++k) {
        CertificateForce f;
        f.vertex = nextValue<int>(in, "certificate vertex");
        for (int i = 0; i < 3; ++i) f.fn[i] = nextValue<double>(in, "certificate force");
        for (int i = 0; i < 3; ++i) f.fs[i] = nextValue<double>(in, "certificate force");
        c.forces.push_back(f);
      }
      s.certificate = std::move(c);
    } else {
      throw std::runtime_error("scene: unknown section '" + key + "'");
    }
  }
  if (!haveObject || !haveHand) throw std::runtime_error("scene: missing DoF rows");
  s.objectMesh = loadObjectMesh(s.objectMeshRef, baseDir);
  s.hand = loadHandModel(s.modelRef, baseDir);
  if (s.certificate) {
    for (const auto& f : s.certificate->forces) {
      if (f.vertex < 0 || f.vertex >= static_cast<int>(s.objectMesh.vertexCount())) {
        throw std::runtime_error("scene: certificate vertex out of range");
      }
    }
  }
  s.validate();
  return s;
}

SceneTrajectory readScene(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  const fs::path parent = fs::path(path).parent_path();
  return readScene(in, parent.empty() ? std::string(".") : parent.string());
}

}  // namespace forcefit
