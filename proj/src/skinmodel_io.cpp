#include "forcefit/kinematics.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace forcefit {

namespace {

using SparseRow = Eigen::SparseMatrix<double, Eigen::RowMajor>;

void writeTriplets(std::ostream& out, const char* name, const SparseRow& m) {
  out << name << ' ' << m.nonZeros() << '\n';
  for (int r = 0; r < m.outerSize(); ++r) {
    for (SparseRow::InnerIterator it(m, r); it; ++it) {
      out << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
    }
  }
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::string keyword() {
    std::string word;
    if (!(in_ >> word)) throw std::runtime_error("skin model: unexpected end of file");
    return word;
  }

  void expect(const std::string& want) {
    const std::string got = keyword();
    if (got != want) throw std::runtime_error("skin model: expected '" + want + "', got '" + got + "'");
  }

  template <typename T>
  T value() {
    T v;
    if (!(in_ >> v)) throw std::runtime_error("skin model: malformed number");
    return v;
  }

 private:
  std::istream& in_;
};

SparseRow readTriplets(Reader& r, const char* name, int rows, int cols) {
  r.expect(name);
  const long n = r.value<long>();
  if (n < 0) throw std::runtime_error("skin model: negative count");
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(n);
  for (long k = 0; k < n; ++k) {
    const int i = r.value<int>();
    const int j = r.value<int>();
    const double v = r.value<double>();
    if (i < 0 || i >= rows || j < 0 || j >= cols) {
      throw std::runtime_error(std::string("skin model: ") + name + " index out of range");
    }
    trips.emplace_back(i, j, v);
  }
  SparseRow m(rows, cols);
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

}  // namespace

void writeSkinModel(std::ostream& out, const SkinnedHandModel& model) {
  model.validate();
  out << std::setprecision(17);
  out << "SKINMODEL 1\n";
  out << "vertices " << model.restMesh.vertices.size() << '\n';
  for (const auto& v : model.restMesh.vertices) out << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  out << "triangles " << model.restMesh.triangles.size() << '\n';
  for (const auto& t : model.restMesh.triangles) out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  out << "joints " << model.jointCount() << '\n';
  for (int j = 0; j < model.jointCount(); ++j) {
    const Vec3& p = model.jointRest[j];
    out << model.parents[j] << ' ' << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
  }
  writeTriplets(out, "skin_weights", model.skinWeights);
  out << "pose_basis " << model.poseBasis.rows() << ' ' << model.poseBasis.cols() << '\n';
  for (int r = 0; r < model.poseBasis.rows(); ++r) {
    for (int c = 0; c < model.poseBasis.cols(); ++c) {
      out << model.poseBasis(r, c) << (c + 1 < model.poseBasis.cols() ? ' ' : '\n');
    }
  }
  writeTriplets(out, "joint_regressor", model.jointRegressor);
  out << "end\n";
}

void writeSkinModel(const std::string& path, const SkinnedHandModel& model) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  writeSkinModel(out, model);
}

SkinnedHandModel readSkinModel(std::istream& in) {
  Reader r(in);
  r.expect("SKINMODEL");
  if (r.value<int>() != 1) throw std::runtime_error("skin model: unsupported version");
  SkinnedHandModel model;
  r.expect("vertices");
  const long nv = r.value<long>();
  if (nv <= 0) throw std::runtime_error("skin model: no vertices");
  for (long i = 0; i < nv; ++i) {
    const double x = r.value<double>(), y = r.value<double>(), z = r.value<double>();
    model.restMesh.vertices.emplace_back(x, y, z);
  }
  r.expect("triangles");
  const long nt = r.value<long>();
  for (long i = 0; i < nt; ++i) {
    Triangle t;
    for (int& k : t) k = r.value<int>();
    model.restMesh.triangles.push_back(t);
  }
  r.expect("joints");
  const int nj = r.value<int>();
  if (nj <= 0) throw std::runtime_error("skin model: no joints");
  for (int j = 0; j < nj; ++j) {
    model.parents.push_back(r.value<int>());
    const double x = r.value<double>(), y = r.value<double>(), z = r.value<double>();
    model.jointRest.emplace_back(x, y, z);
  }
  model.skinWeights = readTriplets(r, "skin_weights", static_cast<int>(nv), nj);
  r.expect("pose_basis");
  const int rows = r.value<int>();
  const int cols = r.value<int>();
  if (rows != 3 * nj || cols != kPoseCoeffs) throw std::runtime_error("skin model: pose basis shape");
  model.poseBasis.resize(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int c = 0; c < cols; ++c) model.poseBasis(i, c) = r.value<double>();
  }
  model.jointRegressor = readTriplets(r, "joint_regressor", kReportedJoints, static_cast<int>(nv));
  r.expect("end");
  model.restMesh.validate();
  model.restMesh.updateNormals();
  model.validate();
  return model;
}

SkinnedHandModel readSkinModel(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return readSkinModel(in);
}

}  // namespace forcefit
