#include "forcefit/contact.hpp"
#include "forcefit/eval.hpp"
#include "forcefit/geometry.hpp"
#include "forcefit/pipeline.hpp"
#include "forcefit/refine.hpp"
#include "forcefit/scene.hpp"
#include "forcefit/scenegen.hpp"
#include "forcefit/shapes.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace forcefit;

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using IndexMatrix = Eigen::Matrix<int, Eigen::Dynamic, 3, Eigen::RowMajor>;

TriMesh meshFromArrays(const RowMatrix& v, const IndexMatrix& f) {
  if (v.cols() != 3) throw std::invalid_argument("vertices must be N x 3");
  TriMesh m;
  for (int i = 0; i < v.rows(); ++i) m.vertices.emplace_back(v(i, 0), v(i, 1), v(i, 2));
  for (int i = 0; i < f.rows(); ++i) m.triangles.push_back({f(i, 0), f(i, 1), f(i, 2)});
  m.validate();
  m.updateNormals();
  return m;
}

py::tuple meshToArrays(const TriMesh& m) {
  RowMatrix v(m.vertexCount(), 3);
  IndexMatrix f(m.triangleCount(), 3);
  for (std::size_t i = 0; i < m.vertexCount(); ++i) v.row(i) = m.vertices[i].transpose();
  for (std::size_t i = 0; i < m.triangleCount(); ++i) f.row(i) << m.triangles[i][0], m.triangles[i][1], m.triangles[i][2];
  return py::make_tuple(v, f);
}

std::vector<std::vector<Vec3>> framesFromArray(const py::array_t<double>& a) {
  auto r = a.unchecked<3>();
  if (r.shape(2) != 3) throw std::invalid_argument("joints must be T x J x 3");
  std::vector<std::vector<Vec3>> out(r.shape(0), std::vector<Vec3>(r.shape(1)));
  for (py::ssize_t t = 0; t < r.shape(0); ++t) {
    for (py::ssize_t j = 0; j < r.shape(1); ++j) out[t][j] = Vec3(r(t, j, 0), r(t, j, 1), r(t, j, 2));
  }
  return out;
}

py::dict metricsDict(const MetricsReport& m) {
  py::dict d;
  d["mpjpe"] = m.mpjpe;
  d["pr_auc"] = m.prAuc;
  d["roc_auc"] = m.rocAuc;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "forcefit C++ core";
  py::register_exception<NoCertificateError>(m, "NoCertificateError", PyExc_RuntimeError);

  py::class_<ContactParams>(m, "ContactParams")
      .def(py::init<>())
      .def(py::init([](double z, double p0) { return ContactParams{z, p0}; }), py::arg("z"), py::arg("p0") = 0.5)
      .def_readwrite("z", &ContactParams::z)
      .def_readwrite("p0", &ContactParams::p0);

  m.def("contact_probability", py::vectorize([](double d, double z, double p0) {
          return contactProbability(d, ContactParams{z, p0});
        }),
        py::arg("d"), py::arg("z") = 0.002, py::arg("p0") = 0.5, "Contact probability for signed distance d (m).");
  m.def("annealed_z", [](int epoch, double zStart, double zEnd, int epochs) {
    return annealedZ(epoch, AnnealSchedule{zStart, zEnd, epochs});
  }, py::arg("epoch"), py::arg("z_start") = 0.030, py::arg("z_end") = 0.002, py::arg("epochs") = 300);

  m.def("builtin_object", [](const std::string& name) { return meshToArrays(builtinObject("builtin:" + name)); },
        py::arg("name"), "Vertices (N x 3) and triangles (M x 3) of a built-in object.");
  m.def("signed_distance", [](const RowMatrix& points, const RowMatrix& vertices, const IndexMatrix& triangles) {
    if (points.cols() != 3) throw std::invalid_argument("points must be N x 3");
    const MeshDistanceField field(meshFromArrays(vertices, triangles));
    Eigen::VectorXd d(points.rows());
    for (int i = 0; i < points.rows(); ++i) d[i] = field.query(Vec3(points(i, 0), points(i, 1), points(i, 2))).distance;
    return d;
  }, py::arg("points"), py::arg("vertices"), py::arg("triangles"),
        "Signed distances of points to a closed mesh; negative inside.");

  py::class_<SceneTrajectory>(m, "Scene")
      .def_property_readonly("frame_count", &SceneTrajectory::frameCount)
      .def_readwrite("object_dof", &SceneTrajectory::objectDof)
      .def_readwrite("hand_dof", &SceneTrajectory::handDof)
      .def_readwrite("truth_contact", &SceneTrajectory::truthContact)
      .def_readwrite("mass", &SceneTrajectory::mass)
      .def_readwrite("frame_dt", &SceneTrajectory::frameDt)
      .def_readonly("object_mesh_ref", &SceneTrajectory::objectMeshRef)
      .def_property_readonly("has_certificate", [](const SceneTrajectory& s) { return s.certificate.has_value(); })
      .def("object_mesh", [](const SceneTrajectory& s) { return meshToArrays(s.objectMesh); })
      .def("joints", [](const SceneTrajectory& s) {
        const auto j = jointTrajectory(s);
        py::array_t<double> out({static_cast<py::ssize_t>(j.size()), static_cast<py::ssize_t>(kReportedJoints),
                                 static_cast<py::ssize_t>(3)});
        auto w = out.mutable_unchecked<3>();
        for (std::size_t t = 0; t < j.size(); ++t) {
          for (int k = 0; k < kReportedJoints; ++k) {
            for (int a = 0; a < 3; ++a) w(t, k, a) = j[t][k][a];
          }
        }
        return out;
      }, "Reported hand joints, T x 21 x 3.")
      .def("object_distances", [](const SceneTrajectory& s) { return objectDistances(s); })
      .def("copy", [](const SceneTrajectory& s) { return SceneTrajectory(s); })
      .def("__repr__", [](const SceneTrajectory& s) {
        return "<Scene " + s.objectMeshRef + ", " + std::to_string(s.frameCount()) + " frames>";
      });

  m.def("read_scene", py::overload_cast<const std::string&>(&readScene), py::arg("path"));
  m.def("write_scene", py::overload_cast<const std::string&, const SceneTrajectory&>(&writeScene), py::arg("path"),
        py::arg("scene"));

  m.def("generate_static_grasp", [](const std::string& shape, const std::string& grasp, int frames, std::uint64_t seed,
                                    std::optional<double> mu) {
    GraspOptions o;
    if (mu) o.consts.mu = *mu;
    py::gil_scoped_release release;
    return generateStaticGrasp(parseObjectShape(shape), parseGraspStyle(grasp), frames, seed, o).scene;
  }, py::arg("shape") = "sphere", py::arg("grasp") = "pinch", py::arg("frames") = 30, py::arg("seed") = 0,
        py::arg("mu") = py::none());

  m.def("solve_equilibrium", [](const RowMatrix& normals, double mass, double mu, double fMax) {
    std::vector<Vec3> n;
    for (int i = 0; i < normals.rows(); ++i) n.emplace_back(normals(i, 0), normals(i, 1), normals(i, 2));
    PhysicsConstants c;
    c.mass = mass;
    c.mu = mu;
    c.fMax = fMax;
    const auto s = solveEquilibrium(n, c);
    RowMatrix fn(n.size(), 3), fs(n.size(), 3);
    for (std::size_t i = 0; i < n.size(); ++i) {
      fn.row(i) = s.fn[i].transpose();
      fs.row(i) = s.fs[i].transpose();
    }
    return py::make_tuple(fn, fs);
  }, py::arg("normals"), py::arg("mass") = 0.1, py::arg("mu") = 0.8, py::arg("fmax") = 5.0,
        "Contact forces (normal, friction) that hold the object against gravity.");

  m.def("inject_finger_noise", &injectFingerNoise, py::arg("hand_dof"), py::arg("seed"), py::arg("shared") = true,
        py::arg("stddev") = 0.1);
  m.def("mpjpe", [](const py::array_t<double>& a, const py::array_t<double>& b) {
    return mpjpe(framesFromArray(a), framesFromArray(b));
  }, py::arg("predicted"), py::arg("truth"), "Mean joint error in mm for T x J x 3 arrays in meters.");
  m.def("roc_auc", &rocAuc, py::arg("predicted"), py::arg("truth"));
  m.def("pr_auc", &prAuc, py::arg("predicted"), py::arg("truth"));
  m.def("evaluate_scene", [](const SceneTrajectory& p, const SceneTrajectory& t, double z, double p0) {
    return metricsDict(evaluateScene(p, t, ContactParams{z, p0}));
  }, py::arg("predicted"), py::arg("truth"), py::arg("z") = 0.002, py::arg("p0") = 0.5);
  m.def("count_penetrating", &countPenetrating, py::arg("scene"), py::arg("depth") = 0.002);

  py::class_<EnergyWeights>(m, "EnergyWeights")
      .def(py::init<>())
      .def_readwrite("physics", &EnergyWeights::physics)
      .def_readwrite("force_reg", &EnergyWeights::forceReg)
      .def_readwrite("penetration", &EnergyWeights::penetration)
      .def_readwrite("deviation", &EnergyWeights::deviation)
      .def_readwrite("smooth", &EnergyWeights::smooth)
      .def_readwrite("d_pen", &EnergyWeights::dPen);

  py::class_<RefineConfig>(m, "RefineConfig")
      .def(py::init<>())
      .def_readwrite("epochs", &RefineConfig::epochs)
      .def_readwrite("batch_frames", &RefineConfig::batchFrames)
      .def_readwrite("sample_vertices", &RefineConfig::sampleVertices)
      .def_readwrite("lr_pose", &RefineConfig::lrPose)
      .def_readwrite("lr_field", &RefineConfig::lrField)
      .def_readwrite("share_finger_pose", &RefineConfig::shareFingerPose)
      .def_readwrite("seed", &RefineConfig::seed)
      .def_readwrite("weights", &RefineConfig::weights)
      .def_readwrite("z_start", &RefineConfig::zStart)
      .def_readwrite("z_end", &RefineConfig::zEnd)
      .def_readwrite("p0", &RefineConfig::p0)
      .def_readwrite("fmax", &RefineConfig::fMax)
      .def_readwrite("mu", &RefineConfig::mu)
      .def_readwrite("hidden", &RefineConfig::hidden)
      .def_readwrite("threads", &RefineConfig::threads)
      .def("validate", &RefineConfig::validate)
      .def("to_json", [](const RefineConfig& c) { return configToJson(c).dump(); });

  m.def("refine", [](const SceneTrajectory& scene, const RefineConfig& config) {
    RefineResult r;
    {
      py::gil_scoped_release release;
      r = refine(scene, config);
    }
    py::list history;
    for (const auto& e : r.history) {
      py::dict d;
      d["epoch"] = e.epoch;
      d["z"] = e.z;
      d["physics"] = e.energy.physics;
      d["force_reg"] = e.energy.forceReg;
      d["penetration"] = e.energy.penetration;
      d["deviation"] = e.energy.deviation;
      d["smooth"] = e.energy.smooth;
      d["total"] = e.energy.total;
      history.append(d);
    }
    return py::make_tuple(r.scene, history);
  }, py::arg("scene"), py::arg("config"), "Refine a scene; returns (refined scene, per-epoch energies).");
}
