#include "forcefit/geometry.hpp"
#include "forcefit/shapes.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

using namespace forcefit;

namespace {

// Closest point by projecting onto the plane and, if outside, clamping to
// each edge segment. Independent of the region classification used in the
// library.
Vec3 closestOnTriangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 n = (b - a).cross(c - a).normalized();
  const Vec3 q = p - n.dot(p - a) * n;
  const Vec3 bary = [&] {
    Eigen::Matrix<double, 3, 2> m;
    m.col(0) = b - a;
    m.col(1) = c - a;
    const Eigen::Vector2d st = m.colPivHouseholderQr().solve(q - a);
    return Vec3(1 - st[0] - st[1], st[0], st[1]);
  }();
  if (bary.minCoeff() >= 0) return q;
  auto seg = [&](const Vec3& u, const Vec3& v) {
    const double t = std::clamp((p - u).dot(v - u) / (v - u).squaredNorm(), 0.0, 1.0);
    return Vec3(u + t * (v - u));
  };
  Vec3 best = seg(a, b);
  for (const Vec3& x : {seg(b, c), seg(c, a)}) {
    if ((x - p).norm() < (best - p).norm()) best = x;
  }
  return best;
}

double bruteUnsigned(const Vec3& p, const TriMesh& m) {
  double best = 1e300;
  for (const auto& t : m.triangles) {
    best = std::min(best, (closestOnTriangle(p, m.vertices[t[0]], m.vertices[t[1]], m.vertices[t[2]]) - p).norm());
  }
  return best;
}

// Moller-Trumbore crossing count along a ray.
bool insideByParity(const Vec3& p, const TriMesh& m, const Vec3& dir) {
  int hits = 0;
  for (const auto& t : m.triangles) {
    const Vec3 &a = m.vertices[t[0]], &b = m.vertices[t[1]], &c = m.vertices[t[2]];
    const Vec3 e1 = b - a, e2 = c - a;
    const Vec3 h = dir.cross(e2);
    const double det = e1.dot(h);
    if (std::abs(det) < 1e-14) continue;
    const Vec3 s = p - a;
    const double u = s.dot(h) / det;
    if (u < 0 || u > 1) continue;
    const Vec3 q = s.cross(e1);
    const double v = dir.dot(q) / det;
    if (v < 0 || u + v > 1) continue;
    if (e2.dot(q) / det > 0) ++hits;
  }
  return hits % 2 == 1;
}

TriMesh flatSquare() {
  TriMesh m;
  m.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0), Vec3(0, 1, 0)};
  m.triangles = {{0, 1, 2}, {0, 2, 3}};
  m.updateNormals();
  return m;
}

}  // namespace

TEST(Normals, CubeCornerIsDiagonal) {
  TriMesh cube = makeBox(Vec3(0.5, 0.5, 0.5), Vec3(0.5, 0.5, 0.5), {1, 1, 1});
  int found = 0;
  for (std::size_t i = 0; i < cube.vertexCount(); ++i) {
    if ((cube.vertices[i] - Vec3(1, 1, 1)).norm() < 1e-12) {
      EXPECT_NEAR((cube.vertexNormals[i] - Vec3(1, 1, 1).normalized()).norm(), 0.0, 1e-6);
      ++found;
    }
  }
  EXPECT_EQ(found, 1);
}

TEST(Normals, SingleTriangle) {
  TriMesh m;
  m.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};
  m.triangles = {{0, 1, 2}};
  m.updateNormals();
  for (const auto& n : m.vertexNormals) EXPECT_NEAR((n - Vec3(0, 0, 1)).norm(), 0.0, 1e-15);
}

TEST(Normals, DegenerateVertexThrows) {
  TriMesh m;
  m.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 0, 0)};
  m.triangles = {{0, 1, 2}};
  EXPECT_THROW(computeVertexNormals(m), std::runtime_error);
}

TEST(Validate, RejectsBadIndicesAndOrphans) {
  TriMesh m = flatSquare();
  m.triangles.push_back({0, 1, 9});
  EXPECT_THROW(m.validate(), std::invalid_argument);
  TriMesh orphan = flatSquare();
  orphan.vertices.push_back(Vec3(5, 5, 5));
  orphan.vertexNormals.push_back(Vec3(0, 0, 1));
  EXPECT_THROW(orphan.validate(), std::invalid_argument);
}

TEST(SignedDistance, FlatSquareAboveAndBelow) {
  const TriMesh sq = flatSquare();
  EXPECT_NEAR(signedDistanceToMesh(Vec3(0.5, 0.5, 0.01), sq).distance, 0.01, 1e-15);
  EXPECT_NEAR(signedDistanceToMesh(Vec3(0.5, 0.5, -0.01), sq).distance, -0.01, 1e-15);
}

TEST(SignedDistance, CubeCornerAlongPseudoNormal) {
  TriMesh cube = makeBox(Vec3::Zero(), Vec3(0.5, 0.5, 0.5), {2, 2, 2});
  const Vec3 corner(0.5, 0.5, 0.5);
  const Vec3 p = corner + 0.005 * Vec3(1, 1, 1).normalized();
  EXPECT_NEAR(signedDistanceToMesh(p, cube).distance, 0.005, 1e-6);
  EXPECT_NEAR(bruteUnsigned(p, cube), 0.005, 1e-12);
}

TEST(SignedDistance, EmptyMeshThrows) {
  EXPECT_THROW(signedDistanceToMesh(Vec3::Zero(), TriMesh{}), std::invalid_argument);
}

TEST(SignedDistance, MatchesBruteForceAndRayParity) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const std::vector<TriMesh> meshes = {makeSphere(Vec3(0.01, -0.02, 0.0), 0.04, 20, 14),
                                       makeBox(Vec3::Zero(), Vec3(0.03, 0.02, 0.025), {4, 3, 5}),
                                       makeCylinder(Vec3::Zero(), 0.02, 0.03, 16, 6)};
  for (const auto& mesh : meshes) {
    MeshDistanceField field(mesh);
    int inside = 0;
    for (int k = 0; k < 400; ++k) {
      const Vec3 p(0.06 * u(rng), 0.06 * u(rng), 0.06 * u(rng));
      const auto r = field.query(p);
      const double brute = bruteUnsigned(p, mesh);
      ASSERT_NEAR(std::abs(r.distance), brute, 1e-12);
      if (brute < 1e-9) continue;
      const bool in = insideByParity(p, mesh, Vec3(0.31, 0.77, 0.55).normalized());
      ASSERT_EQ(in, insideByParity(p, mesh, Vec3(-0.62, 0.21, 0.75).normalized()));
      inside += in;
      EXPECT_EQ(r.distance < 0, in) << "point " << p.transpose();
    }
    EXPECT_GT(inside, 10);
  }
}

TEST(SignedDistance, GradientAndSupportMatchFiniteDifferences) {
  const TriMesh sphere = makeSphere(Vec3::Zero(), 0.03, 16, 10);
  MeshDistanceField field(sphere);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-0.05, 0.05);
  const double h = 1e-7;
  for (int k = 0; k < 50; ++k) {
    const Vec3 p(u(rng), u(rng), u(rng));
    const auto r = field.query(p);
    for (int a = 0; a < 3; ++a) {
      Vec3 e = Vec3::Zero();
      e[a] = h;
      const double fd = (field.query(p + e).distance - field.query(p - e).distance) / (2 * h);
      EXPECT_NEAR(fd, r.gradient[a], 1e-5);
    }
    Vec3 cp = Vec3::Zero();
    for (int s = 0; s < 3; ++s) {
      if (r.support[s] >= 0) cp += r.weights[s] * sphere.vertices[r.support[s]];
    }
    EXPECT_NEAR((cp - r.closestPoint).norm(), 0.0, 1e-14);
  }
}

TEST(SignedDistance, VertexModeUsesNearestVertex) {
  const TriMesh sphere = makeSphere(Vec3::Zero(), 0.03, 12, 8);
  MeshDistanceField field(sphere, DistanceMode::VertexOnly);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-0.05, 0.05);
  for (int k = 0; k < 100; ++k) {
    const Vec3 p(u(rng), u(rng), u(rng));
    double best = 1e300;
    for (const auto& v : sphere.vertices) best = std::min(best, (v - p).norm());
    const auto r = field.query(p);
    EXPECT_NEAR(std::abs(r.distance), best, 1e-14);
    EXPECT_EQ(r.closestTriangle, -1);
  }
}

TEST(Sampling, FullCountReturnsEveryIndexOnce) {
  const TriMesh sphere = makeSphere(Vec3::Zero(), 1.0, 10, 6);
  const int n = static_cast<int>(sphere.vertexCount());
  auto all = sampleVertices(n, sphere, 1);
  ASSERT_EQ(static_cast<int>(all.size()), n);
  for (int i = 0; i < n; ++i) EXPECT_EQ(all[i], i);
  auto a = sampleVertices(20, sphere, 9), b = sampleVertices(20, sphere, 9);
  EXPECT_EQ(a, b);
  EXPECT_TRUE(std::is_sorted(a.begin(), a.end()));
  EXPECT_EQ(std::adjacent_find(a.begin(), a.end()), a.end());
  EXPECT_THROW(sampleVertices(0, sphere, 1), std::invalid_argument);
}

TEST(Obj, RoundTrip) {
  const TriMesh box = makeBox(Vec3(0.1, 0, 0), Vec3(0.02, 0.03, 0.01), {2, 2, 2});
  std::stringstream ss;
  writeObj(ss, box);
  const TriMesh back = parseObj(ss);
  ASSERT_EQ(back.vertexCount(), box.vertexCount());
  ASSERT_EQ(back.triangles, box.triangles);
  for (std::size_t i = 0; i < box.vertexCount(); ++i) EXPECT_EQ(back.vertices[i], box.vertices[i]);
}

TEST(Obj, IgnoresTextureIndicesAndRejectsJunk) {
  std::istringstream in("v 0 0 0\nv 1 0 0\nv 0 1 0\nvt 0 0\nf 1/1/1 2/1/1 3/1/1\n");
  const TriMesh m = parseObj(in);
  EXPECT_EQ(m.triangleCount(), 1u);
  std::istringstream bad("v 0 0\nf 1 2 3\n");
  EXPECT_THROW(parseObj(bad), std::runtime_error);
}
