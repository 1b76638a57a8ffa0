#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

namespace forcefit {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Triangle = std::array<int, 3>;

// Triangles with area below this (m^2) are skipped by normals and distance queries.
inline constexpr double kDegenerateArea = 1e-12;

struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<Triangle> triangles;
  std::vector<Vec3> vertexNormals;

  std::size_t vertexCount() const { return vertices.size(); }
  std::size_t triangleCount() const { return triangles.size(); }

  /// Throws std::invalid_argument if an index is out of range or a vertex is
  /// not referenced by any triangle.
  void validate() const;

  /// Recomputes vertexNormals from the current vertex positions.
  void updateNormals();
};

/// Area-weighted average of incident face normals, normalized. Degenerate
/// faces contribute nothing; a vertex whose incident faces are all degenerate
/// raises std::runtime_error("degenerate vertex normal").
std::vector<Vec3> computeVertexNormals(const TriMesh& mesh);

Vec3 meshCentroid(const TriMesh& mesh);

/// Result of a signed distance query. The distance is a function of the query
/// point and of the (up to three) mesh vertices in `support`:
///   closestPoint = sum_k weights[k] * vertices[support[k]]
///   d(distance)/d(point)          =  gradient
///   d(distance)/d(vertex support[k]) = -weights[k] * gradient
struct SignedDistanceResult {
  double distance = 0.0;
  Vec3 closestPoint = Vec3::Zero();
  int closestTriangle = -1;  // -1 in vertex-only mode
  std::array<int, 3> support{-1, -1, -1};
  Vec3 weights = Vec3::Zero();
  Vec3 gradient = Vec3::Zero();
};

enum class DistanceMode {
  Surface,     // closest point over all triangles
  VertexOnly,  // closest mesh vertex, signed by its vertex normal
};

/// Signed distance to a triangle mesh, accelerated by a bounding-volume
/// hierarchy. Negative distances are behind the surface (penetrating). The
/// sign uses angle-weighted pseudo-normals, so it is well defined when the
/// closest point lies on an edge or a vertex.
///
/// The field snapshots the mesh at construction; rebuild it after the mesh
/// vertices move. Queries are const and may run concurrently.
class MeshDistanceField {
 public:
  explicit MeshDistanceField(const TriMesh& mesh,
                             DistanceMode mode = DistanceMode::Surface);

  SignedDistanceResult query(const Vec3& point) const;

  DistanceMode mode() const { return mode_; }
  const std::vector<Vec3>& vertices() const { return vertices_; }

 private:
  struct Node {
    Eigen::AlignedBox3d box;
    int left = -1;
    int right = -1;
    int first = 0;
    int count = 0;
  };

  int build(int first, int count, std::vector<Vec3>& centroids,
            std::vector<Eigen::AlignedBox3d>& boxes);
  SignedDistanceResult queryTriangles(const Vec3& point) const;
  SignedDistanceResult queryVertices(const Vec3& point) const;

  DistanceMode mode_;
  std::vector<Vec3> vertices_;
  std::vector<Triangle> triangles_;
  std::vector<Vec3> faceNormals_;
  std::vector<std::array<Vec3, 3>> edgeNormals_;  // edges (0,1), (1,2), (2,0)
  std::vector<Vec3> vertexPseudoNormals_;
  std::vector<Vec3> vertexNormals_;
  std::vector<int> primitives_;
  std::vector<Node> nodes_;
};

/// One-shot query; builds a distance field for `mesh`. Throws
/// std::invalid_argument("empty mesh") when the mesh has no triangles.
SignedDistanceResult signedDistanceToMesh(const Vec3& point, const TriMesh& mesh);

/// Uniform sample of vertex indices without replacement, sorted ascending.
/// Returns every index when count >= vertex count. Deterministic in seed.
std::vector<int> sampleVertices(int count, const TriMesh& mesh, std::uint64_t seed);
std::vector<int> sampleIndices(int count, int population, std::mt19937_64& rng);

/// Wavefront OBJ subset: `v x y z` and triangular `f` lines with 1-based
/// indices (texture/normal indices after '/' are ignored).
TriMesh parseObj(std::istream& in);
TriMesh readObj(const std::string& path);
void writeObj(std::ostream& out, const TriMesh& mesh);
void writeObj(const std::string& path, const TriMesh& mesh);

}  // namespace forcefit
