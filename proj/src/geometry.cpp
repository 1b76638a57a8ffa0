#include "forcefit/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <cstdint>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace forcefit {

void TriMesh::validate() const {
  const int n = static_cast<int>(vertices.size());
  std::vector<char> used(vertices.size(), 0);
  for (const auto& tri : triangles) {
    for (int idx : tri) {
      if (idx < 0 || idx >= n) {
        throw std::invalid_argument("triangle index out of range");
      }
      used[idx] = 1;
    }
  }
  for (std::size_t i = 0; i < used.size(); ++i) {
    if (!used[i]) {
      throw std::invalid_argument("vertex " + std::to_string(i) +
                                  " is not referenced by any triangle");
    }
  }
  if (!vertexNormals.empty() && vertexNormals.size() != vertices.size()) {
    throw std::invalid_argument("vertex normal count mismatch");
  }
}

void TriMesh::updateNormals() { vertexNormals = computeVertexNormals(*this); }

std::vector<Vec3> computeVertexNormals(const TriMesh& mesh) {
  std::vector<Vec3> normals(mesh.vertices.size(), Vec3::Zero());
  for (const auto& tri : mesh.triangles) {
    const Vec3& a = mesh.vertices[tri[0]];
    const Vec3& b = mesh.vertices[tri[1]];
    const Vec3& c = mesh.vertices[tri[2]];
    // Cross product length is twice the area, so this is the area weighting.
    const Vec3 cross = (b - a).cross(c - a);
    if (0.5 * cross.norm() < kDegenerateArea) continue;
    for (int idx : tri) normals[idx] += cross;
  }
  for (auto& n : normals) {
    const double len = n.norm();
    if (!(len > 0.0)) throw std::runtime_error("degenerate vertex normal");
    n /= len;
  }
  return normals;
}

Vec3 meshCentroid(const TriMesh& mesh) {
  Vec3 c = Vec3::Zero();
  for (const auto& v : mesh.vertices) c += v;
  return mesh.vertices.empty() ? c : Vec3(c / double(mesh.vertices.size()));
}

namespace {

enum class Region { Face, EdgeAB, EdgeBC, EdgeCA, VertA, VertB, VertC };

struct ClosestOnTriangle {
  Vec3 point;
  Vec3 bary;  // weights of a, b, c
  Region region;
};

// Closest point on triangle abc to p, after Ericson's region classification.
ClosestOnTriangle closestPointOnTriangle(const Vec3& p, const Vec3& a, const Vec3& b,
                                         const Vec3& c) {
  const Vec3 ab = b - a;
  const Vec3 ac = c - a;
  const Vec3 ap = p - a;
  const double d1 = ab.dot(ap);
  const double d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return {a, Vec3(1, 0, 0), Region::VertA};

  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp);
  const double d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return {b, Vec3(0, 1, 0), Region::VertB};

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
    const double v = d1 / (d1 - d3);
    return {a + v * ab, Vec3(1 - v, v, 0), Region::EdgeAB};
  }

  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp);
  const double d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return {c, Vec3(0, 0, 1), Region::VertC};

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
    const double w = d2 / (d2 - d6);
    return {a + w * ac, Vec3(1 - w, 0, w), Region::EdgeCA};
  }

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return {b + w * (c - b), Vec3(0, 1 - w, w), Region::EdgeBC};
  }

  const double denom = 1.0 / (va + vb + vc);
  const double v = vb * denom;
  const double w = vc * denom;
  return {a + ab * v + ac * w, Vec3(1 - v - w, v, w), Region::Face};
}

double boxSquaredDistance(const Eigen::AlignedBox3d& box, const Vec3& p) {
  return box.squaredExteriorDistance(p);
}

double vertexAngle(const Vec3& at, const Vec3& u, const Vec3& v) {
  const Vec3 e1 = (u - at).normalized();
  const Vec3 e2 = (v - at).normalized();
  return std::atan2(e1.cross(e2).norm(), e1.dot(e2));
}

}  // namespace

MeshDistanceField::MeshDistanceField(const TriMesh& mesh, DistanceMode mode)
    : mode_(mode), vertices_(mesh.vertices), triangles_(mesh.triangles) {
  if (mesh.triangles.empty() || mesh.vertices.empty()) {
    throw std::invalid_argument("empty mesh");
  }
  const std::size_t nf = triangles_.size();
  faceNormals_.assign(nf, Vec3::Zero());
  std::vector<char> degenerate(nf, 0);
  for (std::size_t f = 0; f < nf; ++f) {
    const auto& t = triangles_[f];
    const Vec3 cross = (vertices_[t[1]] - vertices_[t[0]]).cross(vertices_[t[2]] - vertices_[t[0]]);
    const double len = cross.norm();
    if (0.5 * len < kDegenerateArea) {
      degenerate[f] = 1;
    } else {
      faceNormals_[f] = cross / len;
    }
  }

  if (mode_ == DistanceMode::VertexOnly) {
    vertexNormals_ = mesh.vertexNormals.size() == mesh.vertices.size()
                         ? mesh.vertexNormals
                         : computeVertexNormals(mesh);
    std::vector<Vec3> centroids(vertices_);
    std::vector<Eigen::AlignedBox3d> boxes;
    boxes.reserve(vertices_.size());
    for (const auto& v : vertices_) boxes.emplace_back(v, v);
    primitives_.resize(vertices_.size());
    std::iota(primitives_.begin(), primitives_.end(), 0);
    nodes_.reserve(2 * primitives_.size());
    build(0, static_cast<int>(primitives_.size()), centroids, boxes);
    return;
  }

  // Edge pseudo-normals: sum of the normals of every face sharing the edge.
  std::vector<std::pair<std::uint64_t, int>> halfEdges;
  halfEdges.reserve(3 * nf);
  for (std::size_t f = 0; f < nf; ++f) {
    if (degenerate[f]) continue;
    const auto& t = triangles_[f];
    for (int e = 0; e < 3; ++e) {
      const auto a = static_cast<std::uint64_t>(std::min(t[e], t[(e + 1) % 3]));
      const auto b = static_cast<std::uint64_t>(std::max(t[e], t[(e + 1) % 3]));
      halfEdges.emplace_back((a << 32) | b, static_cast<int>(3 * f + e));
    }
  }
  std::sort(halfEdges.begin(), halfEdges.end());
  edgeNormals_.resize(nf);
  for (std::size_t i = 0; i < halfEdges.size();) {
    std::size_t j = i;
    Vec3 sum = Vec3::Zero();
    for (; j < halfEdges.size() && halfEdges[j].first == halfEdges[i].first; ++j) {
      sum += faceNormals_[halfEdges[j].second / 3];
    }
    for (std::size_t k = i; k < j; ++k) edgeNormals_[halfEdges[k].second / 3][halfEdges[k].second % 3] = sum;
    i = j;
  }
  vertexPseudoNormals_.assign(vertices_.size(), Vec3::Zero());
  for (std::size_t f = 0; f < nf; ++f) {
    if (degenerate[f]) continue;
    const auto& t = triangles_[f];
    for (int k = 0; k < 3; ++k) {
      const Vec3& at = vertices_[t[k]];
      const double angle = vertexAngle(at, vertices_[t[(k + 1) % 3]], vertices_[t[(k + 2) % 3]]);
      vertexPseudoNormals_[t[k]] += angle * faceNormals_[f];
    }
  }

  std::vector<Vec3> centroids;
  std::vector<Eigen::AlignedBox3d> boxes;
  for (std::size_t f = 0; f < nf; ++f) {
    if (degenerate[f]) continue;
    const auto& t = triangles_[f];
    Eigen::AlignedBox3d box(vertices_[t[0]], vertices_[t[0]]);
    box.extend(vertices_[t[1]]);
    box.extend(vertices_[t[2]]);
    primitives_.push_back(static_cast<int>(f));
    centroids.push_back((vertices_[t[0]] + vertices_[t[1]] + vertices_[t[2]]) / 3.0);
    boxes.push_back(box);
  }
  if (primitives_.empty()) throw std::invalid_argument("empty mesh");
  // build() permutes primitives_ together with centroids/boxes, which are
  // indexed by position; keep a position index alongside.
  std::vector<int> order(primitives_.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<int> faces = primitives_;
  primitives_ = order;
  nodes_.reserve(2 * primitives_.size());
  build(0, static_cast<int>(primitives_.size()), centroids, boxes);
  for (int& p : primitives_) p = faces[p];
}

int MeshDistanceField::build(int first, int count, std::vector<Vec3>& centroids,
                             std::vector<Eigen::AlignedBox3d>& boxes) {
  Node node;
  node.box.setEmpty();
  Eigen::AlignedBox3d centroidBox;
  centroidBox.setEmpty();
  for (int i = first; i < first + count; ++i) {
    node.box.extend(boxes[primitives_[i]]);
    centroidBox.extend(centroids[primitives_[i]]);
  }
  const int index = static_cast<int>(nodes_.size());
  nodes_.push_back(node);
  constexpr int kLeafSize = 4;
  if (count <= kLeafSize) {
    nodes_[index].first = first;
    nodes_[index].count = count;
    return index;
  }
  int axis = 0;
  centroidBox.sizes().maxCoeff(&axis);
  const int mid = first + count / 2;
  std::nth_element(primitives_.begin() + first, primitives_.begin() + mid,
                   primitives_.begin() + first + count, [&](int a, int b) {
                     const double ca = centroids[a][axis];
                     const double cb = centroids[b][axis];
                     return ca < cb || (ca == cb && a < b);
                   });
  const int left = build(first, mid - first, centroids, boxes);
  const int right = build(mid, first + count - mid, centroids, boxes);
  nodes_[index].left = left;
  nodes_[index].right = right;
  return index;
}

SignedDistanceResult MeshDistanceField::query(const Vec3& point) const {
  return mode_ == DistanceMode::Surface ? queryTriangles(point) : queryVertices(point);
}

SignedDistanceResult MeshDistanceField::queryTriangles(const Vec3& point) const {
  double best = std::numeric_limits<double>::infinity();
  int bestFace = -1;
  ClosestOnTriangle bestHit{};

  int stack[64];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (boxSquaredDistance(node.box, point) > best) continue;
    if (node.left < 0) {
      for (int i = node.first; i < node.first + node.count; ++i) {
        const int f = primitives_[i];
        const auto& t = triangles_[f];
        const ClosestOnTriangle hit =
            closestPointOnTriangle(point, vertices_[t[0]], vertices_[t[1]], vertices_[t[2]]);
        const double d2 = (point - hit.point).squaredNorm();
        // Ties go to the lowest triangle index.
        if (d2 < best || (d2 == best && f < bestFace)) {
          best = d2;
          bestFace = f;
          bestHit = hit;
        }
      }
      continue;
    }
    const double dl = boxSquaredDistance(nodes_[node.left].box, point);
    const double dr = boxSquaredDistance(nodes_[node.right].box, point);
    // Push the farther child first so the nearer one is visited next.
    if (dl <= dr) {
      stack[top++] = node.right;
      stack[top++] = node.left;
    } else {
      stack[top++] = node.left;
      stack[top++] = node.right;
    }
  }

  const auto& t = triangles_[bestFace];
  Vec3 pseudo;
  switch (bestHit.region) {
    case Region::Face: pseudo = faceNormals_[bestFace]; break;
    case Region::EdgeAB: pseudo = edgeNormals_[bestFace][0]; break;
    case Region::EdgeBC: pseudo = edgeNormals_[bestFace][1]; break;
    case Region::EdgeCA: pseudo = edgeNormals_[bestFace][2]; break;
    case Region::VertA: pseudo = vertexPseudoNormals_[t[0]]; break;
    case Region::VertB: pseudo = vertexPseudoNormals_[t[1]]; break;
    case Region::VertC: pseudo = vertexPseudoNormals_[t[2]]; break;
  }

  SignedDistanceResult r;
  r.closestPoint = bestHit.point;
  r.closestTriangle = bestFace;
  r.support = t;
  r.weights = bestHit.bary;
  const Vec3 offset = point - bestHit.point;
  const double unsignedDistance = offset.norm();
  const double sign = offset.dot(pseudo) < 0.0 ? -1.0 : 1.0;
  r.distance = sign * unsignedDistance;
  if (unsignedDistance > 0.0) {
    r.gradient = sign * offset / unsignedDistance;
  } else {
    r.gradient = pseudo.normalized();
  }
  return r;
}

SignedDistanceResult MeshDistanceField::queryVertices(const Vec3& point) const {
  double best = std::numeric_limits<double>::infinity();
  int bestVertex = -1;
  int stack[64];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (boxSquaredDistance(node.box, point) > best) continue;
    if (node.left < 0) {
      for (int i = node.first; i < node.first + node.count; ++i) {
        const int v = primitives_[i];
        const double d2 = (point - vertices_[v]).squaredNorm();
        if (d2 < best || (d2 == best && v < bestVertex)) {
          best = d2;
          bestVertex = v;
        }
      }
      continue;
    }
    stack[top++] = node.right;
    stack[top++] = node.left;
  }
  SignedDistanceResult r;
  r.closestPoint = vertices_[bestVertex];
  r.support = {bestVertex, bestVertex, bestVertex};
  r.weights = Vec3(1, 0, 0);
  const Vec3 offset = point - r.closestPoint;
  const double unsignedDistance = offset.norm();
  const double sign = offset.dot(vertexNormals_[bestVertex]) < 0.0 ? -1.0 : 1.0;
  r.distance = sign * unsignedDistance;
  r.gradient = unsignedDistance > 0.0 ? Vec3(sign * offset / unsignedDistance)
                                      : vertexNormals_[bestVertex];
  return r;
}

SignedDistanceResult signedDistanceToMesh(const Vec3& point, const TriMesh& mesh) {
  if (!point.allFinite()) throw std::invalid_argument("non-finite query point");
  return MeshDistanceField(mesh).query(point);
}

std::vector<int> sampleIndices(int count, int population, std::mt19937_64& rng) {
  if (count < 1) throw std::invalid_argument("sample count must be >= 1");
  std::vector<int> all(population);
  std::iota(all.begin(), all.end(), 0);
  if (count >= population) return all;
  // Partial Fisher-Yates.
  for (int i = 0; i < count; ++i) {
    std::uniform_int_distribution<int> pick(i, population - 1);
    std::swap(all[i], all[pick(rng)]);
  }
  all.resize(count);
  std::sort(all.begin(), all.end());
  return all;
}

std::vector<int> sampleVertices(int count, const TriMesh& mesh, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return sampleIndices(count, static_cast<int>(mesh.vertexCount()), rng);
}

TriMesh parseObj(std::istream& in) {
  TriMesh mesh;
  std::string line;
  int lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    std::istringstream ss(line);
    std::string tag;
    if (!(ss >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      Vec3 v;
      if (!(ss >> v.x() >> v.y() >> v.z())) {
        throw std::runtime_error("obj line " + std::to_string(lineNo) + ": bad vertex");
      }
      mesh.vertices.push_back(v);
    } else if (tag == "f") {
      std::vector<int> ids;
      std::string tok;
      while (ss >> tok) {
        const int idx = std::stoi(tok.substr(0, tok.find('/')));
        if (idx < 1) {
          throw std::runtime_error("obj line " + std::to_string(lineNo) +
                                   ": only positive 1-based indices are supported");
        }
        ids.push_back(idx - 1);
      }
      if (ids.size() != 3) {
        throw std::runtime_error("obj line " + std::to_string(lineNo) +
                                 ": only triangular faces are supported");
      }
      mesh.triangles.push_back({ids[0], ids[1], ids[2]});
    }
  }
  mesh.validate();
  mesh.updateNormals();
  return mesh;
}

TriMesh readObj(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return parseObj(in);
}

void writeObj(std::ostream& out, const TriMesh& mesh) {
  out << std::setprecision(17);
  for (const auto& v : mesh.vertices) out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  for (const auto& t : mesh.triangles) {
    out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
  }
}

void writeObj(const std::string& path, const TriMesh& mesh) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  writeObj(out, mesh);
}

}  // namespace forcefit
