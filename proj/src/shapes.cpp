#include "forcefit/shapes.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

namespace forcefit {

TriMesh makeBox(const Vec3& center, const Vec3& halfExtents, const std::array<int, 3>& cells) {
  for (int n : cells) {
    if (n < 1) throw std::invalid_argument("box needs at least one cell per axis");
  }
  TriMesh mesh;
  std::map<std::array<int, 3>, int> index;
  auto vertex = [&](const std::array<int, 3>& l) {
    auto [it, fresh] = index.try_emplace(l, static_cast<int>(mesh.vertices.size()));
    if (fresh) {
      Vec3 p;
      for (int k = 0; k < 3; ++k) {
        p[k] = center[k] + halfExtents[k] * (2.0 * l[k] / cells[k] - 1.0);
      }
      mesh.vertices.push_back(p);
    }
    return it->second;
  };
  // Face with normal +/- axis `a`; (u, v) chosen so u x v points along +a.
  for (int a = 0; a < 3; ++a) {
    const int u = (a + 1) % 3;
    const int v = (a + 2) % 3;
    for (int side = 0; side < 2; ++side) {
      for (int i = 0; i < cells[u]; ++i) {
        for (int j = 0; j < cells[v]; ++j) {
          std::array<int, 3> l00{}, l10{}, l01{}, l11{};
          l00[a] = l10[a] = l01[a] = l11[a] = side * cells[a];
          l00[u] = i, l00[v] = j;
          l10[u] = i + 1, l10[v] = j;
          l01[u] = i, l01[v] = j + 1;
          l11[u] = i + 1, l11[v] = j + 1;
          const int q00 = vertex(l00), q10 = vertex(l10), q01 = vertex(l01), q11 = vertex(l11);
          if (side == 1) {
            mesh.triangles.push_back({q00, q10, q11});
            mesh.triangles.push_back({q00, q11, q01});
          } else {
            mesh.triangles.push_back({q00, q11, q10});
            mesh.triangles.push_back({q00, q01, q11});
          }
        }
      }
    }
  }
  mesh.updateNormals();
  return mesh;
}

TriMesh makeSphere(const Vec3& center, double radius, int slices, int stacks) {
  if (slices < 3 || stacks < 2) throw std::invalid_argument("sphere resolution too small");
  TriMesh mesh;
  mesh.vertices.push_back(center + Vec3(0, radius, 0));
  for (int i = 1; i < stacks; ++i) {
    const double theta = std::numbers::pi * i / stacks;
    for (int j = 0; j < slices; ++j) {
      const double phi = 2 * std::numbers::pi * j / slices;
      mesh.vertices.push_back(center + radius * Vec3(std::sin(theta) * std::cos(phi), std::cos(theta),
                                                     -std::sin(theta) * std::sin(phi)));
    }
  }
  const int bottom = static_cast<int>(mesh.vertices.size());
  mesh.vertices.push_back(center - Vec3(0, radius, 0));
  auto ring = [&](int i, int j) { return 1 + (i - 1) * slices + (j % slices); };
  for (int j = 0; j < slices; ++j) mesh.triangles.push_back({0, ring(1, j), ring(1, j + 1)});
  for (int i = 1; i + 1 < stacks; ++i) {
    for (int j = 0; j < slices; ++j) {
      mesh.triangles.push_back({ring(i, j), ring(i + 1, j), ring(i + 1, j + 1)});
      mesh.triangles.push_back({ring(i, j), ring(i + 1, j + 1), ring(i, j + 1)});
    }
  }
  for (int j = 0; j < slices; ++j) {
    mesh.triangles.push_back({bottom, ring(stacks - 1, j + 1), ring(stacks - 1, j)});
  }
  mesh.updateNormals();
  return mesh;
}

TriMesh makeCylinder(const Vec3& center, double radius, double halfHeight, int slices, int stacks) {
  if (slices < 3 || stacks < 1) throw std::invalid_argument("cylinder resolution too small");
  TriMesh mesh;
  for (int i = 0; i <= stacks; ++i) {
    const double y = halfHeight * (1.0 - 2.0 * i / stacks);
    for (int j = 0; j < slices; ++j) {
      const double phi = 2 * std::numbers::pi * j / slices;
      mesh.vertices.push_back(center + Vec3(radius * std::cos(phi), y, -radius * std::sin(phi)));
    }
  }
  auto ring = [&](int i, int j) { return i * slices + (j % slices); };
  for (int i = 0; i < stacks; ++i) {
    for (int j = 0; j < slices; ++j) {
      mesh.triangles.push_back({ring(i, j), ring(i + 1, j), ring(i + 1, j + 1)});
      mesh.triangles.push_back({ring(i, j), ring(i + 1, j + 1), ring(i, j + 1)});
    }
  }
  // Caps: a center vertex plus one inner ring keeps the cap normals clean.
  for (int cap = 0; cap < 2; ++cap) {
    const double y = cap == 0 ? halfHeight : -halfHeight;
    const int edge = cap == 0 ? 0 : stacks;
    const int innerStart = static_cast<int>(mesh.vertices.size());
    for (int j = 0; j < slices; ++j) {
      const double phi = 2 * std::numbers::pi * j / slices;
      mesh.vertices.push_back(center + Vec3(0.5 * radius * std::cos(phi), y, -0.5 * radius * std::sin(phi)));
    }
    const int mid = static_cast<int>(mesh.vertices.size());
    mesh.vertices.push_back(center + Vec3(0, y, 0));
    auto inner = [&](int j) { return innerStart + (j % slices); };
    for (int j = 0; j < slices; ++j) {
      if (cap == 0) {
        mesh.triangles.push_back({ring(edge, j), ring(edge, j + 1), inner(j + 1)});
        mesh.triangles.push_back({ring(edge, j), inner(j + 1), inner(j)});
        mesh.triangles.push_back({mid, inner(j), inner(j + 1)});
      } else {
        mesh.triangles.push_back({ring(edge, j), inner(j + 1), ring(edge, j + 1)});
        mesh.triangles.push_back({ring(edge, j), inner(j), inner(j + 1)});
        mesh.triangles.push_back({mid, inner(j + 1), inner(j)});
      }
    }
  }
  mesh.updateNormals();
  return mesh;
}

bool isBuiltinObject(const std::string& ref) { return ref.rfind("builtin:", 0) == 0; }

TriMesh builtinObject(const std::string& name) {
  const std::string shape = isBuiltinObject(name) ? name.substr(8) : name;
  if (shape == "sphere") return makeSphere(Vec3::Zero(), 0.035, 36, 28);
  if (shape == "box") return makeBox(Vec3::Zero(), Vec3(0.03, 0.04, 0.025), {14, 14, 14});
  if (shape == "cylinder") return makeCylinder(Vec3::Zero(), 0.03, 0.05, 40, 20);
  throw std::invalid_argument("unknown built-in object '" + name + "'");
}

}  // namespace forcefit
