#pragma once

#include "forcefit/geometry.hpp"

#include <array>
#include <string>

namespace forcefit {

/// Closed box surface with a regular lattice of (n_x, n_y, n_z) cells per
/// axis. Outward winding.
TriMesh makeBox(const Vec3& center, const Vec3& halfExtents, const std::array<int, 3>& cells);

/// UV sphere with `slices` around the y axis and `stacks` from pole to pole.
TriMesh makeSphere(const Vec3& center, double radius, int slices, int stacks);

/// Capped cylinder along y with `slices` around and `stacks` along its height.
TriMesh makeCylinder(const Vec3& center, double radius, double halfHeight, int slices, int stacks);

/// Object meshes of roughly a thousand vertices centered at the origin,
/// addressed as "builtin:sphere", "builtin:box" and "builtin:cylinder".
TriMesh builtinObject(const std::string& name);
bool isBuiltinObject(const std::string& ref);

}  // namespace forcefit
