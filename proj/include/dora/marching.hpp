#pragma once

#include <functional>

#include "dora/mesh.hpp"

namespace dora {

// Batched scalar field over [-1,1]^3 (occupancy-style, values in [0,1]).
using ScalarField = std::function<std::vector<double>(const std::vector<Vec3>&)>;

// Marching cubes over a regular grid_res^3 cell grid spanning [-1,1]^3 with
// vertices linearly interpolated to the iso crossing on cut cell edges.
// Faces wind so normals point toward the
// low side of the field (outward for inside>iso occupancy). Throws
// std::invalid_argument for grid_res < 16 and std::runtime_error when the
// field never crosses the iso level.
TriangleMesh extract_mesh(const ScalarField& field, int grid_res, double iso = 0.5);

}  // namespace dora
