#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "dora/mesh.hpp"

namespace dora {

// Inside/outside test over [-1,1]^3.
using OccupancyFn = std::function<bool(const Vec3&)>;

// Ray-parity occupancy for a watertight mesh: casts a fixed-direction ray and
// counts triangle crossings. Throws MeshError if the mesh is not watertight.
OccupancyFn mesh_occupancy(const TriangleMesh& mesh);

struct OccupancyBatch {
    std::vector<Vec3> queries;   // clamped to [-1,1]^3
    std::vector<double> labels;  // 0 or 1
};

inline constexpr double kDefaultQuerySigma = 0.02;

// Near-surface queries (surface samples pushed along the normal by Gaussian
// offsets of scale sigma) plus uniform queries in [-1,1]^3, labeled by the
// oracle. When no oracle is given the mesh must be watertight and ray parity
// is used.
OccupancyBatch sample_queries(const TriangleMesh& mesh, std::size_t n_near,
                              std::size_t n_uniform, double sigma, std::uint64_t seed,
                              const OccupancyFn& oracle = nullptr);

}  // namespace dora
