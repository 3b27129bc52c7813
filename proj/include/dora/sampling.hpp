#pragma once

#include <cstdint>
#include <vector>

#include "dora/mesh.hpp"
#include "dora/pointcloud.hpp"

namespace dora {

// Defaults from the sampling configuration: dihedral threshold in degrees,
// total point budget, and the salient-point target.
inline constexpr double kDefaultTauDeg = 30.0;
inline constexpr std::size_t kDefaultTotalPoints = 32768;
inline constexpr std::size_t kDefaultDesiredSalient = 16384;

struct SalientEdge {
    EdgeKey key;
    double angle_deg;
    std::uint32_t face1, face2;
};

struct SalientEdgeSet {
    std::vector<SalientEdge> edges;  // ascending edge-key order
    double tau_deg = kDefaultTauDeg;
    std::size_t mesh_vertex_count = 0;  // guards against mixing meshes

    std::size_t count() const { return edges.size(); }  // N_Gamma
};

// Dihedral angle in degrees between the normals of the two faces sharing
// an edge; requires exactly two nondegenerate incident faces.
double dihedral_angle_deg(const Vec3& n1, const Vec3& n2);

// Edges whose dihedral angle exceeds tau (strict). Non-manifold and
// boundary edges are skipped, as are edges touching a degenerate face.
SalientEdgeSet detect_salient_edges(const TriangleMesh& mesh, const EdgeAdjacency& adj,
                                    double tau_deg);
SalientEdgeSet detect_salient_edges(const TriangleMesh& mesh, double tau_deg = kDefaultTauDeg);

// Greedy farthest-point selection. Starts at index (seed mod n); each
// subsequent pick maximizes distance to the selected set, ties broken by
// lowest index. Returns k distinct indices in selection order.
std::vector<std::size_t> fps(const std::vector<Vec3>& points, std::size_t k, std::uint64_t seed);

// Area-weighted surface sampling with barycentric placement; exactly n
// points, label=uniform. blue_noise oversamples 4x and greedily eliminates
// the point with the nearest surviving neighbor down to n.
SurfacePointCloud sample_uniform(const TriangleMesh& mesh, std::size_t n, std::uint64_t seed,
                                 bool blue_noise = false);

// Salient point set P_a from the salient vertex set and edge interpolation.
// Produces exactly n_desired points unless the edge set is empty.
SurfacePointCloud sample_salient(const TriangleMesh& mesh, const SalientEdgeSet& set,
                                 std::size_t n_desired, std::uint64_t seed);

// Full pipeline: P_a from salient sampling, P_u uniform fill to n_total.
SurfacePointCloud ses_sample(const TriangleMesh& mesh, std::size_t n_total = kDefaultTotalPoints,
                             std::size_t n_desired = kDefaultDesiredSalient,
                             double tau_deg = kDefaultTauDeg, std::uint64_t seed = 0,
                             bool blue_noise = false);

}  // namespace dora
