#include "dora/occupancy.hpp"

#include <algorithm>
#include <cmath>

#include "dora/rng.hpp"
#include "dora/sampling.hpp"

namespace dora {

namespace {

// Fixed oblique ray direction, unlikely to graze edges or vertices exactly.
const Vec3 kRayDirection = normalized({0.5377397, 0.3531823, 0.7632912});

// Moller-Trumbore; returns true for a crossing at t > eps.
bool ray_hits_triangle(const Vec3& origin, const Vec3& dir, const Vec3& a, const Vec3& b,
                       const Vec3& c) {
    constexpr double eps = 1e-12;
    Vec3 e1 = b - a;
    Vec3 e2 = c - a;
    Vec3 p = cross(dir, e2);
    double det = dot(e1, p);
    if (std::abs(det) < eps) return false;
    double inv = 1.0 / det;
    Vec3 t = origin - a;
    double u = dot(t, p) * inv;
    if (u < 0.0 || u > 1.0) return false;
    Vec3 q = cross(t, e1);
    double v = dot(dir, q) * inv;
    if (v < 0.0 || u + v > 1.0) return false;
    double dist = dot(e2, q) * inv;
    return dist > eps;
}

}  // namespace

OccupancyFn mesh_occupancy(const TriangleMesh& mesh) {
    WatertightReport report = check_watertight(build_edge_adjacency(mesh));
    if (!report.is_watertight)
        throw MeshError("mesh_occupancy: mesh is not watertight");
    TriangleMesh copy = mesh;
    return [copy](const Vec3& q) {
        std::size_t crossings = 0;
        for (const auto& f : copy.faces) {
            if (ray_hits_triangle(q, kRayDirection, copy.vertices[f[0]], copy.vertices[f[1]],
                                  copy.vertices[f[2]]))
                ++crossings;
        }
        return (crossings % 2) == 1;
    };
}

OccupancyBatch sample_queries(const TriangleMesh& mesh, std::size_t n_near,
                              std::size_t n_uniform, double sigma, std::uint64_t seed,
                              const OccupancyFn& oracle) {
    OccupancyFn inside = oracle ? oracle : mesh_occupancy(mesh);
    OccupancyBatch batch;
    batch.queries.reserve(n_near + n_uniform);

    if (n_near > 0) {
        SurfacePointCloud surface = sample_uniform(mesh, n_near, seed);
        Rng rng(seed ^ 0xa24baed4963ee407ull);
        for (std::size_t i = 0; i < surface.positions.size(); ++i) {
            Vec3 q = surface.positions[i] + surface.normals[i] * (rng.normal() * sigma);
            q.x = std::clamp(q.x, -1.0, 1.0);
            q.y = std::clamp(q.y, -1.0, 1.0);
            q.z = std::clamp(q.z, -1.0, 1.0);
            batch.queries.push_back(q);
        }
    }
    Rng rng(seed ^ 0x6a09e667f3bcc909ull);
    for (std::size_t i = 0; i < n_uniform; ++i)
        batch.queries.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)});

    batch.labels.reserve(batch.queries.size());
    for (const Vec3& q : batch.queries) batch.labels.push_back(inside(q) ? 1.0 : 0.0);
    return batch;
}

}  // namespace dora
