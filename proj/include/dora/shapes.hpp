#pragma once

#include <functional>
#include <string>
#include <vector>

#include "dora/mesh.hpp"

namespace dora {

// Axis-aligned box as 12 CCW triangles with outward normals.
TriangleMesh make_box(const Vec3& lo, const Vec3& hi);

// Cube spanning [-1, 1]^3.
TriangleMesh make_cube();

// Regular icosahedron (12 vertices, 20 faces), circumscribed radius ~1.9.
TriangleMesh make_icosahedron();

// UV sphere centered at the origin.
TriangleMesh make_uv_sphere(int segments = 32, int rings = 16, double radius = 1.0);

// Flat n x n cell grid on z = 0 spanning [-half, half]^2.
TriangleMesh make_plane_grid(int cells = 4, double half = 1.0);

// Concatenate two triangle soups.
TriangleMesh merge_meshes(const TriangleMesh& a, const TriangleMesh& b);

// A mesh paired with its exact analytic occupancy test.
struct ProceduralShape {
    std::string name;
    TriangleMesh mesh;
    std::function<bool(const Vec3&)> inside;
};

ProceduralShape make_sphere_shape(double radius = 0.8, int segments = 48, int rings = 24);
ProceduralShape make_box_shape(const Vec3& lo, const Vec3& hi);

// Base slab with a k x k grid of raised square bumps on its top face.
// fill is the fraction of each grid cell the bump covers.
ProceduralShape make_bump_grid_shape(int k, double fill = 0.5, double bump_height = 0.35);

// The toy training corpus: bump-grid slabs of varying grid density.
std::vector<ProceduralShape> make_bump_grid_dataset(std::size_t count = 8);

}  // namespace dora
