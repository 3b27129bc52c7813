#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "dora/vec3.hpp"

namespace dora {

class MeshError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Area below which a face is considered degenerate and excluded from
// normal and dihedral computations.
inline constexpr double kDegenerateFaceArea = 1e-12;

struct TriangleMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<std::uint32_t, 3>> faces;  // CCW winding

    std::size_t vertex_count() const { return vertices.size(); }
    std::size_t face_count() const { return faces.size(); }
};

double face_area(const TriangleMesh& mesh, std::size_t face);
bool face_degenerate(const TriangleMesh& mesh, std::size_t face);

// Unit normal of a nondegenerate CCW face. Throws MeshError on a
// degenerate face.
Vec3 face_normal(const TriangleMesh& mesh, std::size_t face);

// All face normals; degenerate faces get a zero vector.
std::vector<Vec3> face_normals(const TriangleMesh& mesh);

double total_area(const TriangleMesh& mesh);

void bounding_box(const TriangleMesh& mesh, Vec3& lo, Vec3& hi);

// Uniformly rescale and translate so the bounding-box center sits at the
// origin and the longest axis spans exactly [-1, 1].
TriangleMesh normalize_to_unit_cube(const TriangleMesh& mesh);

// Undirected edge key, low vertex index first.
using EdgeKey = std::pair<std::uint32_t, std::uint32_t>;

inline EdgeKey make_edge_key(std::uint32_t a, std::uint32_t b) {
    return a < b ? EdgeKey{a, b} : EdgeKey{b, a};
}

struct EdgeAdjacency {
    // incident face indices, in ascending face order
    std::map<EdgeKey, std::vector<std::uint32_t>> edges;
    std::size_t edge_count() const { return edges.size(); }
};

EdgeAdjacency build_edge_adjacency(const TriangleMesh& mesh);

double edge_length(const TriangleMesh& mesh, const EdgeKey& e);

struct WatertightReport {
    std::size_t boundary_edges = 0;
    std::size_t non_manifold_edges = 0;
    bool is_watertight = false;
};

WatertightReport check_watertight(const EdgeAdjacency& adj);

// --- file I/O ---

// Formats: .obj (ASCII, quads fan-triangulated, negative indices allowed)
// and .ply (ASCII or binary_little_endian). Throws MeshError on parse
// failure, out-of-range indices, or zero faces.
TriangleMesh load_mesh(const std::string& path);
TriangleMesh load_obj(const std::string& path);
TriangleMesh load_ply(const std::string& path);

void save_obj(const TriangleMesh& mesh, const std::string& path);

}  // namespace dora
