#include "dora/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dora {

double face_area(const TriangleMesh& mesh, std::size_t face) {
    const auto& f = mesh.faces[face];
    Vec3 a = mesh.vertices[f[0]];
    Vec3 b = mesh.vertices[f[1]];
    Vec3 c = mesh.vertices[f[2]];
    return 0.5 * norm(cross(b - a, c - a));
}

bool face_degenerate(const TriangleMesh& mesh, std::size_t face) {
    return face_area(mesh, face) < kDegenerateFaceArea;
}

Vec3 face_normal(const TriangleMesh& mesh, std::size_t face) {
    const auto& f = mesh.faces[face];
    Vec3 a = mesh.vertices[f[0]];
    Vec3 b = mesh.vertices[f[1]];
    Vec3 c = mesh.vertices[f[2]];
    Vec3 n = cross(b - a, c - a);
    double len = norm(n);
    if (0.5 * len < kDegenerateFaceArea)
        throw MeshError("face_normal: degenerate face " + std::to_string(face));
    return n / len;
}

std::vector<Vec3> face_normals(const TriangleMesh& mesh) {
    std::vector<Vec3> normals(mesh.face_count());
    for (std::size_t i = 0; i < mesh.face_count(); ++i) {
        if (face_degenerate(mesh, i))
            normals[i] = Vec3{0.0, 0.0, 0.0};
        else
            normals[i] = face_normal(mesh, i);
    }
    return normals;
}

double total_area(const TriangleMesh& mesh) {
    double sum = 0.0;
    for (std::size_t i = 0; i < mesh.face_count(); ++i) sum += face_area(mesh, i);
    return sum;
}

void bounding_box(const TriangleMesh& mesh, Vec3& lo, Vec3& hi) {
    if (mesh.vertices.empty()) throw MeshError("bounding_box: empty mesh");
    lo = hi = mesh.vertices[0];
    for (const Vec3& v : mesh.vertices) {
        lo = min3(lo, v);
        hi = max3(hi, v);
    }
}

TriangleMesh normalize_to_unit_cube(const TriangleMesh& mesh) {
    Vec3 lo, hi;
    bounding_box(mesh, lo, hi);
    Vec3 extent = hi - lo;
    double max_extent = std::max({extent.x, extent.y, extent.z});
    if (max_extent <= 0.0) throw MeshError("normalize_to_unit_cube: degenerate mesh extent");
    Vec3 center = (lo + hi) * 0.5;
    double scale = 2.0 / max_extent;
    TriangleMesh out;
    out.faces = mesh.faces;
    out.vertices.reserve(mesh.vertices.size());
    for (const Vec3& v : mesh.vertices) out.vertices.push_back((v - center) * scale);
    return out;
}

EdgeAdjacency build_edge_adjacency(const TriangleMesh& mesh) {
    EdgeAdjacency adj;
    for (std::uint32_t fi = 0; fi < mesh.face_count(); ++fi) {
        const auto& f = mesh.faces[fi];
        for (int k = 0; k < 3; ++k) {
            EdgeKey key = make_edge_key(f[k], f[(k + 1) % 3]);
            adj.edges[key].push_back(fi);
        }
    }
    // faces arrive in ascending fi order already; keep the invariant explicit
    for (auto& [key, faces] : adj.edges) std::sort(faces.begin(), faces.end());
    return adj;
}

double edge_length(const TriangleMesh& mesh, const EdgeKey& e) {
    return norm(mesh.vertices[e.second] - mesh.vertices[e.first]);
}

WatertightReport check_watertight(const EdgeAdjacency& adj) {
    WatertightReport report;
    for (const auto& [key, faces] : adj.edges) {
        if (faces.size() == 1) ++report.boundary_edges;
        else if (faces.size() > 2) ++report.non_manifold_edges;
    }
    report.is_watertight = report.boundary_edges == 0 && report.non_manifold_edges == 0;
    return report;
}

}  // namespace dora
