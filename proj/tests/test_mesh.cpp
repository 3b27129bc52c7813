#include <cmath>
#include <sstream>

#include "doctest.h"
#include "dora/mesh.hpp"
#include "dora/shapes.hpp"
#include "temp_files.hpp"

using namespace dora;

namespace {

std::string cube_obj_quads() {
    return "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 1 1 0\n"
           "v 0 0 1\nv 1 0 1\nv 0 1 1\nv 1 1 1\n"
           "f 1 3 4 2\nf 5 6 8 7\nf 1 2 6 5\nf 3 7 8 4\nf 1 5 7 3\nf 2 4 8 6\n";
}

std::string icosahedron_ply_ascii() {
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    TriangleMesh ico = make_icosahedron();
    std::ostringstream out;
    out.precision(17);
    out << "ply\nformat ascii 1.0\nelement vertex 12\n"
           "property float x\nproperty float y\nproperty float z\n"
           "element face 20\nproperty list uchar int vertex_indices\nend_header\n";
    (void)t;
    for (const Vec3& v : ico.vertices) out << v.x << " " << v.y << " " << v.z << "\n";
    for (const auto& f : ico.faces) out << "3 " << f[0] << " " << f[1] << " " << f[2] << "\n";
    return out.str();
}

}  // namespace

TEST_CASE("load_obj cube") {
    auto path = testutil::write_file("cube.obj", cube_obj_quads());
    TriangleMesh mesh = load_obj(path);
    CHECK(mesh.vertex_count() == 8);
    CHECK(mesh.face_count() == 12);  // 6 quads fan-triangulated
}

TEST_CASE("load_obj negative indices") {
    auto path = testutil::write_file("tri_neg.obj", "v 0 0 0\nv 1 0 0\nv 0 1 0\nf -3 -2 -1\n");
    TriangleMesh mesh = load_obj(path);
    CHECK(mesh.face_count() == 1);
    CHECK(mesh.faces[0] == std::array<std::uint32_t, 3>{0, 1, 2});
}

TEST_CASE("load_obj out-of-range index") {
    auto path = testutil::write_file("bad_index.obj", cube_obj_quads() + "f 1 2 9\nf 1 2 10\n");
    CHECK_THROWS_AS(load_obj(path), MeshError);
}

TEST_CASE("load_obj zero faces") {
    auto path = testutil::write_file("no_faces.obj", "v 0 0 0\nv 1 0 0\nv 0 1 0\n");
    CHECK_THROWS_AS(load_obj(path), MeshError);
}

TEST_CASE("load_obj repeated vertex in face") {
    auto path = testutil::write_file("repeat.obj", "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 1 2\n");
    CHECK_THROWS_AS(load_obj(path), MeshError);
}

TEST_CASE("load_ply icosahedron ascii") {
    auto path = testutil::write_file("ico.ply", icosahedron_ply_ascii());
    TriangleMesh mesh = load_ply(path);
    CHECK(mesh.vertex_count() == 12);
    CHECK(mesh.face_count() == 20);
}

TEST_CASE("load_ply binary little endian") {
    TriangleMesh cube = make_cube();
    std::ostringstream out;
    out << "ply\nformat binary_little_endian 1.0\nelement vertex 8\n"
           "property float x\nproperty float y\nproperty float z\n"
           "element face 12\nproperty list uchar int vertex_indices\nend_header\n";
    for (const Vec3& v : cube.vertices) {
        float f[3] = {static_cast<float>(v.x), static_cast<float>(v.y), static_cast<float>(v.z)};
        out.write(reinterpret_cast<const char*>(f), sizeof(f));
    }
    for (const auto& face : cube.faces) {
        std::uint8_t n = 3;
        out.write(reinterpret_cast<const char*>(&n), 1);
        std::int32_t idx[3] = {static_cast<std::int32_t>(face[0]),
                               static_cast<std::int32_t>(face[1]),
                               static_cast<std::int32_t>(face[2])};
        out.write(reinterpret_cast<const char*>(idx), sizeof(idx));
    }
    auto path = testutil::write_file("cube_bin.ply", out.str());
    TriangleMesh mesh = load_ply(path);
    CHECK(mesh.vertex_count() == 8);
    CHECK(mesh.face_count() == 12);
    CHECK(mesh.vertices[7] == Vec3{1, 1, 1});
}

TEST_CASE("save_obj round trip") {
    TriangleMesh ico = make_icosahedron();
    auto path = (testutil::scratch_dir() / "ico_rt.obj").string();
    save_obj(ico, path);
    TriangleMesh back = load_obj(path);
    REQUIRE(back.vertex_count() == ico.vertex_count());
    REQUIRE(back.face_count() == ico.face_count());
    for (std::size_t i = 0; i < ico.vertex_count(); ++i)
        CHECK(norm(back.vertices[i] - ico.vertices[i]) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("normalize_to_unit_cube basic") {
    TriangleMesh mesh = make_box({0, 0, 0}, {10, 10, 10});
    TriangleMesh out = normalize_to_unit_cube(mesh);
    Vec3 lo, hi;
    bounding_box(out, lo, hi);
    CHECK(norm(lo - Vec3{-1, -1, -1}) < 1e-12);
    CHECK(norm(hi - Vec3{1, 1, 1}) < 1e-12);
}

TEST_CASE("normalize_to_unit_cube anisotropic box") {
    TriangleMesh mesh = make_box({5, 7, -2}, {9, 9, -1});  // extents 4 x 2 x 1
    TriangleMesh out = normalize_to_unit_cube(mesh);
    Vec3 lo, hi;
    bounding_box(out, lo, hi);
    Vec3 extent = hi - lo;
    CHECK(extent.x == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(extent.y == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(extent.z == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(norm((lo + hi) * 0.5) < 1e-12);
}

TEST_CASE("normalize_to_unit_cube idempotent") {
    TriangleMesh once = normalize_to_unit_cube(make_icosahedron());
    TriangleMesh twice = normalize_to_unit_cube(once);
    for (std::size_t i = 0; i < once.vertex_count(); ++i)
        CHECK(norm(once.vertices[i] - twice.vertices[i]) < 1e-12);
}

TEST_CASE("normalize_to_unit_cube degenerate") {
    TriangleMesh mesh;
    mesh.vertices = {{1, 1, 1}, {1, 1, 1}, {1, 1, 1}};
    mesh.faces = {{0, 1, 2}};
    CHECK_THROWS_AS(normalize_to_unit_cube(mesh), MeshError);
}

TEST_CASE("face_normal right-hand rule") {
    TriangleMesh mesh;
    mesh.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
    mesh.faces = {{0, 1, 2}};
    CHECK(norm(face_normal(mesh, 0) - Vec3{0, 0, 1}) < 1e-15);

    mesh.faces = {{0, 2, 1}};
    CHECK(norm(face_normal(mesh, 0) - Vec3{0, 0, -1}) < 1e-15);
}

TEST_CASE("face_normal skewed triangle") {
    TriangleMesh mesh;
    mesh.vertices = {{0, 0, 0}, {1, 0, 0}, {1, 1, 1}};
    mesh.faces = {{0, 1, 2}};
    Vec3 expected = normalized(Vec3{0, -1, 1});
    CHECK(norm(face_normal(mesh, 0) - expected) < 1e-15);
}

TEST_CASE("face_normal degenerate face flagged") {
    TriangleMesh mesh;
    mesh.vertices = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
    mesh.faces = {{0, 1, 2}};
    CHECK(face_degenerate(mesh, 0));
    CHECK_THROWS_AS(face_normal(mesh, 0), MeshError);
    CHECK(face_normals(mesh)[0] == Vec3{0, 0, 0});
}

TEST_CASE("face normals invariant under similarity transform") {
    TriangleMesh mesh = make_icosahedron();
    TriangleMesh moved = mesh;
    for (Vec3& v : moved.vertices) v = v * 3.7 + Vec3{10, -4, 2};
    for (std::size_t i = 0; i < mesh.face_count(); ++i)
        CHECK(norm(face_normal(mesh, i) - face_normal(moved, i)) < 1e-12);
}

TEST_CASE("edge adjacency small fixtures") {
    TriangleMesh tri;
    tri.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
    tri.faces = {{0, 1, 2}};
    EdgeAdjacency adj = build_edge_adjacency(tri);
    CHECK(adj.edge_count() == 3);
    for (const auto& [key, faces] : adj.edges) CHECK(faces.size() == 1);

    TriangleMesh two = tri;
    two.vertices.push_back({1, 1, 0});
    two.faces.push_back({1, 3, 2});
    adj = build_edge_adjacency(two);
    CHECK(adj.edge_count() == 5);
    CHECK(adj.edges.at(make_edge_key(1, 2)).size() == 2);
}

TEST_CASE("edge adjacency cube satisfies Euler count") {
    EdgeAdjacency adj = build_edge_adjacency(make_cube());
    CHECK(adj.edge_count() == 18);  // V - E + F = 2 with V=8, F=12
    for (const auto& [key, faces] : adj.edges) CHECK(faces.size() == 2);
}

TEST_CASE("half-edge count equals 3F") {
    for (const TriangleMesh& mesh :
         {make_cube(), make_icosahedron(), make_uv_sphere(8, 5), make_plane_grid(3)}) {
        EdgeAdjacency adj = build_edge_adjacency(mesh);
        std::size_t halfedges = 0;
        for (const auto& [key, faces] : adj.edges) halfedges += faces.size();
        CHECK(halfedges == 3 * mesh.face_count());
    }
}

TEST_CASE("watertight cube and open fixtures") {
    TriangleMesh cube = make_cube();
    WatertightReport report = check_watertight(build_edge_adjacency(cube));
    CHECK(report.is_watertight);
    CHECK(report.boundary_edges == 0);
    CHECK(report.non_manifold_edges == 0);

    TriangleMesh tri;
    tri.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
    tri.faces = {{0, 1, 2}};
    report = check_watertight(build_edge_adjacency(tri));
    CHECK_FALSE(report.is_watertight);
    CHECK(report.boundary_edges == 3);
}

TEST_CASE("deleting any cube face breaks watertightness") {
    TriangleMesh cube = make_cube();
    for (std::size_t drop = 0; drop < cube.face_count(); ++drop) {
        TriangleMesh open = cube;
        open.faces.erase(open.faces.begin() + static_cast<long>(drop));
        WatertightReport report = check_watertight(build_edge_adjacency(open));
        CHECK_FALSE(report.is_watertight);
        CHECK(report.boundary_edges == 3);
        CHECK(report.non_manifold_edges == 0);
    }
}

TEST_CASE("non-manifold edge detected") {
    TriangleMesh mesh;
    mesh.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}};
    mesh.faces = {{0, 1, 2}, {1, 0, 3}, {0, 1, 4}};  // edge (0,1) borders 3 faces
    WatertightReport report = check_watertight(build_edge_adjacency(mesh));
    CHECK(report.non_manifold_edges == 1);
    CHECK_FALSE(report.is_watertight);
}
