#include <cmath>

#include "dora/shapes.hpp"

namespace dora {

TriangleMesh make_box(const Vec3& lo, const Vec3& hi) {
    TriangleMesh mesh;
    for (int i = 0; i < 8; ++i)
        mesh.vertices.push_back({i & 1 ? hi.x : lo.x, i & 2 ? hi.y : lo.y, i & 4 ? hi.z : lo.z});
    // quads in CCW order viewed from outside
    const std::uint32_t quads[6][4] = {
        {0, 2, 3, 1},  // -z
        {4, 5, 7, 6},  // +z
        {0, 1, 5, 4},  // -y
        {2, 6, 7, 3},  // +y
        {0, 4, 6, 2},  // -x
        {1, 3, 7, 5},  // +x
    };
    for (const auto& q : quads) {
        mesh.faces.push_back({q[0], q[1], q[2]});
        mesh.faces.push_back({q[0], q[2], q[3]});
    }
    return mesh;
}

TriangleMesh make_cube() { return make_box({-1, -1, -1}, {1, 1, 1}); }

TriangleMesh make_icosahedron() {
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    TriangleMesh mesh;
    mesh.vertices = {{-1, t, 0}, {1, t, 0},   {-1, -t, 0}, {1, -t, 0}, {0, -1, t},  {0, 1, t},
                     {0, -1, -t}, {0, 1, -t}, {t, 0, -1},  {t, 0, 1},  {-t, 0, -1}, {-t, 0, 1}};
    mesh.faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                  {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                  {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                  {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
    return mesh;
}

TriangleMesh make_uv_sphere(int segments, int rings, double radius) {
    TriangleMesh mesh;
    const double pi = 3.14159265358979323846;
    std::uint32_t north = 0, south = 1;
    mesh.vertices.push_back({0, 0, radius});
    mesh.vertices.push_back({0, 0, -radius});
    auto ring_vertex = [&](int i, int j) {
        return 2u + static_cast<std::uint32_t>((i - 1) * segments + (j % segments));
    };
    for (int i = 1; i < rings; ++i) {
        double phi = pi * i / rings;
        for (int j = 0; j < segments; ++j) {
            double theta = 2.0 * pi * j / segments;
            mesh.vertices.push_back({radius * std::sin(phi) * std::cos(theta),
                                     radius * std::sin(phi) * std::sin(theta),
                                     radius * std::cos(phi)});
        }
    }
    for (int j = 0; j < segments; ++j) {
        mesh.faces.push_back({north, ring_vertex(1, j), ring_vertex(1, j + 1)});
        mesh.faces.push_back({south, ring_vertex(rings - 1, j + 1), ring_vertex(rings - 1, j)});
    }
    for (int i = 1; i + 1 < rings; ++i) {
        for (int j = 0; j < segments; ++j) {
            std::uint32_t u0 = ring_vertex(i, j), u1 = ring_vertex(i, j + 1);
            std::uint32_t l0 = ring_vertex(i + 1, j), l1 = ring_vertex(i + 1, j + 1);
            mesh.faces.push_back({u0, l0, l1});
            mesh.faces.push_back({u0, l1, u1});
        }
    }
    return mesh;
}

TriangleMesh make_plane_grid(int cells, double half) {
    TriangleMesh mesh;
    int n = cells + 1;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            mesh.vertices.push_back(
                {-half + 2.0 * half * i / cells, -half + 2.0 * half * j / cells, 0.0});
    auto v = [&](int i, int j) { return static_cast<std::uint32_t>(j * n + i); };
    for (int j = 0; j < cells; ++j)
        for (int i = 0; i < cells; ++i) {
            mesh.faces.push_back({v(i, j), v(i + 1, j), v(i + 1, j + 1)});
            mesh.faces.push_back({v(i, j), v(i + 1, j + 1), v(i, j + 1)});
        }
    return mesh;
}

TriangleMesh merge_meshes(const TriangleMesh& a, const TriangleMesh& b) {
    TriangleMesh out = a;
    auto offset = static_cast<std::uint32_t>(a.vertices.size());
    out.vertices.insert(out.vertices.end(), b.vertices.begin(), b.vertices.end());
    for (const auto& f : b.faces)
        out.faces.push_back({f[0] + offset, f[1] + offset, f[2] + offset});
    return out;
}

ProceduralShape make_sphere_shape(double radius, int segments, int rings) {
    ProceduralShape shape;
    shape.name = "sphere";
    shape.mesh = make_uv_sphere(segments, rings, radius);
    shape.inside = [radius](const Vec3& p) { return norm2(p) <= radius * radius; };
    return shape;
}

namespace {

bool point_in_box(const Vec3& p, const Vec3& lo, const Vec3& hi) {
    return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y && p.z >= lo.z && p.z <= hi.z;
}

}  // namespace

ProceduralShape make_box_shape(const Vec3& lo, const Vec3& hi) {
    ProceduralShape shape;
    shape.name = "box";
    shape.mesh = make_box(lo, hi);
    shape.inside = [lo, hi](const Vec3& p) { return point_in_box(p, lo, hi); };
    return shape;
}

ProceduralShape make_bump_grid_shape(int k, double fill, double bump_height) {
    Vec3 base_lo{-0.9, -0.9, -0.9};
    Vec3 base_hi{0.9, 0.9, 0.0};

    std::vector<std::pair<Vec3, Vec3>> boxes;
    boxes.emplace_back(base_lo, base_hi);

    double cell = 1.8 / k;
    double side = cell * fill;
    for (int j = 0; j < k; ++j)
        for (int i = 0; i < k; ++i) {
            double cx = base_lo.x + cell * (i + 0.5);
            double cy = base_lo.y + cell * (j + 0.5);
            boxes.emplace_back(Vec3{cx - side / 2, cy - side / 2, base_hi.z},
                               Vec3{cx + side / 2, cy + side / 2, base_hi.z + bump_height});
        }

    ProceduralShape shape;
    shape.name = "bump_grid_" + std::to_string(k);
    shape.mesh = make_box(boxes[0].first, boxes[0].second);
    for (std::size_t b = 1; b < boxes.size(); ++b)
        shape.mesh = merge_meshes(shape.mesh, make_box(boxes[b].first, boxes[b].second));
    shape.inside = [boxes](const Vec3& p) {
        for (const auto& [lo, hi] : boxes)
            if (point_in_box(p, lo, hi)) return true;
        return false;
    };
    return shape;
}

std::vector<ProceduralShape> make_bump_grid_dataset(std::size_t count) {
    std::vector<ProceduralShape> shapes;
    const int grids[] = {2, 3, 4, 5};
    const double fills[] = {0.4, 0.55};
    for (std::size_t i = 0; i < count; ++i) {
        int k = grids[i % 4];
        double fill = fills[(i / 4) % 2];
        double height = 0.3 + 0.05 * static_cast<double>(i % 3);
        ProceduralShape s = make_bump_grid_shape(k, fill, height);
        s.name += "_" + std::to_string(i);
        shapes.push_back(std::move(s));
    }
    return shapes;
}

}  // namespace dora
