#include "dora/marching.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>

namespace dora {

namespace {

// Cube corners indexed bx + 2*by + 4*bz. Faces listed counter-clockwise as
// seen from outside the cell, so the cut segments chain into consistently
// oriented loops shared exactly with neighboring cells.
constexpr int kFaces[6][4] = {
    {0, 4, 6, 2},  // -x
    {1, 3, 7, 5},  // +x
    {0, 1, 5, 4},  // -y
    {2, 6, 7, 3},  // +y
    {0, 2, 3, 1},  // -z
    {4, 5, 7, 6},  // +z
};

constexpr int kEdges[12][2] = {{0, 1}, {2, 3}, {4, 5}, {6, 7}, {0, 2}, {1, 3},
                               {4, 6}, {5, 7}, {0, 4}, {1, 5}, {2, 6}, {3, 7}};

struct EdgeLookup {
    int of[8][8];
    EdgeLookup() {
        for (auto& row : of)
            for (int& v : row) v = -1;
        for (int e = 0; e < 12; ++e) {
            of[kEdges[e][0]][kEdges[e][1]] = e;
            of[kEdges[e][1]][kEdges[e][0]] = e;
        }
    }
};

const EdgeLookup kEdgeLookup;

}  // namespace

TriangleMesh extract_mesh(const ScalarField& field, int grid_res, double iso) {
    if (grid_res < 16) throw std::invalid_argument("extract_mesh: grid_res must be >= 16");
    const int points_per_axis = grid_res + 1;
    const std::uint64_t point_count =
        static_cast<std::uint64_t>(points_per_axis) * points_per_axis * points_per_axis;

    std::vector<Vec3> grid_points;
    grid_points.reserve(point_count);
    for (int z = 0; z < points_per_axis; ++z)
        for (int y = 0; y < points_per_axis; ++y)
            for (int x = 0; x < points_per_axis; ++x)
                grid_points.push_back({-1.0 + 2.0 * x / grid_res, -1.0 + 2.0 * y / grid_res,
                                       -1.0 + 2.0 * z / grid_res});
    std::vector<double> values = field(grid_points);
    if (values.size() != grid_points.size())
        throw std::runtime_error("extract_mesh: field returned wrong count");

    auto point_id = [&](int x, int y, int z) {
        return static_cast<std::uint64_t>(x) +
               static_cast<std::uint64_t>(points_per_axis) *
                   (static_cast<std::uint64_t>(y) +
                    static_cast<std::uint64_t>(points_per_axis) * z);
    };

    TriangleMesh mesh;
    std::unordered_map<std::uint64_t, std::uint32_t> vertex_of_edge;

    // global vertex where the field crosses iso on the grid edge (a, b),
    // linearly interpolated; a binary field degenerates to the midpoint
    auto crossing_vertex = [&](std::uint64_t a, std::uint64_t b) {
        if (a > b) std::swap(a, b);
        std::uint64_t key = a * point_count + b;
        auto it = vertex_of_edge.find(key);
        if (it != vertex_of_edge.end()) return it->second;
        double va = values[a], vb = values[b];
        double t = va == vb ? 0.5 : (iso - va) / (vb - va);
        t = std::clamp(t, 0.0, 1.0);
        Vec3 v = grid_points[a] + t * (grid_points[b] - grid_points[a]);
        std::uint32_t id = static_cast<std::uint32_t>(mesh.vertices.size());
        mesh.vertices.push_back(v);
        vertex_of_edge.emplace(key, id);
        return id;
    };

    for (int cz = 0; cz < grid_res; ++cz)
        for (int cy = 0; cy < grid_res; ++cy)
            for (int cx = 0; cx < grid_res; ++cx) {
                std::array<std::uint64_t, 8> corner_pt;
                std::array<bool, 8> inside;
                int inside_count = 0;
                for (int c = 0; c < 8; ++c) {
                    corner_pt[c] = point_id(cx + (c & 1), cy + ((c >> 1) & 1), cz + ((c >> 2) & 1));
                    inside[c] = values[corner_pt[c]] > iso;
                    inside_count += inside[c];
                }
                if (inside_count == 0 || inside_count == 8) continue;

                // exit cut -> enter cut, per face, paired in cyclic order
                std::array<int, 12> next;
                next.fill(-1);
                for (const auto& face : kFaces) {
                    int cut_edge[4], cut_exit[4], cuts = 0;
                    for (int k = 0; k < 4; ++k) {
                        int a = face[k], b = face[(k + 1) % 4];
                        if (inside[a] == inside[b]) continue;
                        cut_edge[cuts] = kEdgeLookup.of[a][b];
                        cut_exit[cuts] = inside[a];
                        ++cuts;
                    }
                    int first_exit = -1;
                    for (int k = 0; k < cuts; ++k)
                        if (cut_exit[k]) {
                            first_exit = k;
                            break;
                        }
                    for (int k = 0; k < cuts; k += 2) {
                        int e = (first_exit + k) % cuts;
                        next[cut_edge[e]] = cut_edge[(e + 1) % cuts];
                    }
                }

                std::array<bool, 12> used;
                used.fill(false);
                for (int start = 0; start < 12; ++start) {
                    if (next[start] < 0 || used[start]) continue;
                    std::uint32_t loop[12];
                    int len = 0;
                    int e = start;
                    do {
                        used[e] = true;
                        loop[len++] = crossing_vertex(corner_pt[kEdges[e][0]],
                                                      corner_pt[kEdges[e][1]]);
                        e = next[e];
                    } while (e != start);
                    for (int k = 1; k + 1 < len; ++k)
                        mesh.faces.push_back({loop[0], loop[k + 1], loop[k]});
                }
            }

    if (mesh.faces.empty()) throw std::runtime_error("extract_mesh: field never crosses iso");
    return mesh;
}

}  // namespace dora
