#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <queue>

#include "dora/kdtree.hpp"
#include "dora/rng.hpp"
#include "dora/sampling.hpp"

namespace dora {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

double dihedral_angle_deg(const Vec3& n1, const Vec3& n2) {
    double c = std::clamp(dot(n1, n2), -1.0, 1.0);
    return std::acos(c) * 180.0 / kPi;
}

SalientEdgeSet detect_salient_edges(const TriangleMesh& mesh, const EdgeAdjacency& adj,
                                    double tau_deg) {
    if (!(tau_deg > 0.0 && tau_deg < 180.0))
        throw std::invalid_argument("detect_salient_edges: tau must be in (0, 180)");
    std::vector<Vec3> normals = face_normals(mesh);
    SalientEdgeSet set;
    set.tau_deg = tau_deg;
    set.mesh_vertex_count = mesh.vertex_count();
    for (const auto& [key, faces] : adj.edges) {
        if (faces.size() != 2) continue;
        if (face_degenerate(mesh, faces[0]) || face_degenerate(mesh, faces[1])) continue;
        double angle = dihedral_angle_deg(normals[faces[0]], normals[faces[1]]);
        if (angle > tau_deg) set.edges.push_back({key, angle, faces[0], faces[1]});
    }
    return set;
}

SalientEdgeSet detect_salient_edges(const TriangleMesh& mesh, double tau_deg) {
    return detect_salient_edges(mesh, build_edge_adjacency(mesh), tau_deg);
}

std::vector<std::size_t> fps(const std::vector<Vec3>& points, std::size_t k, std::uint64_t seed) {
    std::size_t n = points.size();
    if (n == 0) throw std::invalid_argument("fps: empty input");
    if (k < 1 || k > n) throw std::invalid_argument("fps: k out of range");

    std::vector<std::size_t> selected;
    selected.reserve(k);
    std::vector<double> dist(n, std::numeric_limits<double>::infinity());

    std::size_t current = seed % n;
    selected.push_back(current);
    dist[current] = -1.0;  // marks selected

    for (std::size_t step = 1; step < k; ++step) {
        const Vec3& last = points[current];
        std::size_t best = n;
        double best_dist = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (dist[i] < 0.0) continue;
            double d = norm2(points[i] - last);
            if (d < dist[i]) dist[i] = d;
            if (dist[i] > best_dist) {
                best_dist = dist[i];
                best = i;
            }
        }
        current = best;
        selected.push_back(current);
        dist[current] = -1.0;
    }
    return selected;
}

namespace {

// Remove points until `target` remain, always eliminating the point whose
// nearest surviving neighbor is closest. Lazy-heap over a static kd-tree:
// removals only increase neighbor distances, so stale keys are lower bounds.
std::vector<std::size_t> eliminate_to(const std::vector<Vec3>& points, std::size_t target) {
    std::size_t n = points.size();
    KdTree tree(points);
    std::vector<bool> alive(n, true);
    using Entry = std::pair<double, std::size_t>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
    for (std::size_t i = 0; i < n; ++i) heap.push({tree.nearest(points[i], i).dist2, i});

    std::size_t remaining = n;
    while (remaining > target && !heap.empty()) {
        auto [d2, i] = heap.top();
        heap.pop();
        if (!alive[i]) continue;
        double actual = tree.nearest(points[i], i, &alive).dist2;
        if (actual > d2) {
            heap.push({actual, i});
            continue;
        }
        alive[i] = false;
        --remaining;
    }
    std::vector<std::size_t> kept;
    kept.reserve(target);
    for (std::size_t i = 0; i < n; ++i)
        if (alive[i]) kept.push_back(i);
    return kept;
}

}  // namespace

SurfacePointCloud sample_uniform(const TriangleMesh& mesh, std::size_t n, std::uint64_t seed,
                                 bool blue_noise) {
    if (n < 1) throw std::invalid_argument("sample_uniform: n must be >= 1");
    double area = total_area(mesh);
    if (area <= 0.0) throw MeshError("sample_uniform: zero-area mesh");

    std::vector<double> cumulative(mesh.face_count());
    double running = 0.0;
    for (std::size_t i = 0; i < mesh.face_count(); ++i) {
        running += face_area(mesh, i);
        cumulative[i] = running;
    }
    std::vector<Vec3> normals = face_normals(mesh);

    std::size_t raw_n = blue_noise ? n * 4 : n;
    Rng rng(seed);
    SurfacePointCloud cloud;
    cloud.seed = seed;
    cloud.positions.reserve(raw_n);
    cloud.normals.reserve(raw_n);
    for (std::size_t i = 0; i < raw_n; ++i) {
        double u = rng.uniform() * running;
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        std::size_t fi = std::min<std::size_t>(it - cumulative.begin(), mesh.face_count() - 1);
        while (face_degenerate(mesh, fi)) fi = (fi + 1) % mesh.face_count();
        double r1 = rng.uniform(), r2 = rng.uniform();
        if (r1 + r2 > 1.0) {
            r1 = 1.0 - r1;
            r2 = 1.0 - r2;
        }
        const auto& f = mesh.faces[fi];
        Vec3 a = mesh.vertices[f[0]];
        Vec3 p = a + r1 * (mesh.vertices[f[1]] - a) + r2 * (mesh.vertices[f[2]] - a);
        cloud.positions.push_back(p);
        cloud.normals.push_back(normals[fi]);
    }
    if (blue_noise) {
        std::vector<std::size_t> kept = eliminate_to(cloud.positions, n);
        SurfacePointCloud filtered;
        filtered.seed = seed;
        for (std::size_t i : kept) {
            filtered.positions.push_back(cloud.positions[i]);
            filtered.normals.push_back(cloud.normals[i]);
        }
        cloud = std::move(filtered);
    }
    cloud.labels.assign(cloud.size(), PointLabel::Uniform);
    return cloud;
}

namespace {

Vec3 edge_bisector_normal(const TriangleMesh& mesh, const SalientEdge& e) {
    Vec3 n1 = face_normal(mesh, e.face1);
    Vec3 n2 = face_normal(mesh, e.face2);
    Vec3 sum = n1 + n2;
    if (norm(sum) < 1e-12) return n1;  // opposing normals, no bisector
    return normalized(sum);
}

}  // namespace

SurfacePointCloud sample_salient(const TriangleMesh& mesh, const SalientEdgeSet& set,
                                 std::size_t n_desired, std::uint64_t seed) {
    if (set.mesh_vertex_count != mesh.vertex_count())
        throw std::invalid_argument("sample_salient: edge set built on a different mesh");

    SurfacePointCloud cloud;
    cloud.seed = seed;
    if (set.edges.empty() || n_desired == 0) return cloud;  // case (c)

    // salient vertex set P_Gamma: deduplicated, ascending vertex index
    std::map<std::uint32_t, Vec3> vertex_normal_sum;
    std::map<std::uint32_t, Vec3> vertex_first_bisector;
    for (const SalientEdge& e : set.edges) {
        Vec3 bisector = edge_bisector_normal(mesh, e);
        for (std::uint32_t v : {e.key.first, e.key.second}) {
            auto [it, inserted] = vertex_normal_sum.try_emplace(v, Vec3{});
            it->second += bisector;
            if (inserted) vertex_first_bisector[v] = bisector;
        }
    }
    std::vector<std::uint32_t> salient_vertices;
    std::vector<Vec3> salient_positions;
    std::vector<Vec3> salient_normals;
    for (const auto& [v, sum] : vertex_normal_sum) {
        salient_vertices.push_back(v);
        salient_positions.push_back(mesh.vertices[v]);
        salient_normals.push_back(norm(sum) < 1e-12 ? vertex_first_bisector[v] : normalized(sum));
    }
    std::size_t n_v = salient_vertices.size();

    if (n_desired <= n_v) {
        // case (a): FPS-downsample P_Gamma
        for (std::size_t idx : fps(salient_positions, n_desired, seed)) {
            cloud.positions.push_back(salient_positions[idx]);
            cloud.normals.push_back(salient_normals[idx]);
        }
    } else {
        // case (b): all of P_Gamma plus interpolated interior edge points
        cloud.positions = salient_positions;
        cloud.normals = salient_normals;

        std::size_t n_gamma = set.edges.size();
        std::size_t missing = n_desired - n_v;
        std::size_t per_edge = missing / n_gamma;
        std::size_t remainder = missing - per_edge * n_gamma;

        // leftover points go one each to the longest edges (ties: lower key)
        std::vector<std::size_t> order(n_gamma);
        for (std::size_t i = 0; i < n_gamma; ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return edge_length(mesh, set.edges[a].key) > edge_length(mesh, set.edges[b].key);
        });
        std::vector<std::size_t> extra(n_gamma, 0);
        for (std::size_t i = 0; i < remainder; ++i) extra[order[i]] = 1;

        for (std::size_t ei = 0; ei < n_gamma; ++ei) {
            const SalientEdge& e = set.edges[ei];
            std::size_t m = per_edge + extra[ei];
            if (m == 0) continue;
            Vec3 a = mesh.vertices[e.key.first];
            Vec3 b = mesh.vertices[e.key.second];
            Vec3 bisector = edge_bisector_normal(mesh, e);
            for (std::size_t i = 1; i <= m; ++i) {
                double t = static_cast<double>(i) / static_cast<double>(m + 1);
                cloud.positions.push_back(a + t * (b - a));
                cloud.normals.push_back(bisector);
            }
        }
    }
    cloud.labels.assign(cloud.size(), PointLabel::Salient);
    return cloud;
}

SurfacePointCloud ses_sample(const TriangleMesh& mesh, std::size_t n_total, std::size_t n_desired,
                             double tau_deg, std::uint64_t seed, bool blue_noise) {
    if (n_total < n_desired)
        throw std::invalid_argument("ses_sample: n_total must be >= n_desired");
    SalientEdgeSet set = detect_salient_edges(mesh, tau_deg);
    SurfacePointCloud salient = sample_salient(mesh, set, n_desired, seed);
    if (salient.size() > n_total)
        throw std::logic_error("ses_sample: salient set exceeds budget");
    SurfacePointCloud cloud = std::move(salient);
    std::size_t n_uniform = n_total - cloud.size();
    if (n_uniform > 0) {
        // separate stream for the uniform fill
        cloud.append(sample_uniform(mesh, n_uniform, seed ^ 0x9e3779b97f4a7c15ull, blue_noise));
    }
    cloud.seed = seed;
    return cloud;
}

}  // namespace dora
