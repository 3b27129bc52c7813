// End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
// the process exits nonzero if any criterion fails. An optional argument
// restricts the run to one criterion number.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dora/bench.hpp"
#include "dora/canny.hpp"
#include "dora/metrics.hpp"
#include "dora/mesh.hpp"
#include "dora/model.hpp"
#include "dora/rng.hpp"
#include "dora/sampling.hpp"
#include "dora/shapes.hpp"
#include "dora/train.hpp"

using namespace dora;

namespace {

bool check(bool& ok, bool condition, const char* what) {
    if (!condition) {
        std::printf("    failed: %s\n", what);
        ok = false;
    }
    return condition;
}

// --- 1: salient edge detection vs a brute-force all-edges loop ---

std::map<std::pair<std::uint32_t, std::uint32_t>, double> brute_force_sharp_edges(
    const TriangleMesh& mesh, double tau_deg) {
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::vector<std::size_t>> faces_by_edge;
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        const auto& face = mesh.faces[f];
        for (int e = 0; e < 3; ++e) {
            std::uint32_t a = face[e], b = face[(e + 1) % 3];
            faces_by_edge[{std::min(a, b), std::max(a, b)}].push_back(f);
        }
    }
    std::map<std::pair<std::uint32_t, std::uint32_t>, double> sharp;
    for (const auto& [edge, faces] : faces_by_edge) {
        if (faces.size() != 2) continue;
        Vec3 n1 = face_normal(mesh, faces[0]);
        Vec3 n2 = face_normal(mesh, faces[1]);
        double angle = dihedral_angle_deg(n1, n2);
        if (angle > tau_deg) sharp[edge] = angle;
    }
    return sharp;
}

bool criterion_1() {
    bool ok = true;
    TriangleMesh cube = make_cube();
    SalientEdgeSet set = detect_salient_edges(cube, 30.0);
    check(ok, set.count() == 12, "cube has 12 salient edges");
    for (const SalientEdge& e : set.edges)
        check(ok, std::abs(e.angle_deg - 90.0) < 1e-9, "cube dihedral is 90 deg");
    auto brute = brute_force_sharp_edges(cube, 30.0);
    check(ok, brute.size() == set.count(), "brute-force edge count matches");
    for (const SalientEdge& e : set.edges) {
        auto it = brute.find({e.key.first, e.key.second});
        if (!check(ok, it != brute.end(), "detected edge found by brute force")) continue;
        check(ok, std::abs(it->second - e.angle_deg) < 1e-9, "brute-force angle matches");
    }

    TriangleMesh ico = make_icosahedron();
    SalientEdgeSet ico_set = detect_salient_edges(ico, 30.0);
    check(ok, ico_set.count() == 30, "icosahedron has 30 salient edges");
    for (const SalientEdge& e : ico_set.edges)
        check(ok, e.angle_deg > 30.0 && std::abs(e.angle_deg - 41.81) < 0.1,
              "icosahedron dihedral near 41.8 deg");
    return ok;
}

// --- 2: the three salient sampling branches ---

bool criterion_2() {
    bool ok = true;
    TriangleMesh cube = make_cube();
    SalientEdgeSet set = detect_salient_edges(cube, 30.0);

    std::set<std::array<double, 3>> corners;
    for (const Vec3& v : cube.vertices) corners.insert({v.x, v.y, v.z});

    SurfacePointCloud a = sample_salient(cube, set, 8, 0);
    std::set<std::array<double, 3>> got_a;
    for (const Vec3& p : a.positions) got_a.insert({p.x, p.y, p.z});
    check(ok, got_a == corners, "n_desired=8 returns exactly the 8 corners");

    SurfacePointCloud b = sample_salient(cube, set, 20, 0);
    std::set<std::array<double, 3>> expected_b = corners;
    for (const SalientEdge& e : set.edges) {
        Vec3 mid = (cube.vertices[e.key.first] + cube.vertices[e.key.second]) * 0.5;
        expected_b.insert({mid.x, mid.y, mid.z});
    }
    std::set<std::array<double, 3>> got_b;
    for (const Vec3& p : b.positions) got_b.insert({p.x, p.y, p.z});
    check(ok, b.size() == 20, "n_desired=20 returns 20 points");
    check(ok, got_b == expected_b, "n_desired=20 is corners plus edge midpoints");

    TriangleMesh sphere = make_uv_sphere(48, 24);
    SalientEdgeSet none = detect_salient_edges(sphere, 30.0);
    check(ok, none.count() == 0 && sample_salient(sphere, none, 100, 0).size() == 0,
          "smooth sphere yields an empty salient set");
    return ok;
}

// --- 3: farthest point sampling vs a brute-force greedy oracle ---

std::vector<std::size_t> brute_force_fps(const std::vector<Vec3>& pts, std::size_t k,
                                         std::uint64_t seed) {
    std::vector<std::size_t> chosen{seed % pts.size()};
    std::vector<bool> used(pts.size(), false);
    used[chosen[0]] = true;
    while (chosen.size() < k) {
        double best = -1.0;
        std::size_t best_i = 0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (used[i]) continue;
            double d = std::numeric_limits<double>::infinity();
            for (std::size_t c : chosen) d = std::min(d, norm(pts[i] - pts[c]));
            if (d > best) {
                best = d;
                best_i = i;
            }
        }
        chosen.push_back(best_i);
        used[best_i] = true;
    }
    return chosen;
}

bool criterion_3() {
    bool ok = true;
    Rng rng(31337);
    for (int instance = 0; instance < 1000 && ok; ++instance) {
        std::size_t n = 1 + rng.uniform_index(10);
        std::vector<Vec3> pts(n);
        for (Vec3& p : pts)
            p = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
        std::uint64_t seed = rng.uniform_index(1000);
        std::size_t k = 1 + rng.uniform_index(n);
        check(ok, fps(pts, k, seed) == brute_force_fps(pts, k, seed),
              "fps matches the greedy oracle");
    }
    return ok;
}

// --- 4: metric identities on random fixtures ---

bool criterion_4() {
    bool ok = true;
    Rng rng(99);
    std::vector<CameraView> views = default_views(6);
    SneOptions sne_opts;  // res 256 default
    for (int i = 0; i < 100 && ok; ++i) {
        std::size_t n = 10000;
        std::vector<Vec3> x(n), y(n);
        for (std::size_t j = 0; j < n; ++j) {
            x[j] = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
            y[j] = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
        }
        check(ok, fscore(x, x, 0.01).fscore == 1.0, "fscore(X,X) is exactly 1");
        check(ok, chamfer(x, x) == 0.0, "chamfer(X,X) is exactly 0");
        check(ok, std::abs(chamfer(x, y) - chamfer(y, x)) < 1e-12, "chamfer symmetry");
        double prev = -1.0;
        for (double r : {0.001, 0.005, 0.01, 0.05}) {
            double f = fscore(x, y, r).fscore;
            check(ok, f >= prev, "fscore monotone in r");
            prev = f;
        }
        if (i % 10 == 0) {
            Vec3 lo{-rng.uniform(0.3, 1.0), -rng.uniform(0.3, 1.0), -rng.uniform(0.3, 1.0)};
            Vec3 hi{rng.uniform(0.3, 1.0), rng.uniform(0.3, 1.0), rng.uniform(0.3, 1.0)};
            TriangleMesh m = make_box(lo, hi);
            check(ok, sne(m, m, views, sne_opts) == 0.0, "sne(M,M) is exactly 0");
        }
    }
    return ok;
}

// --- 5: edge detector fixtures ---

bool criterion_5() {
    bool ok = true;
    check(ok, kDefaultCannyLow == 20.0 && kDefaultCannyHigh == 200.0,
          "default thresholds are (20, 200)");

    GrayImage flat(32, 32, 77);
    check(ok, canny(flat).count() == 0, "constant image has no edges");

    GrayImage step(32, 32, 0);
    for (int y = 0; y < 32; ++y)
        for (int x = 16; x < 32; ++x) step.at(x, y) = 255;
    EdgeMask mask = canny(step);
    int edge_column = -1, columns = 0;
    for (int x = 0; x < 32; ++x) {
        int count = 0;
        for (int y = 0; y < 32; ++y) count += mask.at(x, y);
        if (count > 0) {
            ++columns;
            edge_column = x;
            check(ok, count == 32, "edge column spans the full height");
        }
    }
    check(ok, columns == 1, "exactly one edge column before dilation");

    EdgeMask wide = dilate(mask, 2, 1);
    std::set<int> wide_columns;
    for (int x = 0; x < 32; ++x)
        for (int y = 0; y < 32; ++y)
            if (wide.at(x, y)) wide_columns.insert(x);
    check(ok, static_cast<int>(wide_columns.size()) == 5, "5-pixel band after dilation");
    check(ok, *wide_columns.begin() == edge_column - 2 &&
                  *wide_columns.rbegin() == edge_column + 2,
          "band is centered on the edge column");
    return ok;
}

// --- 6: analytic gradients vs central finite differences ---

bool criterion_6() {
    bool ok = true;
    EncoderConfig config;
    config.width = 16;
    config.heads = 1;
    config.enc_layers = 2;
    config.dec_layers = 2;
    config.fourier_freqs = 2;
    config.latent_width = 4;
    ModelParameters params = ModelParameters::init(config, Arm::Full, 3);

    Rng rng(17);
    SurfacePointCloud cloud;
    for (int i = 0; i < 8; ++i) {
        Vec3 p{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
        cloud.positions.push_back(p);
        cloud.normals.push_back(normalized(Vec3{rng.normal(), rng.normal(), rng.normal()}));
        cloud.labels.push_back(i < 5 ? PointLabel::Uniform : PointLabel::Salient);
    }
    std::vector<Vec3> queries(8);
    std::vector<double> labels(8);
    for (int i = 0; i < 8; ++i) {
        queries[i] = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
        labels[i] = rng.uniform() > 0.5 ? 1.0 : 0.0;
    }
    ForwardOptions opts;
    opts.n_s = 4;
    opts.seed = 11;
    opts.stochastic = true;

    auto loss_at = [&]() {
        ForwardGraph graph;
        build_forward(cloud, queries, labels, params, opts, graph);
        return graph.tape.value(graph.loss).v[0];
    };
    ForwardGraph graph;
    build_forward(cloud, queries, labels, params, opts, graph);
    std::vector<double> analytic = parameter_gradients(graph, params);

    double worst = 0.0;
    const double eps = 1e-4;
    for (std::size_t k = 0; k < params.flat.size(); ++k) {
        double saved = params.flat[k];
        params.flat[k] = saved + eps;
        double hi = loss_at();
        params.flat[k] = saved - eps;
        double lo = loss_at();
        params.flat[k] = saved;
        double fd = (hi - lo) / (2 * eps);
        double denom = std::max({std::abs(fd), std::abs(analytic[k]), 1e-6});
        worst = std::max(worst, std::abs(fd - analytic[k]) / denom);
    }
    std::printf("    worst relative gradient error: %.3g over %zu parameters\n", worst,
                params.flat.size());
    check(ok, worst < 1e-4, "max relative gradient error < 1e-4");
    return ok;
}

// --- 7: ablation equivalence and permutation invariance ---

bool criterion_7() {
    bool ok = true;
    EncoderConfig config;
    config.width = 32;
    config.heads = 4;
    config.latent_width = 8;
    ModelParameters full = ModelParameters::init(config, Arm::Full, 21);
    ModelParameters single = ModelParameters::init(config, Arm::NoDca, 22);
    copy_matching_parameters(single, full);

    Rng rng(7);
    SurfacePointCloud cloud;
    for (int i = 0; i < 64; ++i) {
        cloud.positions.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)});
        cloud.normals.push_back(normalized(Vec3{rng.normal(), rng.normal(), rng.normal()}));
        cloud.labels.push_back(PointLabel::Uniform);  // P_a stays empty
    }
    ForwardOptions opts;
    opts.n_s = 16;
    opts.seed = 3;
    ForwardGraph ga, gb;
    build_forward(cloud, {}, {}, full, opts, ga);
    build_forward(cloud, {}, {}, single, opts, gb);
    const Mat& ca = ga.tape.value(ga.features);
    const Mat& cb = gb.tape.value(gb.features);
    double max_diff = 0.0;
    for (std::size_t i = 0; i < ca.size(); ++i)
        max_diff = std::max(max_diff, std::abs(ca.v[i] - cb.v[i]));
    check(ok, max_diff < 1e-6, "empty-P_a dual path equals the single path");

    // permutation invariance of encode over row shuffles
    SurfacePointCloud mixed;
    for (int i = 0; i < 96; ++i) {
        mixed.positions.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)});
        mixed.normals.push_back(normalized(Vec3{rng.normal(), rng.normal(), rng.normal()}));
        mixed.labels.push_back(i % 3 == 0 ? PointLabel::Salient : PointLabel::Uniform);
    }
    LatentCode base = encode(mixed, full, 16, 5, true);
    std::vector<std::size_t> order(mixed.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng shuffle_rng(1234);
    for (int s = 0; s < 20; ++s) {
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[shuffle_rng.uniform_index(i)]);
        SurfacePointCloud shuffled;
        for (std::size_t i : order) {
            shuffled.positions.push_back(mixed.positions[i]);
            shuffled.normals.push_back(mixed.normals[i]);
            shuffled.labels.push_back(mixed.labels[i]);
        }
        LatentCode perm = encode(shuffled, full, 16, 5, true);
        double diff = 0.0;
        for (std::size_t i = 0; i < base.z.size(); ++i)
            diff = std::max(diff, std::abs(base.z.v[i] - perm.z.v[i]));
        check(ok, diff < 1e-6, "encode invariant under row shuffles");
    }
    return ok;
}

// --- 8: sharp-edge sampling beats uniform sampling, directionally ---

bool criterion_8() {
    bool ok = true;
    std::vector<ProceduralShape> dataset = make_bump_grid_dataset(8);
    TrainProfile profile = TrainProfile::toy();
    int wins = 0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        double scores[2] = {0.0, 0.0};
        int idx = 0;
        for (Arm arm : {Arm::Full, Arm::NoSesNoDca}) {
            TrainOptions options;
            options.arm = arm;
            options.epochs = 300;
            options.seed = seed;
            TrainResult result = train_toy(dataset, profile, options);
            scores[idx++] = evaluate_fscore(result.params, dataset, profile, 1000 + seed);
        }
        bool win = scores[0] >= scores[1];
        wins += win;
        std::printf("    seed %llu: sharp-edge F=%.4f uniform F=%.4f %s\n",
                    static_cast<unsigned long long>(seed), scores[0], scores[1],
                    win ? "(>=)" : "(<)");
        std::fflush(stdout);
    }
    check(ok, wins >= 4, "sharp-edge arm wins at least 4 of 5 seed pairs");
    return ok;
}

// --- 9: complexity level boundaries ---

bool criterion_9() {
    bool ok = true;
    const std::pair<std::size_t, ComplexityLevel> cases[] = {
        {1, ComplexityLevel::L1},     {5000, ComplexityLevel::L1},
        {5001, ComplexityLevel::L2},  {10000, ComplexityLevel::L2},
        {10001, ComplexityLevel::L3}, {50000, ComplexityLevel::L3},
        {50001, ComplexityLevel::L4}};
    for (const auto& [n, level] : cases)
        check(ok, classify_complexity(n) == level, "boundary value maps to its level");
    return ok;
}

// --- 10: CLI determinism ---

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool run_twice_identical(bool& ok, const std::string& args,
                         const std::vector<std::string>& outputs, const char* what) {
    std::vector<std::string> first;
    for (int round = 0; round < 2; ++round) {
        std::string cmd = std::string(DORA_CLI_PATH) + " " + args + " > /dev/null 2>&1";
        if (!check(ok, std::system(cmd.c_str()) == 0, "subcommand exits 0")) return false;
        for (std::size_t i = 0; i < outputs.size(); ++i) {
            std::string content = slurp(outputs[i]);
            if (round == 0)
                first.push_back(content);
            else
                check(ok, content == first[i], what);
        }
    }
    return true;
}

bool criterion_10() {
    bool ok = true;
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "dora_acceptance";
    fs::create_directories(dir);
    std::string cube = (dir / "cube.obj").string();
    save_obj(make_cube(), cube);
    std::string box = (dir / "box.obj").string();
    save_obj(make_box({-0.9, -0.8, -0.7}, {0.9, 0.8, 0.7}), box);

    std::string cloud = (dir / "cloud.ply").string();
    std::string cloud_bin = (dir / "cloud.bin").string();
    std::string stats = (dir / "stats.json").string();
    run_twice_identical(ok,
                        "--reproducible sample " + cube + " --n-total 4096 --n-desired 1024" +
                            " --seed 7 --out " + cloud + " --out-binary " + cloud_bin +
                            " --stats " + stats,
                        {cloud, cloud_bin, stats}, "sample outputs are byte-identical");

    std::string manifest = (dir / "manifest.json").string();
    run_twice_identical(ok, "--reproducible classify " + cube + " " + box + " --out " + manifest,
                        {manifest}, "classify outputs are byte-identical");

    std::string report = (dir / "report.json").string();
    run_twice_identical(ok,
                        "--reproducible eval " + cube + " " + box +
                            " --eval-points 2000 --views 4 --res 64 --seed 9 --out " + report,
                        {report}, "eval outputs are byte-identical");

    std::string pairs = (dir / "pairs.txt").string();
    {
        std::ifstream min(manifest);
        std::ostringstream ss;
        ss << min.rdbuf();
        std::string text = ss.str();
        // first manifest entry id is the cube fixture
        std::ofstream p(pairs, std::ios::binary);
        p << "cube " << box << "\nbox " << box << "\n";
    }
    std::string bench_out = (dir / "bench.json").string();
    run_twice_identical(ok,
                        "--reproducible bench " + manifest + " " + pairs +
                            " --eval-points 2000 --views 4 --res 64 --skip-sne --seed 9 --out " +
                            bench_out,
                        {bench_out}, "bench outputs are byte-identical");

    std::string ckpt = (dir / "toy.ckpt").string();
    std::string log = (dir / "toy.jsonl").string();
    run_twice_identical(ok,
                        "--reproducible train-toy --arm full --profile toy --seed 3 --epochs 2" +
                            std::string(" --shapes 1 --out ") + ckpt + " --log " + log,
                        {ckpt, log}, "train-toy outputs are byte-identical");
    return ok;
}

struct Criterion {
    int number;
    const char* label;
    bool (*run)();
};

}  // namespace

int main(int argc, char** argv) {
    const Criterion criteria[] = {
        {1, "salient edge detection matches the brute-force oracle", criterion_1},
        {2, "salient sampling covers all three branch cases", criterion_2},
        {3, "farthest point sampling matches the greedy oracle", criterion_3},
        {4, "metric identities hold on random fixtures", criterion_4},
        {5, "edge detector fixtures behave as specified", criterion_5},
        {6, "analytic gradients match finite differences", criterion_6},
        {7, "ablation equivalence and permutation invariance", criterion_7},
        {8, "sharp-edge sampling outperforms uniform sampling", criterion_8},
        {9, "complexity level boundaries are exact", criterion_9},
        {10, "CLI subcommands are deterministic", criterion_10},
    };
    int only = argc > 1 ? std::atoi(argv[1]) : 0;
    bool all_ok = true;
    for (const Criterion& c : criteria) {
        if (only != 0 && c.number != only) continue;
        auto t0 = std::chrono::steady_clock::now();
        bool ok = c.run();
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("criterion %2d: %s - %s (%.1fs)\n", c.number, ok ? "PASS" : "FAIL", c.label,
                    secs);
        std::fflush(stdout);
        all_ok = all_ok && ok;
    }
    return all_ok ? 0 : 1;
}
