#include <zlib.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dora/bench.hpp"
#include "dora/checkpoint.hpp"
#include "dora/marching.hpp"
#include "dora/metrics.hpp"
#include "dora/mesh.hpp"
#include "dora/pointcloud.hpp"
#include "dora/sampling.hpp"
#include "dora/train.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace dora;

namespace {

constexpr const char* kToolVersion = "0.1.0";

// user mistakes (bad paths, bad parameter combinations) exit 1; anything else exits 2
struct UserError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string crc32_hex(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UserError("cannot open " + path);
    uLong crc = crc32(0L, Z_NULL, 0);
    char buf[1 << 16];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0)
        crc = crc32(crc, reinterpret_cast<const Bytef*>(buf), static_cast<uInt>(in.gcount()));
    char out[16];
    std::snprintf(out, sizeof(out), "%08lx", crc);
    return out;
}

std::uint64_t env_seed_default() {
    const char* s = std::getenv("DORA_SEED");
    if (!s || !*s) return 0;
    return std::strtoull(s, nullptr, 10);
}

json make_envelope(const std::string& subcommand, const json& config,
                   const std::vector<std::string>& input_paths, bool reproducible) {
    json env;
    env["tool_version"] = kToolVersion;
    env["subcommand"] = subcommand;
    env["config"] = config;
    json hashes = json::object();
    for (const std::string& p : input_paths) hashes[p] = crc32_hex(p);
    env["input_hashes"] = hashes;
    if (!reproducible) {
        auto now = std::chrono::system_clock::now().time_since_epoch();
        env["timestamp_ms"] = std::chrono::duration_cast<std::chrono::milliseconds>(now).count();
    }
    return env;
}

void emit_json(const json& doc, const std::string& out_path) {
    std::string text = doc.dump(2) + "\n";
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw UserError("cannot write " + out_path);
    out << text;
}

TriangleMesh load_mesh_checked(const std::string& path) {
    if (!fs::exists(path)) throw UserError("no such file: " + path);
    try {
        return load_mesh(path);
    } catch (const MeshError& e) {
        throw UserError(std::string("unreadable mesh ") + path + ": " + e.what());
    }
}

struct SampleArgs {
    std::string mesh_path, out_ply, out_bin, stats_path;
    double tau = kDefaultTauDeg;
    std::size_t n_total = kDefaultTotalPoints;
    std::size_t n_desired = kDefaultDesiredSalient;
    std::uint64_t seed = env_seed_default();
    bool uniform = false;
};

int cmd_sample(const SampleArgs& a, bool reproducible) {
    if (a.n_desired > a.n_total)
        throw UserError("--n-desired must not exceed --n-total");
    TriangleMesh mesh = load_mesh_checked(a.mesh_path);
    auto t0 = std::chrono::steady_clock::now();
    SalientEdgeSet edges = detect_salient_edges(mesh, a.tau);
    auto t1 = std::chrono::steady_clock::now();
    SurfacePointCloud cloud = a.uniform
                                  ? sample_uniform(mesh, a.n_total, a.seed)
                                  : ses_sample(mesh, a.n_total, a.n_desired, a.tau, a.seed);
    auto t2 = std::chrono::steady_clock::now();
    if (!a.out_ply.empty()) save_cloud_ply(cloud, a.out_ply);
    if (!a.out_bin.empty()) save_cloud_binary(cloud, a.out_bin);

    json config = {{"mesh", a.mesh_path},   {"tau", a.tau},
                   {"n_total", a.n_total},  {"n_desired", a.n_desired},
                   {"seed", a.seed},        {"uniform", a.uniform}};
    json doc = make_envelope("sample", config, {a.mesh_path}, reproducible);
    doc["n_gamma"] = edges.count();
    doc["n_salient"] = cloud.count_label(PointLabel::Salient);
    doc["n_uniform"] = cloud.count_label(PointLabel::Uniform);
    doc["n_points"] = cloud.size();
    if (!reproducible) {
        doc["timings_ms"] = {
            {"detect_edges", std::chrono::duration<double, std::milli>(t1 - t0).count()},
            {"sample", std::chrono::duration<double, std::milli>(t2 - t1).count()}};
    }
    emit_json(doc, a.stats_path);
    return 0;
}

struct ClassifyArgs {
    std::vector<std::string> paths;
    std::string tag, out_path;
    double tau = kDefaultTauDeg;
    int jobs = 1;
};

int cmd_classify(const ClassifyArgs& a, bool reproducible) {
    std::vector<std::string> mesh_paths;
    for (const std::string& p : a.paths) {
        if (fs::is_directory(p)) {
            std::vector<std::string> found;
            for (const auto& entry : fs::directory_iterator(p)) {
                std::string ext = entry.path().extension().string();
                if (ext == ".obj" || ext == ".ply") found.push_back(entry.path().string());
            }
            std::sort(found.begin(), found.end());
            mesh_paths.insert(mesh_paths.end(), found.begin(), found.end());
        } else {
            mesh_paths.push_back(p);
        }
    }
    BenchManifest manifest = build_manifest(mesh_paths, a.tau, a.tag, a.jobs);

    json config = {{"tau", a.tau}, {"tag", a.tag}, {"jobs", a.jobs}, {"paths", a.paths}};
    std::vector<std::string> hashable;
    for (const BenchEntry& e : manifest.entries) hashable.push_back(e.path);
    json doc = make_envelope("classify", config, hashable, reproducible);
    doc["manifest"] = manifest_to_json(manifest);
    json counts = json::object();
    for (const BenchEntry& e : manifest.entries) {
        std::string name = level_name(e.level);
        counts[name] = counts.value(name, 0) + 1;
    }
    doc["level_counts"] = counts;
    emit_json(doc, a.out_path);
    return 0;
}

struct EvalArgs {
    std::string gt_path, pred_path, out_path;
    std::size_t eval_points = 1000000;
    int views = kDefaultViewCount;
    int res = kDefaultRenderRes;
    std::string cd_mode = "symmetric";
    std::uint64_t seed = env_seed_default();
    bool skip_sne = false;
};

json eval_pair(const TriangleMesh& gt, const TriangleMesh& pred, const EvalArgs& a) {
    SurfacePointCloud gt_pts = sample_uniform(gt, a.eval_points, a.seed);
    SurfacePointCloud pred_pts = sample_uniform(pred, a.eval_points, a.seed);
    ChamferMode mode =
        a.cd_mode == "pred-to-gt" ? ChamferMode::PredToGt : ChamferMode::Symmetric;
    json out;
    out["fscore_001_x100"] = fscore(pred_pts.positions, gt_pts.positions, 0.01).fscore * 100.0;
    out["fscore_0005_x100"] = fscore(pred_pts.positions, gt_pts.positions, 0.005).fscore * 100.0;
    out["chamfer_x10000"] = chamfer(pred_pts.positions, gt_pts.positions, mode) * 10000.0;
    if (!a.skip_sne) {
        SneOptions sne_opts;
        sne_opts.res = a.res;
        out["sne_x100"] = sne(gt, pred, default_views(a.views), sne_opts) * 100.0;
    }
    return out;
}

int cmd_eval(const EvalArgs& a, bool reproducible) {
    if (a.cd_mode != "symmetric" && a.cd_mode != "pred-to-gt")
        throw UserError("--cd-mode must be symmetric or pred-to-gt");
    TriangleMesh gt = load_mesh_checked(a.gt_path);
    TriangleMesh pred = load_mesh_checked(a.pred_path);
    json config = {{"gt", a.gt_path},       {"pred", a.pred_path}, {"eval_points", a.eval_points},
                   {"views", a.views},      {"res", a.res},        {"cd_mode", a.cd_mode},
                   {"seed", a.seed},        {"skip_sne", a.skip_sne}};
    json doc = make_envelope("eval", config, {a.gt_path, a.pred_path}, reproducible);
    doc["metrics"] = eval_pair(gt, pred, a);
    emit_json(doc, a.out_path);
    return 0;
}

struct BenchArgs {
    std::string manifest_path, pairs_path, out_path;
    EvalArgs eval;
    int jobs = 1;
    bool text = false;
};

BenchManifest manifest_from_json(const json& j) {
    BenchManifest m;
    m.dataset_tag = j.value("dataset_tag", "");
    m.tau_deg = j.value("tau_deg", kDefaultTauDeg);
    for (const json& e : j.value("entries", json::array())) {
        BenchEntry entry;
        entry.id = e.at("id").get<std::string>();
        entry.path = e.at("path").get<std::string>();
        entry.n_gamma = e.at("n_gamma").get<std::size_t>();
        std::string level = e.at("level").get<std::string>();
        entry.level = ComplexityLevel::Unclassified;
        for (ComplexityLevel l : {ComplexityLevel::L1, ComplexityLevel::L2, ComplexityLevel::L3,
                                  ComplexityLevel::L4})
            if (level == level_name(l)) entry.level = l;
        m.entries.push_back(entry);
    }
    return m;
}

int cmd_bench(const BenchArgs& a, bool reproducible) {
    if (!fs::exists(a.manifest_path)) throw UserError("no such file: " + a.manifest_path);
    if (!fs::exists(a.pairs_path)) throw UserError("no such file: " + a.pairs_path);
    std::ifstream min(a.manifest_path);
    json mdoc = json::parse(min, nullptr, false);
    if (mdoc.is_discarded()) throw UserError("invalid manifest JSON: " + a.manifest_path);
    BenchManifest manifest =
        manifest_from_json(mdoc.contains("manifest") ? mdoc["manifest"] : mdoc);

    // pairs file: one "id pred_path" per line
    std::map<std::string, std::string> pred_by_id;
    std::ifstream pin(a.pairs_path);
    std::string line;
    while (std::getline(pin, line)) {
        std::istringstream ls(line);
        std::string id, path;
        if (ls >> id >> path) pred_by_id[id] = path;
    }

    std::vector<MetricRow> rows;
    json failures = json::array();
    for (const BenchEntry& entry : manifest.entries) {
        auto it = pred_by_id.find(entry.id);
        if (it == pred_by_id.end() || !fs::exists(it->second)) {
            failures.push_back({{"id", entry.id}, {"reason", "missing prediction"}});
            continue;
        }
        try {
            TriangleMesh gt = load_mesh_checked(entry.path);
            TriangleMesh pred = load_mesh_checked(it->second);
            json metrics = eval_pair(gt, pred, a.eval);
            MetricRow row;
            row.id = entry.id;
            row.fscore_001 = metrics["fscore_001_x100"].get<double>() / 100.0;
            row.fscore_0005 = metrics["fscore_0005_x100"].get<double>() / 100.0;
            row.chamfer = metrics["chamfer_x10000"].get<double>() / 10000.0;
            if (metrics.contains("sne_x100"))
                row.sne = metrics["sne_x100"].get<double>() / 100.0;
            rows.push_back(row);
        } catch (const std::exception& e) {
            failures.push_back({{"id", entry.id}, {"reason", e.what()}});
        }
    }
    BenchReport report = aggregate_report(manifest, rows);

    json config = {{"manifest", a.manifest_path}, {"pairs", a.pairs_path},
                   {"eval_points", a.eval.eval_points}, {"views", a.eval.views},
                   {"res", a.eval.res}, {"cd_mode", a.eval.cd_mode},
                   {"seed", a.eval.seed}, {"skip_sne", a.eval.skip_sne},
                   {"jobs", a.jobs}};
    json doc = make_envelope("bench", config, {a.manifest_path, a.pairs_path}, reproducible);
    doc["report"] = report_to_json(report);
    doc["failures"] = failures;
    emit_json(doc, a.out_path);
    if (a.text) std::cout << report_to_text(report);
    return 0;
}

struct TrainArgs {
    std::string arm = "full", profile = "toy", out_path, log_path;
    std::uint64_t seed = env_seed_default();
    int epochs = 300;
    std::size_t shapes = 8;
    int jobs = 0;
    double lr = 0.0;  // 0 = profile default
};

int cmd_train_toy(const TrainArgs& a, bool reproducible) {
    TrainProfile profile = profile_by_name(a.profile);
    if (a.lr > 0.0) profile.lr = a.lr;
    TrainOptions options;
    options.arm = parse_arm(a.arm);
    options.epochs = a.epochs;
    options.seed = a.seed;
    options.jobs = a.jobs;
    std::vector<ProceduralShape> dataset = make_bump_grid_dataset(a.shapes);

    std::ofstream log_file;
    std::ostream* log = &std::cout;
    if (!a.log_path.empty()) {
        log_file.open(a.log_path, std::ios::binary);
        if (!log_file) throw UserError("cannot write " + a.log_path);
        log = &log_file;
    }
    TrainResult result = train_toy(dataset, profile, options, [&](const EpochStats& s) {
        json rec = {{"epoch", s.epoch}, {"loss", s.loss}, {"accuracy", s.accuracy}};
        (*log) << rec.dump() << "\n";
    });
    if (!a.out_path.empty()) save_checkpoint(result.params, a.out_path);

    json config = {{"arm", a.arm},      {"profile", a.profile}, {"seed", a.seed},
                   {"epochs", a.epochs}, {"shapes", a.shapes},   {"jobs", a.jobs},
                   {"lr", profile.lr}};
    json doc = make_envelope("train-toy", config, {}, reproducible);
    doc["final_loss"] = result.log.back().loss;
    doc["final_accuracy"] = result.log.back().accuracy;
    doc["fscore_001"] = evaluate_fscore(result.params, dataset, profile, a.seed, a.jobs);
    doc["sampling"] = options.arm == Arm::NoSesNoDca ? "uniform" : "sharp-edge";
    if (!a.out_path.empty()) doc["checkpoint"] = a.out_path;
    if (!a.log_path.empty()) emit_json(doc, "");
    else (*log) << doc.dump() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"geometry sampling, benchmarking and occupancy-model toolkit"};
    app.set_version_flag("--version", kToolVersion);
    app.set_config("--config", "", "key-value config file; flags override file values");
    bool reproducible = false;
    app.add_flag("--reproducible", reproducible,
                 "omit timestamps and timings so outputs are byte-stable");
    app.require_subcommand(1);

    SampleArgs sa;
    CLI::App* sample = app.add_subcommand("sample", "sample a labeled point cloud from a mesh");
    sample->add_option("mesh", sa.mesh_path, "input mesh (.obj/.ply)")->required();
    sample->add_option("--out", sa.out_ply, "output labeled PLY path");
    sample->add_option("--out-binary", sa.out_bin, "output compact binary cloud path");
    sample->add_option("--stats", sa.stats_path, "stats JSON path (default stdout)");
    sample->add_option("--tau", sa.tau, "salient dihedral threshold, degrees")
        ->capture_default_str();
    sample->add_option("--n-total", sa.n_total, "total points")->capture_default_str();
    sample->add_option("--n-desired", sa.n_desired, "desired salient points")
        ->capture_default_str();
    sample->add_option("--seed", sa.seed, "RNG seed (env DORA_SEED fallback)")
        ->capture_default_str();
    sample->add_flag("--uniform", sa.uniform, "uniform area sampling only");

    ClassifyArgs ca;
    CLI::App* classify = app.add_subcommand("classify", "build a complexity manifest");
    classify->add_option("paths", ca.paths, "mesh files or directories")->required();
    classify->add_option("--tau", ca.tau, "salient dihedral threshold, degrees")
        ->capture_default_str();
    classify->add_option("--tag", ca.tag, "dataset tag recorded in the manifest");
    classify->add_option("--jobs", ca.jobs, "parallel mesh loads")->capture_default_str();
    classify->add_option("--out", ca.out_path, "manifest JSON path (default stdout)");

    EvalArgs ea;
    CLI::App* eval = app.add_subcommand("eval", "reconstruction metrics for one mesh pair");
    eval->add_option("gt", ea.gt_path, "ground-truth mesh")->required();
    eval->add_option("pred", ea.pred_path, "predicted mesh")->required();
    eval->add_option("--eval-points", ea.eval_points, "points sampled per mesh")
        ->capture_default_str();
    eval->add_option("--views", ea.views, "viewpoints for normal-map error")
        ->capture_default_str();
    eval->add_option("--res", ea.res, "render resolution")->capture_default_str();
    eval->add_option("--cd-mode", ea.cd_mode, "symmetric or pred-to-gt")->capture_default_str();
    eval->add_option("--seed", ea.seed, "RNG seed (env DORA_SEED fallback)")
        ->capture_default_str();
    eval->add_flag("--skip-sne", ea.skip_sne, "skip the normal-map error");
    eval->add_option("--out", ea.out_path, "report JSON path (default stdout)");

    BenchArgs ba;
    CLI::App* bench = app.add_subcommand("bench", "per-level metric table over a manifest");
    bench->add_option("manifest", ba.manifest_path, "manifest JSON from classify")->required();
    bench->add_option("pairs", ba.pairs_path, "text file of `id pred_path` lines")->required();
    bench->add_option("--eval-points", ba.eval.eval_points, "points sampled per mesh")
        ->capture_default_str();
    bench->add_option("--views", ba.eval.views, "viewpoints for normal-map error")
        ->capture_default_str();
    bench->add_option("--res", ba.eval.res, "render resolution")->capture_default_str();
    bench->add_option("--cd-mode", ba.eval.cd_mode, "symmetric or pred-to-gt")
        ->capture_default_str();
    bench->add_option("--seed", ba.eval.seed, "RNG seed (env DORA_SEED fallback)")
        ->capture_default_str();
    bench->add_flag("--skip-sne", ba.eval.skip_sne, "skip the normal-map error");
    bench->add_option("--jobs", ba.jobs, "parallel evaluations")->capture_default_str();
    bench->add_flag("--text", ba.text, "also print the text table");
    bench->add_option("--out", ba.out_path, "report JSON path (default stdout)");

    TrainArgs ta;
    CLI::App* train = app.add_subcommand("train-toy", "train the toy occupancy model");
    train->add_option("--arm", ta.arm, "full, no-dca, or no-ses")->capture_default_str();
    train->add_option("--profile", ta.profile, "toy or paper")->capture_default_str();
    train->add_option("--seed", ta.seed, "RNG seed (env DORA_SEED fallback)")
        ->capture_default_str();
    train->add_option("--epochs", ta.epochs, "training epochs")->capture_default_str();
    train->add_option("--lr", ta.lr, "learning rate override (0 = profile default)");
    train->add_option("--shapes", ta.shapes, "bump-grid dataset size")->capture_default_str();
    train->add_option("--jobs", ta.jobs, "worker threads (0 = all cores)")
        ->capture_default_str();
    train->add_option("--out", ta.out_path, "checkpoint output path");
    train->add_option("--log", ta.log_path, "JSON-lines log path (default stdout)");

    try {
        app.parse(argc, argv);
        if (*sample) return cmd_sample(sa, reproducible);
        if (*classify) return cmd_classify(ca, reproducible);
        if (*eval) return cmd_eval(ea, reproducible);
        if (*bench) return cmd_bench(ba, reproducible);
        if (*train) return cmd_train_toy(ta, reproducible);
        return 1;
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const UserError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    }
}
