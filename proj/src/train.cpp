#include "dora/train.hpp"

#include <atomic>
#include <cmath>
#include <thread>

#include "dora/marching.hpp"
#include "dora/metrics.hpp"
#include "dora/occupancy.hpp"
#include "dora/rng.hpp"
#include "dora/sampling.hpp"

namespace dora {

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t x = seed + 0x9e3779b97f4a7c15ull * (salt + 1);
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ull;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebull;
    x ^= x >> 31;
    return x;
}

int resolve_jobs(int jobs) {
    if (jobs > 0) return jobs;
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// runs fn(i) for i in [0, n) on up to `jobs` threads
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
    int workers = std::min<std::size_t>(resolve_jobs(jobs), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> counter{0};
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (int w = 0; w < workers; ++w)
        threads.emplace_back([&] {
            for (std::size_t i = counter.fetch_add(1); i < n; i = counter.fetch_add(1)) fn(i);
        });
    for (std::thread& t : threads) t.join();
}

struct ShapeData {
    SurfacePointCloud cloud;
};

}  // namespace

TrainProfile TrainProfile::toy() { return {}; }

TrainProfile TrainProfile::paper() {
    TrainProfile p;
    p.name = "paper";
    p.config.enc_layers = 8;
    p.config.dec_layers = 16;
    p.config.width = 512;
    p.config.heads = 8;
    p.n_dense = kDefaultTotalPoints;
    p.n_desired = kDefaultDesiredSalient;
    p.n_s = 768;
    p.lr = 5e-5;
    p.batch_queries = 2048;
    return p;
}

TrainProfile profile_by_name(const std::string& name) {
    if (name == "toy") return TrainProfile::toy();
    if (name == "paper") return TrainProfile::paper();
    throw std::invalid_argument("unknown profile: " + name);
}

SurfacePointCloud sample_shape_cloud(const ProceduralShape& shape, const TrainProfile& profile,
                                     Arm arm, std::uint64_t seed) {
    if (arm == Arm::NoSesNoDca)
        return sample_uniform(shape.mesh, profile.n_dense, seed);
    return ses_sample(shape.mesh, profile.n_dense, profile.n_desired, profile.tau_deg, seed);
}

TrainResult train_toy(const std::vector<ProceduralShape>& dataset, const TrainProfile& profile,
                      const TrainOptions& options, const EpochCallback& on_epoch) {
    if (dataset.empty()) throw std::invalid_argument("train_toy: empty dataset");
    profile.config.validate();

    std::vector<ShapeData> shapes(dataset.size());
    parallel_for(dataset.size(), options.jobs, [&](std::size_t i) {
        std::uint64_t s = mix_seed(options.seed, i);
        shapes[i].cloud = sample_shape_cloud(dataset[i], profile, options.arm, s);
    });

    TrainResult result;
    result.params = ModelParameters::init(profile.config, options.arm, options.seed);
    std::size_t n_params = result.params.count();
    std::vector<double> m(n_params, 0.0), v(n_params, 0.0);
    const double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;

    std::vector<std::vector<double>> shape_grads(dataset.size());
    std::vector<double> shape_loss(dataset.size()), shape_correct(dataset.size());
    std::vector<std::size_t> shape_count(dataset.size());

    int steps_per_epoch = std::max(profile.steps_per_epoch, 1);
    for (int epoch = 0; epoch < options.epochs; ++epoch) {
        double epoch_loss = 0.0, epoch_correct = 0.0;
        std::size_t epoch_total = 0;
        for (int step = 0; step < steps_per_epoch; ++step) {
            std::uint64_t g = static_cast<std::uint64_t>(epoch) * steps_per_epoch + step;
            parallel_for(dataset.size(), options.jobs, [&](std::size_t i) {
                // fresh query batch every step so the model cannot memorize a pool
                std::size_t n_near = profile.batch_queries / 2;
                OccupancyBatch batch = sample_queries(
                    dataset[i].mesh, n_near, profile.batch_queries - n_near, profile.sigma,
                    mix_seed(options.seed, (g << 20) + i), dataset[i].inside);
                const std::vector<Vec3>& queries = batch.queries;
                const std::vector<double>& labels = batch.labels;
                ForwardOptions fwd;
                fwd.n_s = profile.n_s;
                fwd.seed = mix_seed(options.seed, (g << 24) + 7 * i);
                fwd.stochastic = true;
                fwd.kl_weight = profile.kl_weight;
                ForwardGraph graph;
                build_forward(shapes[i].cloud, queries, labels, result.params, fwd, graph);
                shape_loss[i] = graph.tape.value(graph.loss).v[0];
                const Mat& pred = graph.tape.value(graph.pred);
                std::size_t correct = 0;
                for (std::size_t q = 0; q < labels.size(); ++q)
                    correct += (pred.v[q] > 0.5) == (labels[q] > 0.5);
                shape_correct[i] = static_cast<double>(correct);
                shape_count[i] = labels.size();
                shape_grads[i] = parameter_gradients(graph, result.params);
            });

            double loss = 0.0;
            std::vector<double> grad(n_params, 0.0);
            for (std::size_t i = 0; i < dataset.size(); ++i) {
                loss += shape_loss[i];
                epoch_correct += shape_correct[i];
                epoch_total += shape_count[i];
                for (std::size_t k = 0; k < n_params; ++k) grad[k] += shape_grads[i][k];
            }
            loss /= static_cast<double>(dataset.size());
            if (!std::isfinite(loss)) throw DivergenceError(g);
            epoch_loss += loss;
            double inv_n = 1.0 / static_cast<double>(dataset.size());

            double t = static_cast<double>(g + 1);
            double correction1 = 1.0 - std::pow(beta1, t);
            double correction2 = 1.0 - std::pow(beta2, t);
            for (std::size_t k = 0; k < n_params; ++k) {
                double gk = grad[k] * inv_n;
                m[k] = beta1 * m[k] + (1.0 - beta1) * gk;
                v[k] = beta2 * v[k] + (1.0 - beta2) * gk * gk;
                result.params.flat[k] -=
                    profile.lr * (m[k] / correction1) / (std::sqrt(v[k] / correction2) + adam_eps);
            }
        }

        EpochStats stats;
        stats.epoch = epoch;
        stats.loss = epoch_loss / steps_per_epoch;
        stats.accuracy = epoch_correct / static_cast<double>(epoch_total);
        result.log.push_back(stats);
        if (on_epoch) on_epoch(stats);
    }
    return result;
}

double evaluate_accuracy(const ModelParameters& params, const ProceduralShape& shape,
                         const TrainProfile& profile, std::uint64_t seed) {
    SurfacePointCloud cloud = sample_shape_cloud(shape, profile, params.arm, mix_seed(seed, 1));
    OccupancyBatch held_out =
        sample_queries(shape.mesh, profile.queries_near, profile.queries_uniform, profile.sigma,
                       mix_seed(seed, 0xe7a1), shape.inside);
    LatentCode code = encode(cloud, params, profile.n_s, mix_seed(seed, 2), false);
    std::vector<double> pred = decode_occupancy(code.z, held_out.queries, params);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < pred.size(); ++i)
        correct += (pred[i] > 0.5) == (held_out.labels[i] > 0.5);
    return static_cast<double>(correct) / static_cast<double>(pred.size());
}

double evaluate_fscore(const ModelParameters& params,
                       const std::vector<ProceduralShape>& dataset, const TrainProfile& profile,
                       std::uint64_t seed, int jobs) {
    std::vector<double> scores(dataset.size(), 0.0);
    parallel_for(dataset.size(), jobs, [&](std::size_t i) {
        SurfacePointCloud cloud =
            sample_shape_cloud(dataset[i], profile, params.arm, mix_seed(seed, i));
        LatentCode code = encode(cloud, params, profile.n_s, mix_seed(seed, 0x40 + i), false);
        ScalarField field = [&](const std::vector<Vec3>& points) {
            return decode_occupancy(code.z, points, params);
        };
        double score = 0.0;
        try {
            TriangleMesh extracted = extract_mesh(field, profile.extract_res);
            SurfacePointCloud pred_pts =
                sample_uniform(extracted, profile.eval_points, mix_seed(seed, 0x80 + i));
            SurfacePointCloud gt_pts =
                sample_uniform(dataset[i].mesh, profile.eval_points, mix_seed(seed, 0xc0 + i));
            score = fscore(pred_pts.positions, gt_pts.positions, 0.01).fscore;
        } catch (const std::runtime_error&) {
            // degenerate predictor: no surface, scores zero
        }
        scores[i] = score;
    });
    double sum = 0.0;
    for (double s : scores) sum += s;
    return sum / static_cast<double>(scores.size());
}

}  // namespace dora
