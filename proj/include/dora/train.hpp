#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dora/model.hpp"
#include "dora/shapes.hpp"

namespace dora {

// Scale presets for training runs. "toy" finishes in minutes on a CPU;
// "paper" mirrors the published layer counts and is structurally valid but
// not sized for desk hardware.
struct TrainProfile {
    std::string name = "toy";
    EncoderConfig config;
    std::size_t n_dense = 1024;      // dense cloud budget per shape
    std::size_t n_desired = 512;     // salient target within the dense cloud
    std::size_t n_s = 64;            // latent token count
    double tau_deg = 30.0;
    std::size_t queries_near = 1024;  // held-out evaluation pool
    std::size_t queries_uniform = 1024;
    std::size_t batch_queries = 256;  // per optimization step
    int steps_per_epoch = 5;          // optimizer steps per reported epoch
    double sigma = 0.02;
    double lr = 1e-3;
    double kl_weight = 0.001;
    int extract_res = 64;
    std::size_t eval_points = 10000;

    static TrainProfile toy();
    static TrainProfile paper();
};

TrainProfile profile_by_name(const std::string& name);

struct TrainOptions {
    Arm arm = Arm::Full;
    int epochs = 300;
    std::uint64_t seed = 0;
    int jobs = 0;  // 0 = hardware concurrency
};

struct EpochStats {
    int epoch = 0;
    double loss = 0.0;
    double accuracy = 0.0;  // minibatch occupancy accuracy at threshold 0.5
};

struct TrainResult {
    ModelParameters params;
    std::vector<EpochStats> log;
};

// Non-finite loss during training.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(std::size_t step)
        : std::runtime_error("training diverged at step " + std::to_string(step)), step_(step) {}
    std::size_t step() const { return step_; }

private:
    std::size_t step_;
};

using EpochCallback = std::function<void(const EpochStats&)>;

// Fixed-seed batch Adam over the dataset. The arm controls both the sampler
// (uniform-only for no-ses) and the encoder attention structure.
TrainResult train_toy(const std::vector<ProceduralShape>& dataset, const TrainProfile& profile,
                      const TrainOptions& options, const EpochCallback& on_epoch = nullptr);

// Point cloud for one shape under the arm's sampling scheme.
SurfacePointCloud sample_shape_cloud(const ProceduralShape& shape, const TrainProfile& profile,
                                     Arm arm, std::uint64_t seed);

// Occupancy accuracy on freshly sampled held-out queries.
double evaluate_accuracy(const ModelParameters& params, const ProceduralShape& shape,
                         const TrainProfile& profile, std::uint64_t seed);

// Mean F-score(0.01) between extracted meshes and the ground-truth meshes.
double evaluate_fscore(const ModelParameters& params,
                       const std::vector<ProceduralShape>& dataset, const TrainProfile& profile,
                       std::uint64_t seed, int jobs = 0);

}  // namespace dora
