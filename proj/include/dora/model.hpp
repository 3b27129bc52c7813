#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dora/autodiff.hpp"
#include "dora/pointcloud.hpp"
#include "dora/rng.hpp"

namespace dora {

struct EncoderConfig {
    int width = 64;          // model dimension d
    int heads = 4;           // attention heads; must divide width
    int enc_layers = 2;      // encoder self-attention depth
    int dec_layers = 2;      // decoder self-attention depth
    int fourier_freqs = 8;   // frequency count of the positional embedding
    bool include_normals = true;
    int latent_width = 8;    // channels per latent vector

    int point_feature_dim() const {
        return 3 + 6 * fourier_freqs + (include_normals ? 3 : 0);
    }
    int query_feature_dim() const { return 3 + 6 * fourier_freqs; }
    void validate() const;
};

// Ablation arms. Full uses the dual attention paths over P_u and P_a;
// NoDca runs a single attention over the whole dense cloud; NoSesNoDca
// additionally replaces sharp-edge sampling with uniform sampling upstream.
enum class Arm { Full, NoDca, NoSesNoDca };

const char* arm_name(Arm arm);
Arm parse_arm(const std::string& name);

struct ParamSpec {
    std::string name;
    int rows = 0, cols = 0;
    std::size_t offset = 0;
    std::size_t size() const { return static_cast<std::size_t>(rows) * cols; }
};

// Flat parameter vector with a deterministic named-segment layout.
struct ModelParameters {
    EncoderConfig config;
    Arm arm = Arm::Full;
    std::vector<ParamSpec> specs;
    std::vector<double> flat;

    static ModelParameters init(const EncoderConfig& config, Arm arm, std::uint64_t seed);

    std::size_t count() const { return flat.size(); }
    const ParamSpec& spec(const std::string& name) const;
    Mat tensor(const std::string& name) const;
    void set_tensor(const std::string& name, const Mat& m);
};

std::vector<ParamSpec> parameter_layout(const EncoderConfig& config, Arm arm);

// Copies every segment of src whose name also exists in dst.
void copy_matching_parameters(ModelParameters& dst, const ModelParameters& src);

// [p, sin(2^k pi p), cos(2^k pi p) for k < frequencies]; dimension 3 + 6k.
std::vector<double> fourier_embed(const Vec3& p, int frequencies);

Mat point_feature_matrix(const std::vector<Vec3>& positions, const std::vector<Vec3>& normals,
                         const EncoderConfig& config);
Mat query_feature_matrix(const std::vector<Vec3>& queries, const EncoderConfig& config);

namespace nn {

struct AttnVars {
    Var wq, bq, wk, bk, wv, bv, wo, bo;
};
struct LayerNormVars {
    Var gain, bias;
};
struct MlpVars {
    Var w1, b1, w2, b2;
};

// softmax(Q K^T / sqrt(d_head)) V per head, concatenated, output-projected.
Var multihead_attention(Tape& tape, Var queries, Var kv, const AttnVars& p, int heads);

// pre-norm residual self-attention + feed-forward block
Var transformer_block(Tape& tape, Var x, const LayerNormVars& ln1, const AttnVars& attn,
                      const LayerNormVars& ln2, const MlpVars& mlp, int heads);

}  // namespace nn

// z tokens with their posterior statistics; all N_s x latent_width.
struct LatentCode {
    Mat z, mean, logvar;
};

// FPS(P_u, n_s1) followed by FPS(P_a, n_s2), labels preserved. Shortfall in
// P_a transfers to the uniform branch. Point order is canonicalized before
// selection so the result is invariant to input row permutations.
SurfacePointCloud build_ps(const SurfacePointCloud& uniform_part,
                           const SurfacePointCloud& salient_part, std::size_t n_s1,
                           std::size_t n_s2, std::uint64_t seed);

// Whole-model differentiable graph for one shape. Parameters enter as tape
// leaves in layout order so gradients can be read back into a flat vector.
struct ForwardGraph {
    Tape tape;
    std::vector<Var> param_vars;  // one per ParamSpec
    Var features = -1;  // fused cross-attention output C
    Var mean = -1, logvar = -1, z = -1;
    Var pred = -1, loss = -1;
};

struct ForwardOptions {
    std::size_t n_s = 64;        // latent token count (split 50/50)
    std::uint64_t seed = 0;      // reparameterization noise + FPS
    bool stochastic = false;     // sample z vs use the mean
    double kl_weight = 0.001;
};

// Builds encode (+ optional decode/loss when queries nonempty) on one tape.
void build_forward(const SurfacePointCloud& cloud, const std::vector<Vec3>& queries,
                   const std::vector<double>& labels, const ModelParameters& params,
                   const ForwardOptions& options, ForwardGraph& out);

LatentCode encode(const SurfacePointCloud& cloud, const ModelParameters& params, std::size_t n_s,
                  std::uint64_t seed, bool stochastic = false);

// Decoder-only evaluation of occupancy at query points given latent tokens.
std::vector<double> decode_occupancy(const Mat& z, const std::vector<Vec3>& queries,
                                     const ModelParameters& params);

// Runs backward on graph.loss and gathers parameter gradients in flat layout.
std::vector<double> parameter_gradients(ForwardGraph& graph, const ModelParameters& params);

}  // namespace dora
