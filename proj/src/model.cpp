#include "dora/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "dora/sampling.hpp"

namespace dora {

void EncoderConfig::validate() const {
    if (width < 1 || heads < 1 || enc_layers < 1 || dec_layers < 1 || latent_width < 1)
        throw std::invalid_argument("encoder config: counts must be >= 1");
    if (fourier_freqs < 0) throw std::invalid_argument("encoder config: negative frequency count");
    if (width % heads != 0) throw std::invalid_argument("encoder config: width not divisible by heads");
}

const char* arm_name(Arm arm) {
    switch (arm) {
        case Arm::Full: return "full";
        case Arm::NoDca: return "no-dca";
        case Arm::NoSesNoDca: return "no-ses";
    }
    return "full";
}

Arm parse_arm(const std::string& name) {
    if (name == "full") return Arm::Full;
    if (name == "no-dca") return Arm::NoDca;
    if (name == "no-ses" || name == "no-ses-no-dca") return Arm::NoSesNoDca;
    throw std::invalid_argument("unknown arm: " + name);
}

namespace {

void add_spec(std::vector<ParamSpec>& specs, std::size_t& offset, std::string name, int rows,
              int cols) {
    ParamSpec s;
    s.name = std::move(name);
    s.rows = rows;
    s.cols = cols;
    s.offset = offset;
    offset += s.size();
    specs.push_back(std::move(s));
}

void add_attention(std::vector<ParamSpec>& specs, std::size_t& offset, const std::string& prefix,
                   int d) {
    add_spec(specs, offset, prefix + ".wq", d, d);
    add_spec(specs, offset, prefix + ".bq", 1, d);
    add_spec(specs, offset, prefix + ".wk", d, d);
    add_spec(specs, offset, prefix + ".bk", 1, d);
    add_spec(specs, offset, prefix + ".wv", d, d);
    add_spec(specs, offset, prefix + ".bv", 1, d);
    add_spec(specs, offset, prefix + ".wo", d, d);
    add_spec(specs, offset, prefix + ".bo", 1, d);
}

void add_block(std::vector<ParamSpec>& specs, std::size_t& offset, const std::string& prefix,
               int d) {
    add_spec(specs, offset, prefix + ".ln1.g", 1, d);
    add_spec(specs, offset, prefix + ".ln1.b", 1, d);
    add_attention(specs, offset, prefix + ".attn", d);
    add_spec(specs, offset, prefix + ".ln2.g", 1, d);
    add_spec(specs, offset, prefix + ".ln2.b", 1, d);
    add_spec(specs, offset, prefix + ".mlp.w1", d, 4 * d);
    add_spec(specs, offset, prefix + ".mlp.b1", 1, 4 * d);
    add_spec(specs, offset, prefix + ".mlp.w2", 4 * d, d);
    add_spec(specs, offset, prefix + ".mlp.b2", 1, d);
}

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

std::vector<ParamSpec> parameter_layout(const EncoderConfig& config, Arm arm) {
    config.validate();
    const int d = config.width;
    const int latent = config.latent_width;
    std::vector<ParamSpec> specs;
    std::size_t offset = 0;

    add_spec(specs, offset, "embed.point.w", config.point_feature_dim(), d);
    add_spec(specs, offset, "embed.point.b", 1, d);
    add_attention(specs, offset, "enc.cross.u", d);
    if (arm == Arm::Full) add_attention(specs, offset, "enc.cross.a", d);
    for (int i = 0; i < config.enc_layers; ++i)
        add_block(specs, offset, "enc.self." + std::to_string(i), d);
    add_spec(specs, offset, "enc.norm.g", 1, d);
    add_spec(specs, offset, "enc.norm.b", 1, d);
    add_spec(specs, offset, "enc.mean.w", d, latent);
    add_spec(specs, offset, "enc.mean.b", 1, latent);
    add_spec(specs, offset, "enc.logvar.w", d, latent);
    add_spec(specs, offset, "enc.logvar.b", 1, latent);

    add_spec(specs, offset, "dec.in.w", latent, d);
    add_spec(specs, offset, "dec.in.b", 1, d);
    for (int i = 0; i < config.dec_layers; ++i)
        add_block(specs, offset, "dec.self." + std::to_string(i), d);
    add_spec(specs, offset, "dec.norm.g", 1, d);
    add_spec(specs, offset, "dec.norm.b", 1, d);
    add_spec(specs, offset, "embed.query.w", config.query_feature_dim(), d);
    add_spec(specs, offset, "embed.query.b", 1, d);
    add_spec(specs, offset, "dec.cross.lnq.g", 1, d);
    add_spec(specs, offset, "dec.cross.lnq.b", 1, d);
    add_attention(specs, offset, "dec.cross", d);
    add_spec(specs, offset, "dec.cross.ln2.g", 1, d);
    add_spec(specs, offset, "dec.cross.ln2.b", 1, d);
    add_spec(specs, offset, "dec.cross.mlp.w1", d, 4 * d);
    add_spec(specs, offset, "dec.cross.mlp.b1", 1, 4 * d);
    add_spec(specs, offset, "dec.cross.mlp.w2", 4 * d, d);
    add_spec(specs, offset, "dec.cross.mlp.b2", 1, d);
    add_spec(specs, offset, "dec.out.w", d, 1);
    add_spec(specs, offset, "dec.out.b", 1, 1);
    return specs;
}

ModelParameters ModelParameters::init(const EncoderConfig& config, Arm arm, std::uint64_t seed) {
    ModelParameters p;
    p.config = config;
    p.arm = arm;
    p.specs = parameter_layout(config, arm);
    std::size_t total = 0;
    for (const ParamSpec& s : p.specs) total += s.size();
    p.flat.assign(total, 0.0);

    Rng rng(seed);
    for (const ParamSpec& s : p.specs) {
        if (ends_with(s.name, ".g")) {
            std::fill_n(p.flat.begin() + s.offset, s.size(), 1.0);
        } else if (s.name.rfind("enc.logvar.", 0) == 0 || s.rows == 1) {
            // logvar head and all biases start at zero
        } else {
            double bound = 1.0 / std::sqrt(static_cast<double>(s.rows));
            for (std::size_t i = 0; i < s.size(); ++i)
                p.flat[s.offset + i] = rng.uniform(-bound, bound);
        }
    }
    return p;
}

const ParamSpec& ModelParameters::spec(const std::string& name) const {
    for (const ParamSpec& s : specs)
        if (s.name == name) return s;
    throw std::invalid_argument("unknown parameter: " + name);
}

Mat ModelParameters::tensor(const std::string& name) const {
    const ParamSpec& s = spec(name);
    Mat m(s.rows, s.cols);
    std::copy_n(flat.begin() + s.offset, s.size(), m.v.begin());
    return m;
}

void ModelParameters::set_tensor(const std::string& name, const Mat& m) {
    const ParamSpec& s = spec(name);
    if (m.rows != s.rows || m.cols != s.cols)
        throw std::invalid_argument("set_tensor: shape mismatch for " + name);
    std::copy_n(m.v.begin(), s.size(), flat.begin() + s.offset);
}

void copy_matching_parameters(ModelParameters& dst, const ModelParameters& src) {
    for (const ParamSpec& s : dst.specs) {
        for (const ParamSpec& t : src.specs) {
            if (t.name == s.name) {
                std::copy_n(src.flat.begin() + t.offset, s.size(), dst.flat.begin() + s.offset);
                break;
            }
        }
    }
}

std::vector<double> fourier_embed(const Vec3& p, int frequencies) {
    std::vector<double> out;
    out.reserve(3 + 6 * static_cast<std::size_t>(frequencies));
    out.push_back(p.x);
    out.push_back(p.y);
    out.push_back(p.z);
    constexpr double pi = 3.14159265358979323846;
    for (int k = 0; k < frequencies; ++k) {
        double w = std::ldexp(pi, k);  // 2^k * pi
        for (int axis = 0; axis < 3; ++axis) out.push_back(std::sin(w * p[axis]));
        for (int axis = 0; axis < 3; ++axis) out.push_back(std::cos(w * p[axis]));
    }
    return out;
}

Mat point_feature_matrix(const std::vector<Vec3>& positions, const std::vector<Vec3>& normals,
                         const EncoderConfig& config) {
    Mat m(static_cast<int>(positions.size()), config.point_feature_dim());
    for (std::size_t i = 0; i < positions.size(); ++i) {
        std::vector<double> f = fourier_embed(positions[i], config.fourier_freqs);
        int c = 0;
        for (double x : f) m.at(static_cast<int>(i), c++) = x;
        if (config.include_normals) {
            const Vec3& n = normals[i];
            m.at(static_cast<int>(i), c++) = n.x;
            m.at(static_cast<int>(i), c++) = n.y;
            m.at(static_cast<int>(i), c++) = n.z;
        }
    }
    return m;
}

Mat query_feature_matrix(const std::vector<Vec3>& queries, const EncoderConfig& config) {
    Mat m(static_cast<int>(queries.size()), config.query_feature_dim());
    for (std::size_t i = 0; i < queries.size(); ++i) {
        std::vector<double> f = fourier_embed(queries[i], config.fourier_freqs);
        for (int c = 0; c < static_cast<int>(f.size()); ++c) m.at(static_cast<int>(i), c) = f[c];
    }
    return m;
}

namespace nn {

Var multihead_attention(Tape& tape, Var queries, Var kv, const AttnVars& p, int heads) {
    Var q = tape.add_row(tape.matmul(queries, p.wq), p.bq);
    Var k = tape.add_row(tape.matmul(kv, p.wk), p.bk);
    Var v = tape.add_row(tape.matmul(kv, p.wv), p.bv);
    int d = tape.value(q).cols;
    if (d % heads != 0) throw std::invalid_argument("attention: width not divisible by heads");
    int dh = d / heads;
    double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));
    std::vector<Var> outputs;
    outputs.reserve(heads);
    for (int h = 0; h < heads; ++h) {
        Var qh = tape.slice_cols(q, h * dh, dh);
        Var kh = tape.slice_cols(k, h * dh, dh);
        Var vh = tape.slice_cols(v, h * dh, dh);
        Var scores = tape.scale(tape.matmul_bt(qh, kh), inv_sqrt);
        Var weights = tape.softmax_rows(scores);
        outputs.push_back(tape.matmul(weights, vh));
    }
    return tape.add_row(tape.matmul(tape.concat_cols(outputs), p.wo), p.bo);
}

Var transformer_block(Tape& tape, Var x, const LayerNormVars& ln1, const AttnVars& attn,
                      const LayerNormVars& ln2, const MlpVars& mlp, int heads) {
    Var h = tape.layer_norm(x, ln1.gain, ln1.bias);
    x = tape.add(x, multihead_attention(tape, h, h, attn, heads));
    Var m = tape.layer_norm(x, ln2.gain, ln2.bias);
    Var ff = tape.add_row(tape.matmul(m, mlp.w1), mlp.b1);
    ff = tape.gelu(ff);
    ff = tape.add_row(tape.matmul(ff, mlp.w2), mlp.b2);
    return tape.add(x, ff);
}

}  // namespace nn

namespace {

struct CloudPart {
    std::vector<Vec3> positions, normals;
    std::vector<PointLabel> labels;
};

CloudPart select_label(const SurfacePointCloud& cloud, PointLabel label) {
    CloudPart part;
    for (std::size_t i = 0; i < cloud.positions.size(); ++i) {
        if (cloud.labels[i] != label) continue;
        part.positions.push_back(cloud.positions[i]);
        part.normals.push_back(cloud.normals[i]);
        part.labels.push_back(cloud.labels[i]);
    }
    return part;
}

// Lexicographic canonical order makes downstream FPS independent of the
// caller's row ordering.
std::vector<std::size_t> canonical_order(const std::vector<Vec3>& positions,
                                         const std::vector<Vec3>& normals) {
    std::vector<std::size_t> order(positions.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const Vec3& pa = positions[a];
        const Vec3& pb = positions[b];
        if (pa.x != pb.x) return pa.x < pb.x;
        if (pa.y != pb.y) return pa.y < pb.y;
        if (pa.z != pb.z) return pa.z < pb.z;
        const Vec3& na = normals[a];
        const Vec3& nb = normals[b];
        if (na.x != nb.x) return na.x < nb.x;
        if (na.y != nb.y) return na.y < nb.y;
        return na.z < nb.z;
    });
    return order;
}

void append_fps_selection(const CloudPart& part, std::size_t k, std::uint64_t seed,
                          SurfacePointCloud& out) {
    if (k == 0) return;
    std::vector<std::size_t> order = canonical_order(part.positions, part.normals);
    std::vector<Vec3> sorted(part.positions.size());
    for (std::size_t i = 0; i < order.size(); ++i) sorted[i] = part.positions[order[i]];
    for (std::size_t idx : fps(sorted, k, seed)) {
        std::size_t src = order[idx];
        out.positions.push_back(part.positions[src]);
        out.normals.push_back(part.normals[src]);
        out.labels.push_back(part.labels[src]);
    }
}

struct GraphBuilder {
    Tape& tape;
    const ModelParameters& params;
    std::map<std::string, Var> by_name;

    Var operator()(const std::string& name) const {
        auto it = by_name.find(name);
        if (it == by_name.end()) throw std::invalid_argument("missing parameter: " + name);
        return it->second;
    }

    nn::AttnVars attn(const std::string& prefix) const {
        const GraphBuilder& p = *this;
        return {p(prefix + ".wq"), p(prefix + ".bq"), p(prefix + ".wk"), p(prefix + ".bk"),
                p(prefix + ".wv"), p(prefix + ".bv"), p(prefix + ".wo"), p(prefix + ".bo")};
    }

    Var linear(Var x, const std::string& prefix) const {
        return tape.add_row(tape.matmul(x, (*this)(prefix + ".w")), (*this)(prefix + ".b"));
    }

    Var block(Var x, const std::string& prefix) const {
        const GraphBuilder& p = *this;
        return nn::transformer_block(tape, x,
                                     {p(prefix + ".ln1.g"), p(prefix + ".ln1.b")},
                                     attn(prefix + ".attn"),
                                     {p(prefix + ".ln2.g"), p(prefix + ".ln2.b")},
                                     {p(prefix + ".mlp.w1"), p(prefix + ".mlp.b1"),
                                      p(prefix + ".mlp.w2"), p(prefix + ".mlp.b2")},
                                     params.config.heads);
    }

    Var norm(Var x, const std::string& prefix) const {
        return tape.layer_norm(x, (*this)(prefix + ".g"), (*this)(prefix + ".b"));
    }

    Var decode(Var z, const std::vector<Vec3>& queries) const {
        const EncoderConfig& config = params.config;
        Var y = linear(z, "dec.in");
        for (int i = 0; i < config.dec_layers; ++i) y = block(y, "dec.self." + std::to_string(i));
        y = norm(y, "dec.norm");
        Var qfeat = tape.leaf(query_feature_matrix(queries, config));
        Var qemb = linear(qfeat, "embed.query");
        // Residual cross block: the query embedding feeds the head directly so
        // the output is not limited to convex mixes of token values.
        Var qn = norm(qemb, "dec.cross.lnq");
        Var o = tape.add(qemb, nn::multihead_attention(tape, qn, y, attn("dec.cross"), config.heads));
        const GraphBuilder& p = *this;
        Var m = norm(o, "dec.cross.ln2");
        m = tape.gelu(tape.add_row(tape.matmul(m, p("dec.cross.mlp.w1")), p("dec.cross.mlp.b1")));
        m = tape.add_row(tape.matmul(m, p("dec.cross.mlp.w2")), p("dec.cross.mlp.b2"));
        o = tape.add(o, m);
        return tape.sigmoid(linear(o, "dec.out"));
    }
};

}  // namespace

SurfacePointCloud build_ps(const SurfacePointCloud& uniform_part,
                           const SurfacePointCloud& salient_part, std::size_t n_s1,
                           std::size_t n_s2, std::uint64_t seed) {
    CloudPart u{uniform_part.positions, uniform_part.normals, uniform_part.labels};
    CloudPart a{salient_part.positions, salient_part.normals, salient_part.labels};
    std::size_t n2 = std::min(n_s2, a.positions.size());
    std::size_t n1 = n_s1 + (n_s2 - n2);  // shortfall moves to the uniform branch
    if (n1 > u.positions.size())
        throw std::invalid_argument("build_ps: requested more points than available");
    SurfacePointCloud ps;
    ps.seed = seed;
    append_fps_selection(u, n1, seed, ps);
    append_fps_selection(a, n2, seed, ps);
    return ps;
}

void build_forward(const SurfacePointCloud& cloud, const std::vector<Vec3>& queries,
                   const std::vector<double>& labels, const ModelParameters& params,
                   const ForwardOptions& options, ForwardGraph& out) {
    const EncoderConfig& config = params.config;
    config.validate();
    if (options.n_s == 0) throw std::invalid_argument("build_forward: n_s must be positive");

    GraphBuilder p{out.tape, params, {}};
    out.param_vars.clear();
    out.param_vars.reserve(params.specs.size());
    for (const ParamSpec& s : params.specs) {
        Var v = out.tape.leaf(params.tensor(s.name));
        out.param_vars.push_back(v);
        p.by_name[s.name] = v;
    }

    CloudPart uniform = select_label(cloud, PointLabel::Uniform);
    CloudPart salient = select_label(cloud, PointLabel::Salient);
    if (uniform.positions.empty()) throw std::invalid_argument("encode: empty uniform cloud");

    std::size_t n_s1 = options.n_s / 2;
    std::size_t n_s2 = options.n_s - n_s1;
    SurfacePointCloud uniform_cloud;
    uniform_cloud.positions = uniform.positions;
    uniform_cloud.normals = uniform.normals;
    uniform_cloud.labels = uniform.labels;
    SurfacePointCloud salient_cloud;
    salient_cloud.positions = salient.positions;
    salient_cloud.normals = salient.normals;
    salient_cloud.labels = salient.labels;
    SurfacePointCloud ps = build_ps(uniform_cloud, salient_cloud, n_s1, n_s2, options.seed);

    Var es = p.linear(out.tape.leaf(point_feature_matrix(ps.positions, ps.normals, config)),
                      "embed.point");

    Var c;
    if (params.arm == Arm::Full) {
        Var eu = p.linear(out.tape.leaf(point_feature_matrix(uniform.positions, uniform.normals,
                                                             config)),
                          "embed.point");
        c = nn::multihead_attention(out.tape, es, eu, p.attn("enc.cross.u"), config.heads);
        if (!salient.positions.empty()) {
            Var ea = p.linear(out.tape.leaf(point_feature_matrix(salient.positions,
                                                                 salient.normals, config)),
                              "embed.point");
            Var ca = nn::multihead_attention(out.tape, es, ea, p.attn("enc.cross.a"),
                                             config.heads);
            c = out.tape.add(c, ca);
        }
    } else {
        // single attention over the whole dense cloud
        Var ed = p.linear(out.tape.leaf(point_feature_matrix(cloud.positions, cloud.normals,
                                                             config)),
                          "embed.point");
        c = nn::multihead_attention(out.tape, es, ed, p.attn("enc.cross.u"), config.heads);
    }

    out.features = c;
    for (int i = 0; i < config.enc_layers; ++i) c = p.block(c, "enc.self." + std::to_string(i));
    c = p.norm(c, "enc.norm");
    out.mean = p.linear(c, "enc.mean");
    out.logvar = p.linear(c, "enc.logvar");

    if (options.stochastic) {
        Rng noise_rng(options.seed ^ 0xd1b54a32d192ed03ull);
        Mat noise(static_cast<int>(options.n_s), config.latent_width);
        for (double& x : noise.v) x = noise_rng.normal();
        out.z = out.tape.reparameterize(out.mean, out.logvar, noise);
    } else {
        out.z = out.mean;
    }

    if (!queries.empty()) {
        out.pred = p.decode(out.z, queries);
        if (!labels.empty()) {
            if (labels.size() != queries.size())
                throw std::invalid_argument("build_forward: label count mismatch");
            Mat target(static_cast<int>(labels.size()), 1);
            target.v.assign(labels.begin(), labels.end());
            Var rec = out.tape.mse(out.pred, target);
            Var kl = out.tape.kl_divergence(out.mean, out.logvar);
            out.loss = out.tape.add_scaled(rec, kl, options.kl_weight);
        }
    }
}

LatentCode encode(const SurfacePointCloud& cloud, const ModelParameters& params, std::size_t n_s,
                  std::uint64_t seed, bool stochastic) {
    ForwardGraph graph;
    ForwardOptions options;
    options.n_s = n_s;
    options.seed = seed;
    options.stochastic = stochastic;
    build_forward(cloud, {}, {}, params, options, graph);
    LatentCode code;
    code.z = graph.tape.value(graph.z);
    code.mean = graph.tape.value(graph.mean);
    code.logvar = graph.tape.value(graph.logvar);
    for (double x : code.z.v)
        if (!std::isfinite(x)) throw std::runtime_error("encode: non-finite latent");
    return code;
}

std::vector<double> decode_occupancy(const Mat& z, const std::vector<Vec3>& queries,
                                     const ModelParameters& params) {
    std::vector<double> out;
    out.reserve(queries.size());
    const std::size_t chunk = 4096;
    for (std::size_t start = 0; start < queries.size(); start += chunk) {
        std::size_t stop = std::min(queries.size(), start + chunk);
        std::vector<Vec3> part(queries.begin() + start, queries.begin() + stop);
        Tape tape;
        GraphBuilder p{tape, params, {}};
        for (const ParamSpec& s : params.specs) p.by_name[s.name] = tape.leaf(params.tensor(s.name));
        Var pred = p.decode(tape.leaf(z), part);
        const Mat& values = tape.value(pred);
        out.insert(out.end(), values.v.begin(), values.v.end());
    }
    return out;
}

std::vector<double> parameter_gradients(ForwardGraph& graph, const ModelParameters& params) {
    if (graph.loss < 0) throw std::invalid_argument("parameter_gradients: graph has no loss");
    graph.tape.backward(graph.loss);
    std::vector<double> grads(params.count(), 0.0);
    for (std::size_t i = 0; i < params.specs.size(); ++i) {
        const Mat& g = graph.tape.grad(graph.param_vars[i]);
        std::copy(g.v.begin(), g.v.end(), grads.begin() + params.specs[i].offset);
    }
    return grads;
}

}  // namespace dora
