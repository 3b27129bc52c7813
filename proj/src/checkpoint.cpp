#include "dora/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace dora {

namespace {

constexpr char kMagic[8] = {'D', 'O', 'R', 'A', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_raw(std::ostream& out, T value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(value));
}

template <typename T>
T read_raw(std::istream& in) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(value));
    if (!in) throw std::runtime_error("checkpoint: truncated file");
    return value;
}

}  // namespace

void save_checkpoint(const ModelParameters& params, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("checkpoint: cannot open " + path);
    out.write(kMagic, sizeof(kMagic));
    write_raw<std::uint32_t>(out, kVersion);
    write_raw<std::int32_t>(out, params.config.width);
    write_raw<std::int32_t>(out, params.config.heads);
    write_raw<std::int32_t>(out, params.config.enc_layers);
    write_raw<std::int32_t>(out, params.config.dec_layers);
    write_raw<std::int32_t>(out, params.config.fourier_freqs);
    write_raw<std::uint8_t>(out, params.config.include_normals ? 1 : 0);
    write_raw<std::int32_t>(out, params.config.latent_width);
    write_raw<std::uint8_t>(out, static_cast<std::uint8_t>(params.arm));
    write_raw<std::uint64_t>(out, static_cast<std::uint64_t>(params.flat.size()));
    out.write(reinterpret_cast<const char*>(params.flat.data()),
              static_cast<std::streamsize>(params.flat.size() * sizeof(double)));
    if (!out) throw std::runtime_error("checkpoint: write failed for " + path);
}

ModelParameters load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("checkpoint: cannot open " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw std::runtime_error("checkpoint: bad magic in " + path);
    if (read_raw<std::uint32_t>(in) != kVersion)
        throw std::runtime_error("checkpoint: unsupported version in " + path);

    EncoderConfig config;
    config.width = read_raw<std::int32_t>(in);
    config.heads = read_raw<std::int32_t>(in);
    config.enc_layers = read_raw<std::int32_t>(in);
    config.dec_layers = read_raw<std::int32_t>(in);
    config.fourier_freqs = read_raw<std::int32_t>(in);
    config.include_normals = read_raw<std::uint8_t>(in) != 0;
    config.latent_width = read_raw<std::int32_t>(in);
    std::uint8_t arm_byte = read_raw<std::uint8_t>(in);
    if (arm_byte > 2) throw std::runtime_error("checkpoint: bad arm in " + path);
    Arm arm = static_cast<Arm>(arm_byte);
    std::uint64_t count = read_raw<std::uint64_t>(in);

    ModelParameters params;
    params.config = config;
    params.arm = arm;
    params.specs = parameter_layout(config, arm);
    std::size_t expected = 0;
    for (const ParamSpec& s : params.specs) expected += s.size();
    if (count != expected) throw std::runtime_error("checkpoint: parameter count mismatch");
    params.flat.resize(count);
    in.read(reinterpret_cast<char*>(params.flat.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
    if (!in) throw std::runtime_error("checkpoint: truncated parameter blob");
    return params;
}

}  // namespace dora
