#include <cstring>
#include <fstream>
#include <stdexcept>

#include "dora/pointcloud.hpp"

namespace dora {

namespace {

constexpr char kMagic[4] = {'D', 'O', 'R', 'A'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_le(std::ostream& out, T value) {
    // assumes little-endian host
    out.write(reinterpret_cast<const char*>(&value), sizeof(value));
}

template <typename T>
T read_le(std::istream& in) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(value));
    return value;
}

void write_f32_vec3(std::ostream& out, const Vec3& v) {
    write_le(out, static_cast<float>(v.x));
    write_le(out, static_cast<float>(v.y));
    write_le(out, static_cast<float>(v.z));
}

Vec3 read_f32_vec3(std::istream& in) {
    Vec3 v;
    v.x = read_le<float>(in);
    v.y = read_le<float>(in);
    v.z = read_le<float>(in);
    return v;
}

}  // namespace

void save_cloud_ply(const SurfacePointCloud& cloud, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "ply\nformat binary_little_endian 1.0\n"
        << "element vertex " << cloud.size() << "\n"
        << "property float x\nproperty float y\nproperty float z\n"
        << "property float nx\nproperty float ny\nproperty float nz\n"
        << "property uchar label\n"
        << "end_header\n";
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        write_f32_vec3(out, cloud.positions[i]);
        write_f32_vec3(out, cloud.normals[i]);
        write_le(out, static_cast<std::uint8_t>(cloud.labels[i]));
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

void save_cloud_binary(const SurfacePointCloud& cloud, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out.write(kMagic, 4);
    write_le(out, kVersion);
    write_le(out, cloud.seed);
    write_le(out, static_cast<std::uint64_t>(cloud.size()));
    for (const Vec3& p : cloud.positions) write_f32_vec3(out, p);
    for (const Vec3& n : cloud.normals) write_f32_vec3(out, n);
    for (PointLabel l : cloud.labels) write_le(out, static_cast<std::uint8_t>(l));
    if (!out) throw std::runtime_error("write failed: " + path);
}

SurfacePointCloud load_cloud_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error(path + ": bad magic");
    auto version = read_le<std::uint32_t>(in);
    if (version != kVersion) throw std::runtime_error(path + ": unsupported version");
    SurfacePointCloud cloud;
    cloud.seed = read_le<std::uint64_t>(in);
    auto count = read_le<std::uint64_t>(in);
    cloud.positions.resize(count);
    cloud.normals.resize(count);
    cloud.labels.resize(count);
    for (auto& p : cloud.positions) p = read_f32_vec3(in);
    for (auto& n : cloud.normals) n = read_f32_vec3(in);
    for (auto& l : cloud.labels) l = static_cast<PointLabel>(read_le<std::uint8_t>(in));
    if (!in) throw std::runtime_error(path + ": truncated");
    return cloud;
}

}  // namespace dora
