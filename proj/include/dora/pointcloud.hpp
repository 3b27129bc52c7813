#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dora/vec3.hpp"

namespace dora {

enum class PointLabel : std::uint8_t { Uniform = 0, Salient = 1 };

struct SurfacePointCloud {
    std::vector<Vec3> positions;
    std::vector<Vec3> normals;
    std::vector<PointLabel> labels;
    std::uint64_t seed = 0;

    std::size_t size() const { return positions.size(); }

    std::size_t count_label(PointLabel l) const {
        std::size_t n = 0;
        for (PointLabel v : labels) n += v == l;
        return n;
    }

    void append(const SurfacePointCloud& other) {
        positions.insert(positions.end(), other.positions.begin(), other.positions.end());
        normals.insert(normals.end(), other.normals.begin(), other.normals.end());
        labels.insert(labels.end(), other.labels.begin(), other.labels.end());
    }
};

// PLY (binary little-endian) with a per-vertex `uchar label` property
// (0=uniform, 1=salient).
void save_cloud_ply(const SurfacePointCloud& cloud, const std::string& path);

// Compact binary format: magic "DORA", u32 version, u64 seed, u64 count,
// then f32 xyz positions, f32 xyz normals, u8 labels.
void save_cloud_binary(const SurfacePointCloud& cloud, const std::string& path);
SurfacePointCloud load_cloud_binary(const std::string& path);

}  // namespace dora
