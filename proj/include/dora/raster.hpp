#pragma once

#include "dora/camera.hpp"
#include "dora/image.hpp"
#include "dora/mesh.hpp"

namespace dora {

inline constexpr int kDefaultRenderRes = 512;

// Orthographic z-buffer rasterization of per-face geometric normals,
// sampled at pixel centers. Normals are transformed to camera space and
// encoded (n+1)/2. Depth ties keep the lower face index.
NormalMapImage render_normal_map(const TriangleMesh& mesh, const CameraView& view,
                                 int res = kDefaultRenderRes);

}  // namespace dora
