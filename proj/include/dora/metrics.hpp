#pragma once

#include <vector>

#include "dora/camera.hpp"
#include "dora/canny.hpp"
#include "dora/mesh.hpp"
#include "dora/raster.hpp"

namespace dora {

struct FScoreResult {
    double precision = 0.0;
    double recall = 0.0;
    double fscore = 0.0;
};

// Precision/recall of point correspondences within distance r, combined
// as 2PR/(P+R). Exact nearest neighbors via a kd-tree.
FScoreResult fscore(const std::vector<Vec3>& pred, const std::vector<Vec3>& gt, double r);

enum class ChamferMode { Symmetric, PredToGt };

// Mean-L2 Chamfer distance. Symmetric form averages the two directed means.
double chamfer(const std::vector<Vec3>& pred, const std::vector<Vec3>& gt,
               ChamferMode mode = ChamferMode::Symmetric);

struct SneOptions {
    int res = kDefaultRenderRes;
    double canny_low = kDefaultCannyLow;
    double canny_high = kDefaultCannyHigh;
    int dilate_radius = 2;
    int dilate_iterations = 1;
};

// Sharp Normal Error: per view, MSE between the encoded GT and predicted
// normal maps inside the dilated Canny mask of the GT map, averaged over
// views with nonempty masks. Throws if every view's mask is empty.
double sne(const TriangleMesh& gt_mesh, const TriangleMesh& pred_mesh,
           const std::vector<CameraView>& views, const SneOptions& options = {});

}  // namespace dora
