#include <stdexcept>

#include "dora/kdtree.hpp"
#include "dora/metrics.hpp"

namespace dora {

FScoreResult fscore(const std::vector<Vec3>& pred, const std::vector<Vec3>& gt, double r) {
    if (pred.empty() || gt.empty()) throw std::invalid_argument("fscore: empty point set");
    if (!(r > 0.0)) throw std::invalid_argument("fscore: r must be positive");

    double r2 = r * r;
    KdTree gt_tree(gt);
    std::size_t pred_hits = 0;
    for (const Vec3& p : pred) pred_hits += gt_tree.nearest(p).dist2 <= r2;

    KdTree pred_tree(pred);
    std::size_t gt_hits = 0;
    for (const Vec3& p : gt) gt_hits += pred_tree.nearest(p).dist2 <= r2;

    FScoreResult result;
    result.precision = static_cast<double>(pred_hits) / static_cast<double>(pred.size());
    result.recall = static_cast<double>(gt_hits) / static_cast<double>(gt.size());
    double denom = result.precision + result.recall;
    result.fscore = denom > 0.0 ? 2.0 * result.precision * result.recall / denom : 0.0;
    return result;
}

double chamfer(const std::vector<Vec3>& pred, const std::vector<Vec3>& gt, ChamferMode mode) {
    if (pred.empty() || gt.empty()) throw std::invalid_argument("chamfer: empty point set");

    KdTree gt_tree(gt);
    double pred_to_gt = 0.0;
    for (const Vec3& p : pred) pred_to_gt += std::sqrt(gt_tree.nearest(p).dist2);
    pred_to_gt /= static_cast<double>(pred.size());
    if (mode == ChamferMode::PredToGt) return pred_to_gt;

    KdTree pred_tree(pred);
    double gt_to_pred = 0.0;
    for (const Vec3& p : gt) gt_to_pred += std::sqrt(pred_tree.nearest(p).dist2);
    gt_to_pred /= static_cast<double>(gt.size());
    return 0.5 * pred_to_gt + 0.5 * gt_to_pred;
}

double sne(const TriangleMesh& gt_mesh, const TriangleMesh& pred_mesh,
           const std::vector<CameraView>& views, const SneOptions& options) {
    double total = 0.0;
    std::size_t used_views = 0;
    for (const CameraView& view : views) {
        NormalMapImage gt_map = render_normal_map(gt_mesh, view, options.res);
        EdgeMask edges = canny(to_grayscale(gt_map), options.canny_low, options.canny_high);
        EdgeMask mask = dilate(edges, options.dilate_radius, options.dilate_iterations);
        if (mask.count() == 0) continue;

        NormalMapImage pred_map = render_normal_map(pred_mesh, view, options.res);
        double err = 0.0;
        std::size_t samples = 0;
        for (int y = 0; y < mask.height; ++y)
            for (int x = 0; x < mask.width; ++x) {
                if (!mask.at(x, y)) continue;
                // background pixels inside the mask count with their
                // background encoding: silhouette mismatch is error
                Vec3 d = gt_map.pixel(x, y) - pred_map.pixel(x, y);
                err += (d.x * d.x + d.y * d.y + d.z * d.z) / 3.0;
                ++samples;
            }
        total += err / static_cast<double>(samples);
        ++used_views;
    }
    if (used_views == 0) throw std::runtime_error("sne: all views produced empty masks");
    return total / static_cast<double>(used_views);
}

}  // namespace dora
