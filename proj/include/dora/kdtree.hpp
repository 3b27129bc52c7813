#pragma once

#include <algorithm>
#include <limits>
#include <numeric>
#include <vector>

#include "dora/vec3.hpp"

namespace dora {

// Exact nearest-neighbor index over a fixed 3D point set. Median-split,
// built once, immutable afterwards.
class KdTree {
public:
    explicit KdTree(std::vector<Vec3> points) : points_(std::move(points)) {
        order_.resize(points_.size());
        std::iota(order_.begin(), order_.end(), 0u);
        nodes_.reserve(points_.size());
        if (!points_.empty()) root_ = build(0, points_.size());
    }

    std::size_t size() const { return points_.size(); }

    // Index and squared distance of the nearest point. `skip` excludes one
    // index (self-queries); alive() may mask points out entirely.
    struct Result {
        std::size_t index = SIZE_MAX;
        double dist2 = std::numeric_limits<double>::infinity();
    };

    Result nearest(const Vec3& q, std::size_t skip = SIZE_MAX,
                   const std::vector<bool>* alive = nullptr) const {
        Result best;
        if (root_ >= 0) search(root_, q, skip, alive, best);
        return best;
    }

    double nearest_distance(const Vec3& q) const { return std::sqrt(nearest(q).dist2); }

private:
    struct Node {
        std::size_t point;  // index into points_
        int axis;
        int left = -1, right = -1;
    };

    int build(std::size_t lo, std::size_t hi) {
        Vec3 bmin = points_[order_[lo]], bmax = bmin;
        for (std::size_t i = lo; i < hi; ++i) {
            bmin = min3(bmin, points_[order_[i]]);
            bmax = max3(bmax, points_[order_[i]]);
        }
        Vec3 ext = bmax - bmin;
        int axis = 0;
        if (ext.y > ext[axis]) axis = 1;
        if (ext.z > ext[axis]) axis = 2;

        std::size_t mid = (lo + hi) / 2;
        std::nth_element(order_.begin() + lo, order_.begin() + mid, order_.begin() + hi,
                         [&](std::size_t a, std::size_t b) {
                             return points_[a][axis] < points_[b][axis];
                         });
        Node node;
        node.point = order_[mid];
        node.axis = axis;
        int id = static_cast<int>(nodes_.size());
        nodes_.push_back(node);
        if (mid > lo) nodes_[id].left = build(lo, mid);
        if (mid + 1 < hi) nodes_[id].right = build(mid + 1, hi);
        return id;
    }

    void search(int id, const Vec3& q, std::size_t skip, const std::vector<bool>* alive,
                Result& best) const {
        const Node& node = nodes_[id];
        const Vec3& p = points_[node.point];
        if (node.point != skip && (!alive || (*alive)[node.point])) {
            double d2 = norm2(p - q);
            if (d2 < best.dist2) {
                best.dist2 = d2;
                best.index = node.point;
            }
        }
        double delta = q[node.axis] - p[node.axis];
        int near = delta < 0.0 ? node.left : node.right;
        int far = delta < 0.0 ? node.right : node.left;
        if (near >= 0) search(near, q, skip, alive, best);
        if (far >= 0 && delta * delta < best.dist2) search(far, q, skip, alive, best);
    }

    std::vector<Vec3> points_;
    std::vector<std::size_t> order_;
    std::vector<Node> nodes_;
    int root_ = -1;
};

}  // namespace dora
