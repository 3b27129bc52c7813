#pragma once

#include <vector>

#include "dora/vec3.hpp"

namespace dora {

inline constexpr int kDefaultViewCount = 22;

// Orthographic camera at `direction` looking at the origin, image plane
// covering [-1, 1]^2. right/up/direction form a right-handed frame.
struct CameraView {
    Vec3 direction;  // unit, from origin toward the camera
    Vec3 up;
    Vec3 right;

    Vec3 to_camera(const Vec3& p) const {
        // z grows toward the camera
        return {dot(p, right), dot(p, up), dot(p, direction)};
    }
};

CameraView make_view(const Vec3& direction);

// Deterministic spherical Fibonacci directions (golden-angle lattice).
std::vector<CameraView> default_views(int n = kDefaultViewCount);

}  // namespace dora
