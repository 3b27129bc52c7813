#include <cmath>
#include <stdexcept>

#include "dora/camera.hpp"

namespace dora {

CameraView make_view(const Vec3& direction) {
    Vec3 dir = normalized(direction);
    Vec3 up_hint{0.0, 0.0, 1.0};
    if (std::abs(dot(dir, up_hint)) > 0.999) up_hint = {1.0, 0.0, 0.0};
    Vec3 right = normalized(cross(up_hint, dir));
    Vec3 up = cross(dir, right);
    return {dir, up, right};
}

std::vector<CameraView> default_views(int n) {
    if (n < 1) throw std::invalid_argument("default_views: n must be >= 1");
    const double golden_angle = 3.14159265358979323846 * (3.0 - std::sqrt(5.0));
    std::vector<CameraView> views;
    views.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        double z = 1.0 - 2.0 * (i + 0.5) / n;
        double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        double phi = golden_angle * i;
        views.push_back(make_view({r * std::cos(phi), r * std::sin(phi), z}));
    }
    return views;
}

}  // namespace dora
