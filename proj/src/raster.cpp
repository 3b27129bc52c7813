#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "dora/raster.hpp"

namespace dora {

NormalMapImage render_normal_map(const TriangleMesh& mesh, const CameraView& view, int res) {
    if (res < 16) throw std::invalid_argument("render_normal_map: res must be >= 16");
    NormalMapImage image(res, res);
    std::vector<double> zbuffer(static_cast<std::size_t>(res) * res,
                                -std::numeric_limits<double>::infinity());

    auto pixel_x = [&](double x) { return (x + 1.0) * 0.5 * res - 0.5; };
    auto pixel_y = [&](double y) { return (1.0 - y) * 0.5 * res - 0.5; };  // row 0 at y = +1

    for (std::size_t fi = 0; fi < mesh.face_count(); ++fi) {
        if (face_degenerate(mesh, fi)) continue;
        const auto& f = mesh.faces[fi];
        Vec3 a = view.to_camera(mesh.vertices[f[0]]);
        Vec3 b = view.to_camera(mesh.vertices[f[1]]);
        Vec3 c = view.to_camera(mesh.vertices[f[2]]);

        double ax = pixel_x(a.x), ay = pixel_y(a.y);
        double bx = pixel_x(b.x), by = pixel_y(b.y);
        double cx = pixel_x(c.x), cy = pixel_y(c.y);

        double area = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax);
        if (area == 0.0) continue;  // edge-on in this view

        int x0 = std::max(0, static_cast<int>(std::floor(std::min({ax, bx, cx}))));
        int x1 = std::min(res - 1, static_cast<int>(std::ceil(std::max({ax, bx, cx}))));
        int y0 = std::max(0, static_cast<int>(std::floor(std::min({ay, by, cy}))));
        int y1 = std::min(res - 1, static_cast<int>(std::ceil(std::max({ay, by, cy}))));
        if (x0 > x1 || y0 > y1) continue;

        Vec3 world_n = face_normal(mesh, fi);
        Vec3 n_cam = normalized(view.to_camera(world_n));
        Vec3 encoded = (n_cam + Vec3{1, 1, 1}) * 0.5;

        for (int py = y0; py <= y1; ++py) {
            for (int px = x0; px <= x1; ++px) {
                double x = px, y = py;
                double w0 = (bx - ax) * (y - ay) - (by - ay) * (x - ax);
                double w1 = (cx - bx) * (y - by) - (cy - by) * (x - bx);
                double w2 = (ax - cx) * (y - cy) - (ay - cy) * (x - cx);
                bool inside = area > 0.0 ? (w0 >= 0.0 && w1 >= 0.0 && w2 >= 0.0)
                                         : (w0 <= 0.0 && w1 <= 0.0 && w2 <= 0.0);
                if (!inside) continue;
                // barycentric depth; w0 is opposite vertex c, w2 opposite b
                double l0 = w1 / area, l1 = w2 / area, l2 = w0 / area;
                double depth = l0 * a.z + l1 * b.z + l2 * c.z;
                std::size_t idx = static_cast<std::size_t>(py) * res + px;
                if (depth > zbuffer[idx]) {
                    zbuffer[idx] = depth;
                    image.set_pixel(px, py, encoded);
                }
            }
        }
    }
    return image;
}

}  // namespace dora
