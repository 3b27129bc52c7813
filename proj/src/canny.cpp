#include <cmath>
#include <deque>
#include <vector>

#include "dora/canny.hpp"

namespace dora {

namespace {

int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

std::vector<double> gaussian_blur_5x5(const GrayImage& image, double sigma) {
    double kernel[5][5];
    double sum = 0.0;
    for (int j = -2; j <= 2; ++j)
        for (int i = -2; i <= 2; ++i) {
            double v = std::exp(-(i * i + j * j) / (2.0 * sigma * sigma));
            kernel[j + 2][i + 2] = v;
            sum += v;
        }
    std::vector<double> out(static_cast<std::size_t>(image.width) * image.height);
    for (int y = 0; y < image.height; ++y)
        for (int x = 0; x < image.width; ++x) {
            double acc = 0.0;
            for (int j = -2; j <= 2; ++j)
                for (int i = -2; i <= 2; ++i)
                    acc += kernel[j + 2][i + 2] *
                           image.at(clampi(x + i, 0, image.width - 1),
                                    clampi(y + j, 0, image.height - 1));
            out[static_cast<std::size_t>(y) * image.width + x] = acc / sum;
        }
    return out;
}

}  // namespace

EdgeMask canny(const GrayImage& image, double low, double high) {
    int w = image.width, h = image.height;
    EdgeMask result(w, h);
    if (w < 3 || h < 3) return result;

    std::vector<double> blurred = gaussian_blur_5x5(image, 1.4);
    auto src = [&](int x, int y) {
        return blurred[static_cast<std::size_t>(clampi(y, 0, h - 1)) * w + clampi(x, 0, w - 1)];
    };

    std::vector<double> magnitude(static_cast<std::size_t>(w) * h, 0.0);
    std::vector<std::uint8_t> direction(static_cast<std::size_t>(w) * h, 0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double gx = -src(x - 1, y - 1) + src(x + 1, y - 1) - 2.0 * src(x - 1, y) +
                        2.0 * src(x + 1, y) - src(x - 1, y + 1) + src(x + 1, y + 1);
            double gy = -src(x - 1, y - 1) - 2.0 * src(x, y - 1) - src(x + 1, y - 1) +
                        src(x - 1, y + 1) + 2.0 * src(x, y + 1) + src(x + 1, y + 1);
            std::size_t idx = static_cast<std::size_t>(y) * w + x;
            magnitude[idx] = std::hypot(gx, gy);
            double angle = std::atan2(gy, gx) * 180.0 / 3.14159265358979323846;
            if (angle < 0.0) angle += 180.0;
            std::uint8_t bin = 0;  // horizontal gradient
            if (angle >= 22.5 && angle < 67.5) bin = 1;
            else if (angle >= 67.5 && angle < 112.5) bin = 2;
            else if (angle >= 112.5 && angle < 157.5) bin = 3;
            direction[idx] = bin;
        }

    auto mag = [&](int x, int y) {
        if (x < 0 || y < 0 || x >= w || y >= h) return 0.0;
        return magnitude[static_cast<std::size_t>(y) * w + x];
    };

    // 0: none, 1: weak, 2: strong
    std::vector<std::uint8_t> state(static_cast<std::size_t>(w) * h, 0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            std::size_t idx = static_cast<std::size_t>(y) * w + x;
            double m = magnitude[idx];
            if (m < low) continue;
            double before, after;
            switch (direction[idx]) {
                case 0: before = mag(x - 1, y); after = mag(x + 1, y); break;
                case 1: before = mag(x + 1, y - 1); after = mag(x - 1, y + 1); break;
                case 2: before = mag(x, y - 1); after = mag(x, y + 1); break;
                default: before = mag(x - 1, y - 1); after = mag(x + 1, y + 1); break;
            }
            // asymmetric tie rule keeps plateau edges one pixel wide
            if (m > before && m >= after) state[idx] = m >= high ? 2 : 1;
        }

    std::deque<std::pair<int, int>> queue;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (state[static_cast<std::size_t>(y) * w + x] == 2) {
                result.at(x, y) = 1;
                queue.emplace_back(x, y);
            }
    while (!queue.empty()) {
        auto [x, y] = queue.front();
        queue.pop_front();
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                int nx = x + dx, ny = y + dy;
                if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                std::size_t idx = static_cast<std::size_t>(ny) * w + nx;
                if (state[idx] == 1 && !result.at(nx, ny)) {
                    result.at(nx, ny) = 1;
                    queue.emplace_back(nx, ny);
                }
            }
    }
    return result;
}

EdgeMask dilate(const EdgeMask& mask, int radius, int iterations) {
    EdgeMask current = mask;
    for (int it = 0; it < iterations; ++it) {
        EdgeMask next(mask.width, mask.height);
        for (int y = 0; y < mask.height; ++y)
            for (int x = 0; x < mask.width; ++x) {
                if (!current.at(x, y)) continue;
                for (int dy = -radius; dy <= radius; ++dy)
                    for (int dx = -radius; dx <= radius; ++dx) {
                        int nx = x + dx, ny = y + dy;
                        if (nx >= 0 && ny >= 0 && nx < mask.width && ny < mask.height)
                            next.at(nx, ny) = 1;
                    }
            }
        current = std::move(next);
    }
    return current;
}

}  // namespace dora
