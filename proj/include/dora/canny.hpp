#pragma once

#include "dora/image.hpp"

namespace dora {

inline constexpr double kDefaultCannyLow = 20.0;
inline constexpr double kDefaultCannyHigh = 200.0;

// Classic Canny on an 8-bit grayscale image: 5x5 Gaussian blur (sigma 1.4),
// Sobel gradients, 4-direction non-maximum suppression, double-threshold
// hysteresis. Thresholds apply to the raw Sobel magnitude.
EdgeMask canny(const GrayImage& image, double low = kDefaultCannyLow,
               double high = kDefaultCannyHigh);

// Morphological dilation with a square structuring element of side
// 2*radius + 1, applied `iterations` times.
EdgeMask dilate(const EdgeMask& mask, int radius = 2, int iterations = 1);

}  // namespace dora
