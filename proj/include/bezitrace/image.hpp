#ifndef BEZITRACE_IMAGE_HPP
#define BEZITRACE_IMAGE_HPP

#include <array>
#include <cstdint>
#include <vector>

namespace bezitrace {

/// Row-major, channel-interleaved raster with values in [0,1].
struct RasterImage {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<double> pixels;

    RasterImage() = default;
    RasterImage(int w, int h, int ch, double fill = 0.0)
        : width(w), height(h), channels(ch),
          pixels(static_cast<size_t>(w) * h * ch, fill) {}

    double& at(int x, int y, int c) {
        return pixels[(static_cast<size_t>(y) * width + x) * channels + c];
    }
    double at(int x, int y, int c) const {
        return pixels[(static_cast<size_t>(y) * width + x) * channels + c];
    }
    std::array<double, 3> rgb(int x, int y) const {
        if (channels == 1) {
            double v = at(x, y, 0);
            return {v, v, v};
        }
        return {at(x, y, 0), at(x, y, 1), at(x, y, 2)};
    }
};

}  // namespace bezitrace

#endif
