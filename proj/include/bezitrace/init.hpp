#ifndef BEZITRACE_INIT_HPP
#define BEZITRACE_INIT_HPP

#include <array>
#include <vector>

#include "bezitrace/geometry.hpp"
#include "bezitrace/image.hpp"

namespace bezitrace {

struct LabelMap {
    int width = 0;
    int height = 0;
    std::vector<int> labels;  // contiguous 0..region_count-1
    int region_count = 0;

    int label(int x, int y) const {
        return labels[static_cast<size_t>(y) * width + x];
    }
};

/// Graph-based merge segmentation on the 4-connected pixel grid with
/// RGB-distance edge weights (0..255 scale); regions below min_size are
/// absorbed by their nearest neighbor. Deterministic: ties break on edge
/// order.
LabelMap segment_regions(const RasterImage& image, double k = 300.0,
                         int min_size = 16);

/// Closed boundary loop on the pixel-corner lattice, pixel units.
/// `outer` marks the outer contour; holes come out negatively oriented.
struct PixelContour {
    std::vector<Point> points;  // closed: last != first, wrap implied
    bool outer = true;
};

/// Outer contour first, then any hole contours.
std::vector<PixelContour> trace_boundary(const LabelMap& labels, int region);

/// Least-squares piecewise-cubic fit of a closed contour. Corner
/// candidates (turning angle above the threshold) seed the sections; each
/// section is fit with tangent-constrained least squares, reparameterized
/// by Newton correction, and split at the worst point until max error
/// <= err_tol. Degenerate contours give a minimal two-segment bezigon.
Bezigon fit_bezigon(const std::vector<Point>& contour, double err_tol,
                    double corner_angle_deg = 60.0);

struct InitParams {
    double k = 300.0;
    int min_size = 16;
    double err_tol_px = 1.0;
    double corner_angle_deg = 60.0;
    bool keep_background = false;
    int smooth_passes = 2;
};

/// Starting shape in input-pixel coordinates.
struct InitShape {
    Bezigon bezigon;
    std::array<double, 3> color{0, 0, 0};
    int region = 0;
    double area_px = 0.0;
};

/// segment -> trace -> fit, one shape per region, largest region treated
/// as the page background and skipped unless keep_background. Shapes come
/// back sorted by area (largest first) for back-to-front painting.
std::vector<InitShape> initialize(const RasterImage& image,
                                  const InitParams& params = {});

}  // namespace bezitrace

#endif
