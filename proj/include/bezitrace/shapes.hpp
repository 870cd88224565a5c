#ifndef BEZITRACE_SHAPES_HPP
#define BEZITRACE_SHAPES_HPP

#include <cstdint>

#include "bezitrace/geometry.hpp"

namespace bezitrace {

/// Handle length factor that makes a cubic approximate a quarter circle.
constexpr double kCircleHandle = 0.5522847498307936;

/// Circle approximation from `segments` arcs (default four).
Bezigon circle_bezigon(Point center, double radius, int segments = 4);

/// Axis-aligned rectangle with straight edges and 1/3-point handles.
Bezigon rectangle_bezigon(Point lo, Point hi);

/// Rounded axis-aligned square: four straight edges, four corner arcs.
Bezigon rounded_square_bezigon(Point center, double half, double corner);

/// Smooth star with `points` tips (2*points segments).
Bezigon star_bezigon(Point center, double r_outer, double r_inner, int points,
                     double smoothness = 0.3);

/// Random smooth blob: n anchors on a radially perturbed circle with G1-ish
/// handles. Deterministic in `seed`; stays well inside the unit square.
Bezigon random_blob(uint64_t seed, int segments, Point center = {0.5, 0.5},
                    double base_radius = 0.25, double radial_jitter = 0.35);

}  // namespace bezitrace

#endif
