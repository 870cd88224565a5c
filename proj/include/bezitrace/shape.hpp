#ifndef BEZITRACE_SHAPE_HPP
#define BEZITRACE_SHAPE_HPP

#include <array>
#include <vector>

#include "bezitrace/geometry.hpp"

namespace bezitrace {

/// A bezigon with one uniform fill color.
struct VectorShape {
    Bezigon bezigon;
    std::array<double, 3> color{0.0, 0.0, 0.0};
};

/// Shapes in back-to-front paint order on a pixel-unit canvas.
struct VectorDocument {
    std::vector<VectorShape> shapes;
    double width = 0.0;
    double height = 0.0;
};

}  // namespace bezitrace

#endif
