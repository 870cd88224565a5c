#ifndef BEZITRACE_SVG_HPP
#define BEZITRACE_SVG_HPP

#include <stdexcept>
#include <string>

#include "bezitrace/shape.hpp"

namespace bezitrace {

struct SvgParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Minimal bezigon-faithful SVG profile: <path> elements whose data uses
/// M/m, L/l, C/c and Z/z, solid hex fills, optional width/height/viewBox.
/// Anything else is rejected with an error naming the offending command.
/// Line-tos become degenerate cubics (handles at the 1/3 points); each
/// closed subpath becomes one shape. Shapes are orientation-normalized.
VectorDocument load_svg(const std::string& path);
VectorDocument parse_svg(const std::string& text);

/// One path per shape, absolute M/C/Z, six-decimal coordinates, #rrggbb fill.
void save_svg(const VectorDocument& doc, const std::string& path);
std::string write_svg(const VectorDocument& doc);

}  // namespace bezitrace

#endif
