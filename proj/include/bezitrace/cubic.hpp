#ifndef BEZITRACE_CUBIC_HPP
#define BEZITRACE_CUBIC_HPP

#include <array>
#include <vector>

namespace bezitrace {

struct CubicRoots {
    std::vector<double> roots;     // sorted, multiplicity collapsed
    bool identically_zero = false; // every coefficient is (numerically) zero
};

/// Real roots of c3 t^3 + c2 t^2 + c1 t + c0 in [lo, hi], each polished by
/// Newton to ~1e-12. Degrades gracefully to quadratic/linear when leading
/// coefficients vanish.
CubicRoots cubic_roots(const std::array<double, 4>& coeffs, double lo,
                       double hi);

}  // namespace bezitrace

#endif
