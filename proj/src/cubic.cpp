#include "bezitrace/cubic.hpp"

#include <algorithm>
#include <cmath>

namespace bezitrace {

namespace {

// coeffs are ascending: c[0] + c[1] t + c[2] t^2 + c[3] t^3
double eval_poly(const std::array<double, 4>& c, double t) {
    return ((c[3] * t + c[2]) * t + c[1]) * t + c[0];
}

double eval_poly_deriv(const std::array<double, 4>& c, double t) {
    return (3.0 * c[3] * t + 2.0 * c[2]) * t + c[1];
}

void polish(const std::array<double, 4>& c, double& t) {
    for (int i = 0; i < 3; ++i) {
        double f = eval_poly(c, t);
        double df = eval_poly_deriv(c, t);
        if (std::abs(df) < 1e-300) return;
        double step = f / df;
        if (!std::isfinite(step) || std::abs(step) > 0.5) return;
        t -= step;
    }
}

}  // namespace

CubicRoots cubic_roots(const std::array<double, 4>& coeffs, double lo,
                       double hi) {
    CubicRoots out;
    double scale = std::max({std::abs(coeffs[0]), std::abs(coeffs[1]),
                             std::abs(coeffs[2]), std::abs(coeffs[3])});
    if (scale == 0.0 || scale < 1e-300) {
        out.identically_zero = true;
        return out;
    }
    std::array<double, 4> c = coeffs;
    for (double& v : c) v /= scale;

    std::vector<double> raw;
    if (std::abs(c[3]) > 1e-13) {
        // Depressed cubic u^3 + p u + q, t = u - c2/(3 c3).
        double a = c[2] / c[3], b = c[1] / c[3], d = c[0] / c[3];
        double shift = a / 3.0;
        double p = b - a * a / 3.0;
        double q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + d;
        double disc = -4.0 * p * p * p - 27.0 * q * q;
        if (disc > 0.0) {
            // Three real roots: trigonometric form.
            double m = 2.0 * std::sqrt(-p / 3.0);
            double arg = 3.0 * q / (p * m);
            arg = std::clamp(arg, -1.0, 1.0);
            double theta = std::acos(arg) / 3.0;
            for (int k = 0; k < 3; ++k)
                raw.push_back(m * std::cos(theta - 2.0 * M_PI * k / 3.0) -
                              shift);
        } else {
            // One real root: Cardano.
            double half_q = 0.5 * q;
            double r = std::sqrt(std::max(0.0, half_q * half_q +
                                                   p * p * p / 27.0));
            double u = std::cbrt(-half_q + r);
            double v = std::cbrt(-half_q - r);
            raw.push_back(u + v - shift);
            if (disc == 0.0 && (p != 0.0 || q != 0.0))
                raw.push_back(-(u + v) / 2.0 - shift);  // double root
        }
    } else if (std::abs(c[2]) > 1e-13) {
        double disc = c[1] * c[1] - 4.0 * c[2] * c[0];
        if (disc >= 0.0) {
            double sq = std::sqrt(disc);
            double q = -0.5 * (c[1] + (c[1] >= 0.0 ? sq : -sq));
            raw.push_back(q / c[2]);
            if (q != 0.0)
                raw.push_back(c[0] / q);
            else
                raw.push_back(0.0);
        }
    } else if (std::abs(c[1]) > 1e-13) {
        raw.push_back(-c[0] / c[1]);
    }  // constant nonzero: no roots

    const double edge = 1e-9 * std::max(1.0, std::abs(hi - lo));
    for (double t : raw) {
        polish(c, t);
        if (t < lo - edge || t > hi + edge) continue;
        t = std::clamp(t, lo, hi);
        out.roots.push_back(t);
    }
    std::sort(out.roots.begin(), out.roots.end());
    out.roots.erase(std::unique(out.roots.begin(), out.roots.end(),
                                [](double a, double b) {
                                    return std::abs(a - b) < 1e-10;
                                }),
                    out.roots.end());
    return out;
}

}  // namespace bezitrace
