#ifndef BEZITRACE_ENERGY_HPP
#define BEZITRACE_ENERGY_HPP

#include <array>
#include <vector>

#include "bezitrace/geometry.hpp"
#include "bezitrace/image.hpp"
#include "bezitrace/raster.hpp"
#include "bezitrace/shape.hpp"

namespace bezitrace {

/// Weights of the four prior terms. Defaults follow the reference
/// configuration: strong self-intersection penalty, mild others.
struct EnergyWeights {
    double spt = 1.0;
    double apt = 0.08;
    double hpt = 0.1;
    double lpt = 0.1;
};

/// Everything the data term needs besides the shape: the (padded) input,
/// the grid, a background estimate, the valid-pixel mask, and the fixed
/// normalization length l0 measured on the initial bezigon.
struct EnergyContext {
    RasterImage input;       // grid.size() x grid.size(), 3 channels
    RasterGrid grid;
    RasterImage background;  // same shape as input
    std::vector<uint8_t> mask;  // size()^2 entries; empty means all valid
    double l0 = 1.0;            // initial arc length, normalized units
    bool use_l0 = true;
    double intersection_tol = 1e-4;
    // Pixels per normalized unit. The prior terms are measured on
    // pixel-scaled geometry so that the default weights balance the same
    // way at every resolution; 0 means "use the grid size".
    double unit_scale = 0.0;

    double data_scale() const { return use_l0 ? 1.0 / l0 : 1.0; }
    double px_scale() const {
        return unit_scale > 0.0 ? unit_scale : grid.size();
    }
    bool valid(int x, int y) const {
        return mask.empty() ||
               mask[static_cast<size_t>(y) * grid.size() + x] != 0;
    }
};

/// Term values as combined into the objective; the length-bearing prior
/// terms (SPT, HPT, LPT) are reported in pixel units per
/// EnergyContext::px_scale, so total = e_data + sum of weighted terms.
struct EnergyBreakdown {
    double e_data = 0.0;
    double e_spt = 0.0;
    double e_apt = 0.0;
    double e_hpt = 0.0;
    double e_lpt = 0.0;
    double total = 0.0;
};

/// Weights rescaled so that unit-agnostic prior evaluations on normalized
/// geometry behave like pixel-unit measurements.
inline EnergyWeights effective_weights(const EnergyWeights& w,
                                       double px_scale) {
    return {w.spt * px_scale, w.apt, w.hpt / px_scale, w.lpt * px_scale};
}

constexpr double kEpsHandle = 1e-9;

double data_energy(const VectorShape& shape, const EnergyContext& ctx);

struct DataGradient {
    std::vector<double> geometry;  // 6N, Bezigon::to_params layout
    std::array<double, 3> color{0, 0, 0};
    DegeneracyFlags flags;
};
/// Analytic gradient of the data term. When `segments` is given, only those
/// segments' geometric derivatives are computed (for piecewise solves).
DataGradient data_gradient(const VectorShape& shape, const EnergyContext& ctx,
                           const std::vector<int>* segments = nullptr);

/// Self-intersection prior: sum over detected crossings of the shorter
/// enclosed arc length. Zero for simple curves.
double e_spt(const Bezigon& bezigon, double intersection_tol = 1e-4);
/// Same sum evaluated at a frozen crossing set (the optimizer's surrogate).
double e_spt_fixed(const Bezigon& bezigon,
                   const std::vector<IntersectionPair>& crossings);

/// Angle-variation prior: sum of joint turning angles in [0, pi].
double e_apt(const Bezigon& bezigon, DegeneracyFlags* flags = nullptr);
double joint_angle(const Bezigon& bezigon, int j,
                   DegeneracyFlags* flags = nullptr);

/// Inverse-barrier handle prior: sum of reciprocal handle lengths.
double e_hpt(const Bezigon& bezigon, DegeneracyFlags* flags = nullptr);

/// Curve-length prior: total arc length.
double e_lpt(const Bezigon& bezigon);

/// Weighted analytic gradient of the prior sum. The SPT part holds the
/// partition fixed (crossings detected here unless supplied) and
/// differentiates the arc lengths only; APT/HPT are closed-form, LPT
/// differentiates a fixed quadrature rule.
std::vector<double> prior_gradient(
    const Bezigon& bezigon, const EnergyWeights& weights,
    const std::vector<IntersectionPair>* fixed_crossings = nullptr,
    DegeneracyFlags* flags = nullptr);

EnergyBreakdown total_energy(const VectorShape& shape,
                             const EnergyContext& ctx,
                             const EnergyWeights& weights);

// Internal pieces reused by the solver's localized evaluations.
namespace detail {
double apt_joint_gradient(const Bezigon& bz, int j, std::vector<double>& grad,
                          double weight, DegeneracyFlags* flags);
void hpt_segment_gradient(const Bezigon& bz, int j, std::vector<double>& grad,
                          double weight, DegeneracyFlags* flags);
void lpt_segment_gradient(const Bezigon& bz, int j, std::vector<double>& grad,
                          double weight, double t0 = 0.0, double t1 = 1.0);
double fixed_quad_length(const Bezigon& bz, double t1, double t2);
void spt_fixed_gradient(const Bezigon& bz,
                        const std::vector<IntersectionPair>& crossings,
                        std::vector<double>& grad, double weight);
}  // namespace detail

}  // namespace bezitrace

#endif
