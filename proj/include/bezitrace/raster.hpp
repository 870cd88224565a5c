#ifndef BEZITRACE_RASTER_HPP
#define BEZITRACE_RASTER_HPP

#include <array>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "bezitrace/geometry.hpp"
#include "bezitrace/image.hpp"
#include "bezitrace/shape.hpp"

namespace bezitrace {

/// Dyadic pixel grid: 2^depth x 2^depth pixels over the unit square.
struct RasterGrid {
    int depth = 0;
    int size() const { return 1 << depth; }
};

constexpr int kMaxGridDepth = 14;

/// Basis kind (ex, ey): 1 selects the wavelet factor on that axis,
/// 0 the scaling factor. (0,0) exists only at scale 0.
enum class HaarKind : uint8_t { kScaling, kDetailY, kDetailX, kDetailXY };

struct HaarIndex {
    int scale = 0;
    int kx = 0;
    int ky = 0;
    HaarKind kind = HaarKind::kScaling;
};

/// Counters for measure-zero configurations that the analytic machinery
/// skips (curve tangent to a grid line, vanishing handles, ...).
struct DegeneracyFlags {
    int tangent_skips = 0;
    int zero_cubics = 0;
    int short_handles = 0;
    bool any() const {
        return tangent_skips || zero_cubics || short_handles;
    }
    void merge(const DegeneracyFlags& o) {
        tangent_skips += o.tangent_skips;
        zero_cubics += o.zero_cubics;
        short_handles += o.short_handles;
    }
};

/// Sparse wavelet coefficients of a bezigon's coverage function.
/// Wavelet entries live at scales 0..depth-1 (the single scaling
/// coefficient completes the expansion); cells never touched by the
/// curve hold no entry, i.e. exactly zero.
class CoefficientSet {
  public:
    explicit CoefficientSet(RasterGrid grid);

    int depth() const { return depth_; }
    /// The scale-0 scaling coefficient; equals the enclosed signed area.
    double scaling() const { return dc_; }
    /// Coefficient lookup; absent cells give 0. Throws on invalid index.
    double value(const HaarIndex& idx) const;
    size_t nonzero_count() const;

    void add_scaling(double v) { dc_ += v; }
    /// Accumulate the three detail coefficients of cell (kx, ky) at `scale`.
    void add_detail(int scale, int kx, int ky, double c_dy, double c_dx,
                    double c_dxy);
    const std::unordered_map<uint64_t, std::array<double, 3>>& level(
        int scale) const {
        return levels_[scale];
    }

  private:
    int depth_;
    double dc_ = 0.0;
    // per scale: packed (kx, ky) -> {c^(0,1), c^(1,0), c^(1,1)}
    std::vector<std::unordered_map<uint64_t, std::array<double, 3>>> levels_;
};

/// Signed per-pixel coverage at the finest level.
struct CoverageImage {
    RasterGrid grid;
    std::vector<double> alpha;

    double at(int x, int y) const {
        return alpha[static_cast<size_t>(y) * grid.size() + x];
    }
    double& at(int x, int y) {
        return alpha[static_cast<size_t>(y) * grid.size() + x];
    }
};

/// Parameter breakpoints of one segment: every t in (0,1) where X(t) or
/// Y(t) crosses a dyadic line m/2^depth, plus the interior extrema of X
/// and Y. Between consecutive breakpoints every Haar factor is constant.
std::vector<double> monotone_splits(const BezierSegment& segment,
                                    RasterGrid grid);

/// Exact wavelet analysis of the coverage of `bezigon` (closed-form
/// integration per monotone span). The bezigon must lie inside the unit
/// square; throws std::domain_error otherwise.
CoefficientSet wavelet_coefficients(const Bezigon& bezigon, RasterGrid grid);

/// Adds one segment's coefficient contributions into `acc` (coefficients
/// are additive over segments).
void accumulate_segment_coefficients(const BezierSegment& segment,
                                     RasterGrid grid, CoefficientSet& acc);

/// Evaluates the truncated expansion per finest-level pixel. The result is
/// the exact box-filtered coverage of the bezigon over each pixel.
CoverageImage reconstruct(const CoefficientSet& coeffs, RasterGrid grid);

CoverageImage coverage(const Bezigon& bezigon, RasterGrid grid);

/// alpha-linear compositing over a background, alpha clamped to [0,1].
RasterImage rasterize(const VectorShape& shape,
                      const std::array<double, 3>& background,
                      RasterGrid grid);
RasterImage rasterize(const VectorShape& shape, const RasterImage& background,
                      RasterGrid grid);

/// Supersampling reference: even-odd point-in-bezigon tests on an n x n
/// subpixel lattice per pixel. n = 1 is plain center-point sampling.
CoverageImage oracle_coverage(const Bezigon& bezigon, RasterGrid grid,
                              int samples_per_axis);
RasterImage oracle_rasterize(const VectorShape& shape,
                             const std::array<double, 3>& background,
                             RasterGrid grid, int samples_per_axis);
RasterImage oracle_rasterize(const VectorShape& shape,
                             const RasterImage& background, RasterGrid grid,
                             int samples_per_axis);

/// d/dB of sum_pixels weights(x,y) * alpha(x,y), computed analytically
/// (smooth parts in closed form per monotone span, line-crossing parts by
/// delta sifting over the per-scale cubic root sets). Returns the 6N
/// gradient in Bezigon::to_params layout. `weights` has size() * size()
/// entries, row-major. When `segments` is given, only those segments'
/// raw derivatives are accumulated (the rest of B is treated as fixed).
std::vector<double> coverage_gradient(const Bezigon& bezigon, RasterGrid grid,
                                      const std::vector<double>& weights,
                                      DegeneracyFlags* flags = nullptr,
                                      const std::vector<int>* segments = nullptr);

}  // namespace bezitrace

#endif
