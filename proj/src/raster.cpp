#include "bezitrace/raster.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bezitrace/cubic.hpp"

namespace bezitrace {

namespace {

constexpr double kGL4Nodes[4] = {-0.8611363115940525752, -0.3399810435848562648,
                                 0.3399810435848562648, 0.8611363115940525752};
constexpr double kGL4Weights[4] = {0.3478548451374538574,
                                   0.6521451548625461426,
                                   0.6521451548625461426,
                                   0.3478548451374538574};

double eval_poly3(const std::array<double, 4>& c, double t) {
    return ((c[3] * t + c[2]) * t + c[1]) * t + c[0];
}

double eval_poly3_deriv(const std::array<double, 4>& c, double t) {
    return (3.0 * c[3] * t + 2.0 * c[2]) * t + c[1];
}

uint64_t pack_cell(int kx, int ky) {
    return (static_cast<uint64_t>(static_cast<uint32_t>(kx)) << 32) |
           static_cast<uint32_t>(ky);
}

void check_domain(const Bezigon& bezigon) {
    constexpr double eps = 1e-9;
    for (const Point& p : bezigon.points())
        if (p.x < -eps || p.x > 1.0 + eps || p.y < -eps || p.y > 1.0 + eps)
            throw std::domain_error(
                "bezigon exceeds the unit square; normalize or pad first");
}

struct SplitData {
    std::vector<double> ts;  // interval boundaries incl. 0 and 1
    struct Crossing {
        double t;
        int m;          // dyadic line index at the finest depth
        bool vertical;  // true: X(t) = m/2^d, false: Y(t) = m/2^d
        double weight;  // 0.5 when the root sits on a segment endpoint
    };
    std::vector<Crossing> crossings;
    int zero_line_runs = 0;
};

SplitData compute_splits(const BezierSegment& seg, int depth) {
    SplitData out;
    out.ts.push_back(0.0);
    out.ts.push_back(1.0);
    const int size = 1 << depth;

    auto px = seg.x_poly();
    auto py = seg.y_poly();

    // Extrema of X and Y (quadratic roots of the derivatives).
    for (const auto& poly : {px, py}) {
        CubicRoots ext = cubic_roots({poly[1], 2.0 * poly[2], 3.0 * poly[3],
                                      0.0},
                                     0.0, 1.0);
        for (double r : ext.roots)
            if (r > 1e-11 && r < 1.0 - 1e-11) out.ts.push_back(r);
    }

    for (int axis = 0; axis < 2; ++axis) {
        bool vertical = axis == 0;
        const auto& poly = vertical ? px : py;
        double lo = vertical
                        ? std::min({seg.p0.x, seg.p1.x, seg.p2.x, seg.p3.x})
                        : std::min({seg.p0.y, seg.p1.y, seg.p2.y, seg.p3.y});
        double hi = vertical
                        ? std::max({seg.p0.x, seg.p1.x, seg.p2.x, seg.p3.x})
                        : std::max({seg.p0.y, seg.p1.y, seg.p2.y, seg.p3.y});
        int m_lo = std::max(0, static_cast<int>(std::ceil(lo * size - 1e-12)));
        int m_hi = std::min(size,
                            static_cast<int>(std::floor(hi * size + 1e-12)));
        for (int m = m_lo; m <= m_hi; ++m) {
            // Solve in grid units for conditioning near integer lines.
            std::array<double, 4> c = {poly[0] * size - m, poly[1] * size,
                                       poly[2] * size, poly[3] * size};
            CubicRoots roots = cubic_roots(c, 0.0, 1.0);
            if (roots.identically_zero) {
                ++out.zero_line_runs;
                continue;  // curve runs along the line; nothing transverse
            }
            for (double r : roots.roots) {
                bool endpoint = r < 1e-11 || r > 1.0 - 1e-11;
                if (!endpoint) out.ts.push_back(r);
                out.crossings.push_back({r, m, vertical,
                                         endpoint ? 0.5 : 1.0});
            }
        }
    }

    std::sort(out.ts.begin(), out.ts.end());
    out.ts.erase(std::unique(out.ts.begin(), out.ts.end(),
                             [](double a, double b) {
                                 return std::abs(a - b) < 1e-13;
                             }),
                 out.ts.end());
    return out;
}

}  // namespace

std::vector<double> monotone_splits(const BezierSegment& segment,
                                    RasterGrid grid) {
    SplitData data = compute_splits(segment, grid.depth);
    std::vector<double> interior;
    if (data.crossings.empty()) return interior;  // stays in one cell
    for (double t : data.ts)
        if (t > 0.0 && t < 1.0) interior.push_back(t);
    return interior;
}

CoefficientSet::CoefficientSet(RasterGrid grid) : depth_(grid.depth) {
    if (grid.depth < 0 || grid.depth > kMaxGridDepth)
        throw std::invalid_argument("grid depth out of range");
    levels_.resize(depth_);
}

double CoefficientSet::value(const HaarIndex& idx) const {
    if (idx.kind == HaarKind::kScaling) {
        if (idx.scale != 0 || idx.kx != 0 || idx.ky != 0)
            throw std::invalid_argument("scaling coefficient lives at scale 0");
        return dc_;
    }
    if (idx.scale < 0 || idx.scale >= depth_)
        throw std::invalid_argument("detail scale out of range");
    int side = 1 << idx.scale;
    if (idx.kx < 0 || idx.kx >= side || idx.ky < 0 || idx.ky >= side)
        throw std::invalid_argument("translation out of range");
    auto it = levels_[idx.scale].find(pack_cell(idx.kx, idx.ky));
    if (it == levels_[idx.scale].end()) return 0.0;
    switch (idx.kind) {
        case HaarKind::kDetailY: return it->second[0];
        case HaarKind::kDetailX: return it->second[1];
        default: return it->second[2];
    }
}

size_t CoefficientSet::nonzero_count() const {
    size_t n = dc_ != 0.0 ? 1 : 0;
    for (const auto& lvl : levels_) n += 3 * lvl.size();
    return n;
}

void CoefficientSet::add_detail(int scale, int kx, int ky, double c_dy,
                                double c_dx, double c_dxy) {
    auto& cell = levels_[scale][pack_cell(kx, ky)];
    cell[0] += c_dy;
    cell[1] += c_dx;
    cell[2] += c_dxy;
}

void accumulate_segment_coefficients(const BezierSegment& seg, RasterGrid grid,
                                     CoefficientSet& acc) {
    const int depth = grid.depth;
    const int size = grid.size();
    SplitData splits = compute_splits(seg, depth);
    auto px = seg.x_poly();
    auto py = seg.y_poly();

    for (size_t iv = 0; iv + 1 < splits.ts.size(); ++iv) {
        double ta = splits.ts[iv], tb = splits.ts[iv + 1];
        if (tb - ta < 1e-14) continue;
        double mid = 0.5 * (ta + tb), half = 0.5 * (tb - ta);

        // J1 = int X Y' dt on the span (quintic; 4-node GL is exact).
        double j1 = 0.0;
        for (int q = 0; q < 4; ++q) {
            double t = mid + half * kGL4Nodes[q];
            j1 += kGL4Weights[q] * eval_poly3(px, t) * eval_poly3_deriv(py, t);
        }
        j1 *= half;
        double xa = eval_poly3(px, ta), xb = eval_poly3(px, tb);
        double ya = eval_poly3(py, ta), yb = eval_poly3(py, tb);
        double j2 = yb - ya;              // int Y' dt
        double j4 = xb - xa;              // int X' dt
        double j3 = xb * yb - xa * ya - j1;  // int Y X' dt

        double xm = eval_poly3(px, mid), ym = eval_poly3(py, mid);
        int col = static_cast<int>(std::floor(xm * size));
        int row = static_cast<int>(std::floor(ym * size));
        if (row < 0 || row >= size) continue;  // on/off the top or bottom edge
        acc.add_scaling(j1);
        if (col < 0 || col >= size) continue;

        for (int s = 0; s < depth; ++s) {
            int kx = col >> (depth - s);
            int ky = row >> (depth - s);
            double h = 1.0 / (1 << s);
            double x0 = kx * h, y0 = ky * h;
            double cell_mid_x = x0 + 0.5 * h, cell_mid_y = y0 + 0.5 * h;
            double ex = xm < cell_mid_x ? 1.0 : -1.0;
            double cx = xm < cell_mid_x ? x0 : x0 + h;
            double ey = ym < cell_mid_y ? 1.0 : -1.0;
            double cy = ym < cell_mid_y ? y0 : y0 + h;
            double sy = ym < cell_mid_y ? 1.0 : -1.0;
            double two_s = static_cast<double>(1 << s);
            double c_dy = -two_s * ey * (j3 - cy * j4);
            double c_dx = two_s * ex * (j1 - cx * j2);
            double c_dxy = sy * c_dx;
            acc.add_detail(s, kx, ky, c_dy, c_dx, c_dxy);
        }
    }
}

CoefficientSet wavelet_coefficients(const Bezigon& bezigon, RasterGrid grid) {
    check_domain(bezigon);
    CoefficientSet acc(grid);
    for (int j = 0; j < bezigon.segment_count(); ++j)
        accumulate_segment_coefficients(bezigon.segment(j), grid, acc);
    return acc;
}

CoverageImage reconstruct(const CoefficientSet& coeffs, RasterGrid grid) {
    if (coeffs.depth() != grid.depth)
        throw std::invalid_argument("coefficient set built for another grid");
    const int depth = grid.depth;
    std::vector<double> cur(1, coeffs.scaling());
    for (int s = 0; s < depth; ++s) {
        int w = 1 << s;
        int w2 = w << 1;
        std::vector<double> next(static_cast<size_t>(w2) * w2);
        for (int ky = 0; ky < w; ++ky)
            for (int kx = 0; kx < w; ++kx) {
                double v = cur[static_cast<size_t>(ky) * w + kx];
                size_t base = static_cast<size_t>(2 * ky) * w2 + 2 * kx;
                next[base] = v;
                next[base + 1] = v;
                next[base + w2] = v;
                next[base + w2 + 1] = v;
            }
        double two_s = static_cast<double>(1 << s);
        for (const auto& [key, c] : coeffs.level(s)) {
            int kx = static_cast<int>(key >> 32);
            int ky = static_cast<int>(key & 0xffffffffu);
            size_t base = static_cast<size_t>(2 * ky) * w2 + 2 * kx;
            double dy = c[0], dx = c[1], dxy = c[2];
            next[base] += two_s * (dy + dx + dxy);
            next[base + 1] += two_s * (dy - dx - dxy);
            next[base + w2] += two_s * (-dy + dx - dxy);
            next[base + w2 + 1] += two_s * (-dy - dx + dxy);
        }
        cur.swap(next);
    }
    return CoverageImage{grid, std::move(cur)};
}

CoverageImage coverage(const Bezigon& bezigon, RasterGrid grid) {
    return reconstruct(wavelet_coefficients(bezigon, grid), grid);
}

namespace {

RasterImage composite(const CoverageImage& cov,
                      const std::array<double, 3>& color,
                      const RasterImage* bg_image,
                      const std::array<double, 3>& bg_color) {
    int s = cov.grid.size();
    RasterImage out(s, s, 3);
    for (int y = 0; y < s; ++y)
        for (int x = 0; x < s; ++x) {
            double a = std::clamp(cov.at(x, y), 0.0, 1.0);
            for (int c = 0; c < 3; ++c) {
                double bg = bg_image ? bg_image->at(x, y, c) : bg_color[c];
                out.at(x, y, c) = a * color[c] + (1.0 - a) * bg;
            }
        }
    return out;
}

}  // namespace

RasterImage rasterize(const VectorShape& shape,
                      const std::array<double, 3>& background,
                      RasterGrid grid) {
    CoverageImage cov = coverage(shape.bezigon, grid);
    return composite(cov, shape.color, nullptr, background);
}

RasterImage rasterize(const VectorShape& shape, const RasterImage& background,
                      RasterGrid grid) {
    if (background.width != grid.size() || background.height != grid.size() ||
        background.channels != 3)
        throw std::invalid_argument("background does not match the grid");
    CoverageImage cov = coverage(shape.bezigon, grid);
    return composite(cov, shape.color, &background, {});
}

CoverageImage oracle_coverage(const Bezigon& bezigon, RasterGrid grid,
                              int samples_per_axis) {
    if (samples_per_axis < 1)
        throw std::invalid_argument("need at least one sample per axis");
    const int s = grid.size();
    const int n = samples_per_axis;
    FlattenedBezigon flat = flatten(bezigon, 1.0 / (64.0 * s));
    const size_t edges = flat.vertices.size() - 1;

    CoverageImage cov{grid, std::vector<double>(static_cast<size_t>(s) * s,
                                                0.0)};
    std::vector<double> xs;
    const int total = s * n;
    for (int row = 0; row < total; ++row) {
        double y = (row + 0.5) / total;
        xs.clear();
        for (size_t e = 0; e < edges; ++e) {
            const Point& a = flat.vertices[e];
            const Point& b = flat.vertices[e + 1];
            if ((a.y <= y) == (b.y <= y)) continue;
            xs.push_back(a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y));
        }
        std::sort(xs.begin(), xs.end());
        int py = row / n;
        size_t next_cross = 0;
        bool inside = false;
        for (int colsub = 0; colsub < total; ++colsub) {
            double x = (colsub + 0.5) / total;
            while (next_cross < xs.size() && xs[next_cross] < x) {
                inside = !inside;
                ++next_cross;
            }
            if (inside) cov.at(colsub / n, py) += 1.0;
        }
    }
    double inv = 1.0 / (static_cast<double>(n) * n);
    for (double& v : cov.alpha) v *= inv;
    return cov;
}

RasterImage oracle_rasterize(const VectorShape& shape,
                             const std::array<double, 3>& background,
                             RasterGrid grid, int samples_per_axis) {
    CoverageImage cov = oracle_coverage(shape.bezigon, grid, samples_per_axis);
    return composite(cov, shape.color, nullptr, background);
}

RasterImage oracle_rasterize(const VectorShape& shape,
                             const RasterImage& background, RasterGrid grid,
                             int samples_per_axis) {
    CoverageImage cov = oracle_coverage(shape.bezigon, grid, samples_per_axis);
    return composite(cov, shape.color, &background, {});
}

namespace {

// Per-scale sums of the weight image; levels[s] holds 2^s x 2^s cell sums.
struct WeightPyramid {
    int depth;
    std::vector<std::vector<double>> levels;

    WeightPyramid(const std::vector<double>& weights, int depth_in)
        : depth(depth_in), levels(depth_in + 1) {
        levels[depth] = weights;
        for (int s = depth - 1; s >= 0; --s) {
            int w = 1 << s;
            int w2 = w << 1;
            levels[s].assign(static_cast<size_t>(w) * w, 0.0);
            const auto& child = levels[s + 1];
            for (int ky = 0; ky < w; ++ky)
                for (int kx = 0; kx < w; ++kx) {
                    size_t base = static_cast<size_t>(2 * ky) * w2 + 2 * kx;
                    levels[s][static_cast<size_t>(ky) * w + kx] =
                        child[base] + child[base + 1] + child[base + w2] +
                        child[base + w2 + 1];
                }
        }
    }

    double total() const { return levels[0][0]; }

    // Weighted sums against the three detail basis functions of cell
    // (kx, ky) at scale s; zero for out-of-range cells.
    void detail(int s, int kx, int ky, double& g_dy, double& g_dx,
                double& g_dxy) const {
        int w = 1 << s;
        if (kx < 0 || kx >= w || ky < 0 || ky >= w) {
            g_dy = g_dx = g_dxy = 0.0;
            return;
        }
        const auto& child = levels[s + 1];
        int w2 = w << 1;
        size_t base = static_cast<size_t>(2 * ky) * w2 + 2 * kx;
        double a = child[base], b = child[base + 1];
        double c = child[base + w2], d = child[base + w2 + 1];
        double two_s = static_cast<double>(1 << s);
        g_dy = two_s * (a + b - c - d);
        g_dx = two_s * (a - b + c - d);
        g_dxy = two_s * (a - b - c + d);
    }
};

}  // namespace

std::vector<double> coverage_gradient(const Bezigon& bezigon, RasterGrid grid,
                                      const std::vector<double>& weights,
                                      DegeneracyFlags* flags,
                                      const std::vector<int>* segments) {
    check_domain(bezigon);
    const int depth = grid.depth;
    const int size = grid.size();
    if (weights.size() != static_cast<size_t>(size) * size)
        throw std::invalid_argument("weights image does not match the grid");

    WeightPyramid pyr(weights, depth);
    const double g00 = pyr.total();
    const int n = bezigon.segment_count();
    std::vector<double> grad(6 * n, 0.0);
    DegeneracyFlags local;

    std::vector<int> all;
    if (!segments) {
        all.resize(n);
        for (int j = 0; j < n; ++j) all[j] = j;
    }
    const std::vector<int>& todo = segments ? *segments : all;

    for (int j : todo) {
        BezierSegment seg = bezigon.segment(j);
        auto px = seg.x_poly();
        auto py = seg.y_poly();
        SplitData splits = compute_splits(seg, depth);
        local.zero_cubics += splits.zero_line_runs;

        double raw_x[4] = {0, 0, 0, 0};
        double raw_y[4] = {0, 0, 0, 0};

        for (size_t iv = 0; iv + 1 < splits.ts.size(); ++iv) {
            double ta = splits.ts[iv], tb = splits.ts[iv + 1];
            if (tb - ta < 1e-14) continue;
            double mid = 0.5 * (ta + tb), half = 0.5 * (tb - ta);

            // I1[i] = int b_i Y' dt, I2[i] = int b_i X' dt (quintic).
            double i1[4] = {0, 0, 0, 0}, i2[4] = {0, 0, 0, 0};
            for (int q = 0; q < 4; ++q) {
                double t = mid + half * kGL4Nodes[q];
                double wq = kGL4Weights[q] * half;
                double dx = eval_poly3_deriv(px, t);
                double dy = eval_poly3_deriv(py, t);
                auto b = bernstein3(t);
                for (int i = 0; i < 4; ++i) {
                    i1[i] += wq * b[i] * dy;
                    i2[i] += wq * b[i] * dx;
                }
            }
            double xa = eval_poly3(px, ta), xb = eval_poly3(px, tb);
            double ya = eval_poly3(py, ta), yb = eval_poly3(py, tb);
            auto b_a = bernstein3(ta);
            auto b_b = bernstein3(tb);
            double i5[4], i6[4], i7[4];
            for (int i = 0; i < 4; ++i) {
                i6[i] = b_b[i] - b_a[i];
                i5[i] = xb * b_b[i] - xa * b_a[i] - i2[i];  // int X b_i' dt
                i7[i] = yb * b_b[i] - ya * b_a[i] - i1[i];  // int Y b_i' dt
            }

            double xm = eval_poly3(px, mid), ym = eval_poly3(py, mid);
            int col = static_cast<int>(std::floor(xm * size));
            int row = static_cast<int>(std::floor(ym * size));
            if (row < 0 || row >= size) continue;
            for (int i = 0; i < 4; ++i) {
                raw_x[i] += g00 * i1[i];
                raw_y[i] += g00 * i5[i];
            }
            if (col < 0 || col >= size) continue;

            for (int s = 0; s < depth; ++s) {
                int kx = col >> (depth - s);
                int ky = row >> (depth - s);
                double h = 1.0 / (1 << s);
                double x0 = kx * h, y0 = ky * h;
                double ex = xm < x0 + 0.5 * h ? 1.0 : -1.0;
                double cx = xm < x0 + 0.5 * h ? x0 : x0 + h;
                double ey = ym < y0 + 0.5 * h ? 1.0 : -1.0;
                double cy = ym < y0 + 0.5 * h ? y0 : y0 + h;
                double sy = ey;
                double sx = ex;
                double g_dy, g_dx, g_dxy;
                pyr.detail(s, kx, ky, g_dy, g_dx, g_dxy);
                double two_s = static_cast<double>(1 << s);
                double both = (g_dx + sy * g_dxy) * two_s;
                for (int i = 0; i < 4; ++i) {
                    raw_x[i] += g_dy * (-two_s) * ey * (i7[i] - cy * i6[i]) +
                                both * sx * i1[i];
                    raw_y[i] += g_dy * (-two_s) * sy * i2[i] +
                                both * ex * (i5[i] - cx * i6[i]);
                }
            }
        }

        for (const auto& cr : splits.crossings) {
            auto b = bernstein3(cr.t);
            if (cr.vertical) {
                double dx = eval_poly3_deriv(px, cr.t);
                if (std::abs(dx) < 1e-9) {
                    ++local.tangent_skips;
                    continue;
                }
                double sg = dx > 0.0 ? 1.0 : -1.0;
                double yt = eval_poly3(py, cr.t);
                for (int s = 0; s < depth; ++s) {
                    int r = depth - s;
                    if ((cr.m & ((1 << r) - 1)) != 0) continue;
                    int q = cr.m >> r;
                    int w = 1 << s;
                    int ky = static_cast<int>(std::floor(yt * w));
                    if (ky < 0 || ky >= w) continue;
                    double local_y = yt * w - ky;
                    double tent = std::min(local_y, 1.0 - local_y) / w;
                    double f = (1 << s) * tent * sg * cr.weight;
                    double gq_dy, gq_dx, gq_dxy, gp_dy, gp_dx, gp_dxy;
                    pyr.detail(s, q, ky, gq_dy, gq_dx, gq_dxy);
                    pyr.detail(s, q - 1, ky, gp_dy, gp_dx, gp_dxy);
                    double coeff = -gq_dy + gp_dy;
                    for (int i = 0; i < 4; ++i)
                        raw_x[i] += f * b[i] * coeff;
                }
            } else {
                double dy = eval_poly3_deriv(py, cr.t);
                if (std::abs(dy) < 1e-9) {
                    ++local.tangent_skips;
                    continue;
                }
                double sg = dy > 0.0 ? 1.0 : -1.0;
                double xt = eval_poly3(px, cr.t);
                if (cr.m == 0 || cr.m == size) {
                    // Scale-0 scaling coefficient: deltas at y = 0 and y = 1.
                    double phi_t = std::clamp(xt, 0.0, 1.0);
                    double sign0 = cr.m == 0 ? 1.0 : -1.0;
                    for (int i = 0; i < 4; ++i)
                        raw_y[i] += g00 * phi_t * sg * cr.weight * sign0 * b[i];
                }
                for (int s = 0; s < depth; ++s) {
                    int r = depth - s;
                    int rem = cr.m & ((1 << r) - 1);
                    int w = 1 << s;
                    int kx = static_cast<int>(std::floor(xt * w));
                    if (kx < 0 || kx >= w) continue;
                    double local_x = xt * w - kx;
                    double tent = std::min(local_x, 1.0 - local_x) / w;
                    double f = (1 << s) * tent * sg * cr.weight;
                    if (rem == 0) {
                        int q = cr.m >> r;
                        double gq_dy, gq_dx, gq_dxy, gp_dy, gp_dx, gp_dxy;
                        pyr.detail(s, kx, q, gq_dy, gq_dx, gq_dxy);
                        pyr.detail(s, kx, q - 1, gp_dy, gp_dx, gp_dxy);
                        double coeff = (gq_dx - gp_dx) + (gq_dxy + gp_dxy);
                        for (int i = 0; i < 4; ++i)
                            raw_y[i] += f * b[i] * coeff;
                    } else if (rem == (1 << (r - 1))) {
                        int q = cr.m >> r;
                        double gq_dy, gq_dx, gq_dxy;
                        pyr.detail(s, kx, q, gq_dy, gq_dx, gq_dxy);
                        for (int i = 0; i < 4; ++i)
                            raw_y[i] += f * b[i] * (-2.0 * gq_dxy);
                    }
                }
            }
        }

        int base = 3 * j;
        int next_anchor = 3 * ((j + 1) % n);
        int slots[4] = {base, base + 1, base + 2, next_anchor};
        for (int i = 0; i < 4; ++i) {
            grad[2 * slots[i]] += raw_x[i];
            grad[2 * slots[i] + 1] += raw_y[i];
        }
    }

    if (flags) flags->merge(local);
    return grad;
}

}  // namespace bezitrace
