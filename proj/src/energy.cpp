#include "bezitrace/energy.hpp"

#include <algorithm>
#include <cmath>

namespace bezitrace {

namespace {

constexpr double kGL8Nodes[8] = {
    -0.9602898564975362317, -0.7966664774136267396, -0.5255324099163289858,
    -0.1834346424956498049, 0.1834346424956498049,  0.5255324099163289858,
    0.7966664774136267396,  0.9602898564975362317};
constexpr double kGL8Weights[8] = {
    0.1012285362903762592, 0.2223810344533744705, 0.3137066458778872873,
    0.3626837833783619830, 0.3626837833783619830, 0.3137066458778872873,
    0.2223810344533744705, 0.1012285362903762592};
constexpr int kLenPanels = 4;

}  // namespace

double data_energy(const VectorShape& shape, const EnergyContext& ctx) {
    CoverageImage cov = coverage(shape.bezigon, ctx.grid);
    int s = ctx.grid.size();
    double acc = 0.0;
    for (int y = 0; y < s; ++y)
        for (int x = 0; x < s; ++x) {
            if (!ctx.valid(x, y)) continue;
            double a = std::clamp(cov.at(x, y), 0.0, 1.0);
            for (int c = 0; c < 3; ++c) {
                double r = ctx.background.at(x, y, c) +
                           a * (shape.color[c] - ctx.background.at(x, y, c));
                double d = r - ctx.input.at(x, y, c);
                acc += d * d;
            }
        }
    return acc * ctx.data_scale();
}

DataGradient data_gradient(const VectorShape& shape, const EnergyContext& ctx,
                           const std::vector<int>* segments) {
    CoverageImage cov = coverage(shape.bezigon, ctx.grid);
    int s = ctx.grid.size();
    double scale = ctx.data_scale();
    std::vector<double> w(static_cast<size_t>(s) * s, 0.0);
    DataGradient out;
    for (int y = 0; y < s; ++y)
        for (int x = 0; x < s; ++x) {
            if (!ctx.valid(x, y)) continue;
            double raw = cov.at(x, y);
            double a = std::clamp(raw, 0.0, 1.0);
            double wsum = 0.0;
            for (int c = 0; c < 3; ++c) {
                double bg = ctx.background.at(x, y, c);
                double r = bg + a * (shape.color[c] - bg);
                double diff = r - ctx.input.at(x, y, c);
                out.color[c] += 2.0 * scale * a * diff;
                wsum += 2.0 * scale * diff * (shape.color[c] - bg);
            }
            // the clamp has zero slope outside (0,1)
            if (raw > 0.0 && raw < 1.0)
                w[static_cast<size_t>(y) * s + x] = wsum;
        }
    out.geometry = coverage_gradient(shape.bezigon, ctx.grid, w, &out.flags,
                                     segments);
    return out;
}

double e_spt(const Bezigon& bezigon, double intersection_tol) {
    auto crossings = self_intersections(bezigon, intersection_tol);
    return e_spt_fixed(bezigon, crossings);
}

double e_spt_fixed(const Bezigon& bezigon,
                   const std::vector<IntersectionPair>& crossings) {
    if (crossings.empty()) return 0.0;
    double total = arc_length(bezigon, 0, bezigon.segment_count());
    double acc = 0.0;
    for (const auto& p : crossings) {
        double inner = arc_length(bezigon, p.t1, p.t2);
        acc += std::min(inner, total - inner);
    }
    return acc;
}

double joint_angle(const Bezigon& bezigon, int j, DegeneracyFlags* flags) {
    auto [a, b] = joint_tangents(bezigon, j);
    double na = norm(a), nb = norm(b);
    if (na < kEpsHandle || nb < kEpsHandle) {
        if (flags) ++flags->short_handles;
        double u = dot(a, b) / (std::max(na, kEpsHandle) *
                                std::max(nb, kEpsHandle));
        return std::acos(std::clamp(u, -1.0, 1.0));
    }
    return std::abs(std::atan2(cross(a, b), dot(a, b)));
}

double e_apt(const Bezigon& bezigon, DegeneracyFlags* flags) {
    double acc = 0.0;
    for (int j = 0; j < bezigon.segment_count(); ++j)
        acc += joint_angle(bezigon, j, flags);
    return acc;
}

double e_hpt(const Bezigon& bezigon, DegeneracyFlags* flags) {
    double acc = 0.0;
    for (int j = 0; j < bezigon.segment_count(); ++j) {
        double out_len = distance(bezigon.handle1(j), bezigon.anchor(j));
        double in_len = distance(bezigon.anchor(j + 1), bezigon.handle2(j));
        for (double len : {out_len, in_len}) {
            if (len < kEpsHandle) {
                if (flags) ++flags->short_handles;
                len = kEpsHandle;
            }
            acc += 1.0 / len;
        }
    }
    return acc;
}

double e_lpt(const Bezigon& bezigon) {
    return arc_length(bezigon, 0, bezigon.segment_count());
}

namespace detail {

double apt_joint_gradient(const Bezigon& bz, int j, std::vector<double>& grad,
                          double weight, DegeneracyFlags* flags) {
    auto [a, b] = joint_tangents(bz, j);
    double na = norm(a), nb = norm(b);
    if (na < kEpsHandle || nb < kEpsHandle) {
        if (flags) ++flags->short_handles;
        return 0.0;
    }
    double c = cross(a, b), d = dot(a, b);
    double denom = c * c + d * d;
    // exactly (anti)parallel handles sit on the |angle| kink; the zero
    // vector is the subgradient that keeps descent well defined there
    if (std::abs(c) < 1e-12 * std::abs(d)) return std::abs(d < 0 ? M_PI : 0.0);
    double sgn = c >= 0.0 ? 1.0 : -1.0;
    Point da{sgn * (d * b.y - c * b.x) / denom,
             sgn * (-d * b.x - c * b.y) / denom};
    Point db{sgn * (-d * a.y - c * a.x) / denom,
             sgn * (d * a.x - c * a.y) / denom};
    int n = bz.segment_count();
    int anchor = 3 * bz.wrap(j);
    int h2_prev = 3 * bz.wrap(j - 1) + 2;
    int h1 = 3 * bz.wrap(j) + 1;
    (void)n;
    grad[2 * anchor] += weight * (da.x - db.x);
    grad[2 * anchor + 1] += weight * (da.y - db.y);
    grad[2 * h2_prev] -= weight * da.x;
    grad[2 * h2_prev + 1] -= weight * da.y;
    grad[2 * h1] += weight * db.x;
    grad[2 * h1 + 1] += weight * db.y;
    return std::abs(std::atan2(c, d));
}

void hpt_segment_gradient(const Bezigon& bz, int j, std::vector<double>& grad,
                          double weight, DegeneracyFlags* flags) {
    j = bz.wrap(j);
    int a0 = 3 * j, h1 = 3 * j + 1, h2 = 3 * j + 2;
    int a1 = 3 * bz.wrap(j + 1);
    Point v_out = bz.handle1(j) - bz.anchor(j);
    Point v_in = bz.anchor(j + 1) - bz.handle2(j);
    auto add = [&](Point v, int plus, int minus) {
        double len = norm(v);
        if (len < kEpsHandle) {
            if (flags) ++flags->short_handles;
            return;
        }
        double inv3 = 1.0 / (len * len * len);
        grad[2 * plus] += weight * (-v.x * inv3);
        grad[2 * plus + 1] += weight * (-v.y * inv3);
        grad[2 * minus] -= weight * (-v.x * inv3);
        grad[2 * minus + 1] -= weight * (-v.y * inv3);
    };
    add(v_out, h1, a0);
    add(v_in, a1, h2);
}

void lpt_segment_gradient(const Bezigon& bz, int j, std::vector<double>& grad,
                          double weight, double t0, double t1) {
    j = bz.wrap(j);
    BezierSegment seg = bz.segment(j);
    auto px = seg.x_poly();
    auto py = seg.y_poly();
    double raw_x[4] = {0, 0, 0, 0}, raw_y[4] = {0, 0, 0, 0};
    double panel = (t1 - t0) / kLenPanels;
    if (panel <= 0.0) return;
    for (int p = 0; p < kLenPanels; ++p) {
        double mid = t0 + (p + 0.5) * panel, half = 0.5 * panel;
        for (int q = 0; q < 8; ++q) {
            double t = mid + half * kGL8Nodes[q];
            double wq = kGL8Weights[q] * half;
            double dx = (3.0 * px[3] * t + 2.0 * px[2]) * t + px[1];
            double dy = (3.0 * py[3] * t + 2.0 * py[2]) * t + py[1];
            double sp = std::hypot(dx, dy);
            if (sp < 1e-12) continue;
            auto db = bernstein3_deriv(t);
            for (int i = 0; i < 4; ++i) {
                raw_x[i] += wq * dx * db[i] / sp;
                raw_y[i] += wq * dy * db[i] / sp;
            }
        }
    }
    int n = bz.segment_count();
    int slots[4] = {3 * j, 3 * j + 1, 3 * j + 2, 3 * ((j + 1) % n)};
    for (int i = 0; i < 4; ++i) {
        grad[2 * slots[i]] += weight * raw_x[i];
        grad[2 * slots[i] + 1] += weight * raw_y[i];
    }
}

double fixed_quad_length(const Bezigon& bz, double t1, double t2) {
    int n = bz.segment_count();
    double acc = 0.0;
    int j0 = std::max(0, static_cast<int>(std::floor(t1)));
    int j1 = std::min(n - 1, static_cast<int>(std::ceil(t2)) - 1);
    for (int j = j0; j <= j1; ++j) {
        double a = std::max(t1 - j, 0.0);
        double b = std::min(t2 - j, 1.0);
        if (b <= a) continue;
        BezierSegment seg = bz.segment(j);
        double panel = (b - a) / kLenPanels;
        for (int p = 0; p < kLenPanels; ++p) {
            double mid = a + (p + 0.5) * panel, half = 0.5 * panel;
            for (int q = 0; q < 8; ++q) {
                double t = mid + half * kGL8Nodes[q];
                acc += kGL8Weights[q] * half * norm(seg.derivative(t));
            }
        }
    }
    return acc;
}

// d(arc length over [t1, t2]) with the crossing parameters held fixed.
void range_length_gradient(const Bezigon& bz, double t1, double t2,
                           std::vector<double>& grad, double weight) {
    int n = bz.segment_count();
    int j0 = std::max(0, static_cast<int>(std::floor(t1)));
    int j1 = std::min(n - 1, static_cast<int>(std::ceil(t2)) - 1);
    for (int j = j0; j <= j1; ++j) {
        double a = std::max(t1 - j, 0.0);
        double b = std::min(t2 - j, 1.0);
        if (b > a) lpt_segment_gradient(bz, j, grad, weight, a, b);
    }
}

void spt_fixed_gradient(const Bezigon& bz,
                        const std::vector<IntersectionPair>& crossings,
                        std::vector<double>& grad, double weight) {
    if (crossings.empty()) return;
    int n = bz.segment_count();
    double total = fixed_quad_length(bz, 0, n);
    for (const auto& p : crossings) {
        double inner = fixed_quad_length(bz, p.t1, p.t2);
        if (inner <= total - inner) {
            range_length_gradient(bz, p.t1, p.t2, grad, weight);
        } else {
            for (int j = 0; j < n; ++j)
                lpt_segment_gradient(bz, j, grad, weight);
            range_length_gradient(bz, p.t1, p.t2, grad, -weight);
        }
    }
}

}  // namespace detail

std::vector<double> prior_gradient(
    const Bezigon& bezigon, const EnergyWeights& weights,
    const std::vector<IntersectionPair>* fixed_crossings,
    DegeneracyFlags* flags) {
    int n = bezigon.segment_count();
    std::vector<double> grad(6 * n, 0.0);
    for (int j = 0; j < n; ++j) {
        if (weights.apt != 0.0)
            detail::apt_joint_gradient(bezigon, j, grad, weights.apt, flags);
        if (weights.hpt != 0.0)
            detail::hpt_segment_gradient(bezigon, j, grad, weights.hpt, flags);
        if (weights.lpt != 0.0)
            detail::lpt_segment_gradient(bezigon, j, grad, weights.lpt);
    }
    if (weights.spt != 0.0) {
        if (fixed_crossings) {
            detail::spt_fixed_gradient(bezigon, *fixed_crossings, grad,
                                       weights.spt);
        } else {
            auto crossings = self_intersections(bezigon);
            detail::spt_fixed_gradient(bezigon, crossings, grad, weights.spt);
        }
    }
    return grad;
}

EnergyBreakdown total_energy(const VectorShape& shape,
                             const EnergyContext& ctx,
                             const EnergyWeights& weights) {
    double s = ctx.px_scale();
    EnergyBreakdown br;
    br.e_data = data_energy(shape, ctx);
    br.e_spt = s * e_spt(shape.bezigon, ctx.intersection_tol);
    br.e_apt = e_apt(shape.bezigon);
    br.e_hpt = e_hpt(shape.bezigon) / s;
    br.e_lpt = s * e_lpt(shape.bezigon);
    br.total = br.e_data + weights.spt * br.e_spt + weights.apt * br.e_apt +
               weights.hpt * br.e_hpt + weights.lpt * br.e_lpt;
    return br;
}

}  // namespace bezitrace
