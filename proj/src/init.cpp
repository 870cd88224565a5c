#include "bezitrace/init.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

namespace bezitrace {

namespace {

struct UnionFind {
    std::vector<int> parent, rank_;
    std::vector<int> size;
    explicit UnionFind(int n) : parent(n), rank_(n, 0), size(n, 1) {
        std::iota(parent.begin(), parent.end(), 0);
    }
    int find(int a) {
        while (parent[a] != a) {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        return a;
    }
    int join(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return a;
        if (rank_[a] < rank_[b]) std::swap(a, b);
        parent[b] = a;
        size[a] += size[b];
        if (rank_[a] == rank_[b]) ++rank_[a];
        return a;
    }
};

struct GridEdge {
    float w;
    int a, b;
};

double pixel_distance(const RasterImage& img, int xa, int ya, int xb,
                      int yb) {
    auto ca = img.rgb(xa, ya);
    auto cb = img.rgb(xb, yb);
    double acc = 0.0;
    for (int c = 0; c < 3; ++c) {
        double d = (ca[c] - cb[c]) * 255.0;
        acc += d * d;
    }
    return std::sqrt(acc);
}

}  // namespace

LabelMap segment_regions(const RasterImage& image, double k, int min_size) {
    if (!(k > 0.0)) throw std::invalid_argument("segmentation k must be > 0");
    const int w = image.width, h = image.height;
    const int n = w * h;
    std::vector<GridEdge> edges;
    edges.reserve(static_cast<size_t>(n) * 2);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            int a = y * w + x;
            if (x + 1 < w)
                edges.push_back({static_cast<float>(
                                     pixel_distance(image, x, y, x + 1, y)),
                                 a, a + 1});
            if (y + 1 < h)
                edges.push_back({static_cast<float>(
                                     pixel_distance(image, x, y, x, y + 1)),
                                 a, a + w});
        }
    std::stable_sort(edges.begin(), edges.end(),
                     [](const GridEdge& a, const GridEdge& b) {
                         return a.w < b.w;
                     });

    UnionFind uf(n);
    std::vector<double> threshold(n, k);
    for (const GridEdge& e : edges) {
        int a = uf.find(e.a), b = uf.find(e.b);
        if (a == b) continue;
        if (e.w <= threshold[a] && e.w <= threshold[b]) {
            int root = uf.join(a, b);
            threshold[root] = e.w + k / uf.size[root];
        }
    }
    for (const GridEdge& e : edges) {
        int a = uf.find(e.a), b = uf.find(e.b);
        if (a != b && (uf.size[a] < min_size || uf.size[b] < min_size))
            uf.join(a, b);
    }

    LabelMap out;
    out.width = w;
    out.height = h;
    out.labels.assign(n, -1);
    std::vector<int> remap(n, -1);
    int next = 0;
    for (int i = 0; i < n; ++i) {
        int root = uf.find(i);
        if (remap[root] < 0) remap[root] = next++;
        out.labels[i] = remap[root];
    }
    out.region_count = next;
    return out;
}

namespace {

struct Dir {
    int dx, dy;
};

}  // namespace

std::vector<PixelContour> trace_boundary(const LabelMap& labels, int region) {
    const int w = labels.width, h = labels.height;
    auto inside = [&](int x, int y) {
        return x >= 0 && x < w && y >= 0 && y < h &&
               labels.label(x, y) == region;
    };
    // Directed crack edges with the region on the clockwise side; the four
    // sides of each pixel traverse it positively in image coordinates.
    // key: corner (x, y) packed; value: outgoing directions
    const int cw = w + 1;
    std::vector<uint8_t> out_dirs(static_cast<size_t>(cw) * (h + 1), 0);
    auto dir_bit = [](int dx, int dy) -> uint8_t {
        if (dx == 1) return 1;   // +x
        if (dy == 1) return 2;   // +y
        if (dx == -1) return 4;  // -x
        return 8;                // -y
    };
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (!inside(x, y)) continue;
            if (!inside(x, y - 1))
                out_dirs[static_cast<size_t>(y) * cw + x] |= dir_bit(1, 0);
            if (!inside(x + 1, y))
                out_dirs[static_cast<size_t>(y) * cw + (x + 1)] |=
                    dir_bit(0, 1);
            if (!inside(x, y + 1))
                out_dirs[static_cast<size_t>(y + 1) * cw + (x + 1)] |=
                    dir_bit(-1, 0);
            if (!inside(x - 1, y))
                out_dirs[static_cast<size_t>(y + 1) * cw + x] |= dir_bit(0, -1);
        }

    std::vector<PixelContour> contours;
    const Dir dirs[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    for (int cy = 0; cy <= h; ++cy)
        for (int cx = 0; cx <= w; ++cx) {
            for (int d0 = 0; d0 < 4; ++d0) {
                if (!(out_dirs[static_cast<size_t>(cy) * cw + cx] &
                      (1 << d0)))
                    continue;
                // walk one loop
                PixelContour contour;
                int x = cx, y = cy, d = d0;
                do {
                    contour.points.push_back(
                        {static_cast<double>(x), static_cast<double>(y)});
                    out_dirs[static_cast<size_t>(y) * cw + x] &=
                        ~static_cast<uint8_t>(1 << d);
                    x += dirs[d].dx;
                    y += dirs[d].dy;
                    // prefer the tightest clockwise turn; diagonal pinch
                    // corners then split into separate loops
                    uint8_t avail = out_dirs[static_cast<size_t>(y) * cw + x];
                    int next = -1;
                    for (int turn : {1, 0, 3}) {  // right, straight, left
                        int cand = (d + turn) % 4;
                        if (avail & (1 << cand)) {
                            next = cand;
                            break;
                        }
                    }
                    if (next < 0) break;  // loop closed
                    d = next;
                } while (!(x == cx && y == cy && d == d0));
                // orientation: positive area = outer
                double area = 0.0;
                const auto& p = contour.points;
                for (size_t i = 0; i < p.size(); ++i) {
                    const Point& a = p[i];
                    const Point& b = p[(i + 1) % p.size()];
                    area += 0.5 * (a.x * b.y - b.x * a.y);
                }
                contour.outer = area > 0.0;
                contours.push_back(std::move(contour));
            }
        }
    std::stable_sort(contours.begin(), contours.end(),
                     [](const PixelContour& a, const PixelContour& b) {
                         return a.outer > b.outer;
                     });
    return contours;
}

namespace {

// --- least-squares cubic fitting (closed contours, corner-aware) ---

Point normalize_dir(Point v) {
    double len = norm(v);
    if (len < 1e-12) return {0.0, 0.0};
    return {v.x / len, v.y / len};
}

BezierSegment line_fit(Point a, Point b) {
    return {a, a + (1.0 / 3.0) * (b - a), a + (2.0 / 3.0) * (b - a), b};
}

BezierSegment generate_bezier(const std::vector<Point>& pts, size_t first,
                              size_t last, const std::vector<double>& u,
                              Point t_hat1, Point t_hat2) {
    size_t n = last - first + 1;
    Point p0 = pts[first], p3 = pts[last];
    double c00 = 0, c01 = 0, c11 = 0, x0 = 0, x1 = 0;
    for (size_t i = 0; i < n; ++i) {
        double t = u[i], v = 1.0 - t;
        Point a1 = 3.0 * v * v * t * t_hat1;
        Point a2 = 3.0 * v * t * t * t_hat2;
        c00 += dot(a1, a1);
        c01 += dot(a1, a2);
        c11 += dot(a2, a2);
        Point base = (v * v * v + 3 * v * v * t) * p0 +
                     (t * t * t + 3 * v * t * t) * p3;
        Point diff = pts[first + i] - base;
        x0 += dot(a1, diff);
        x1 += dot(a2, diff);
    }
    double det = c00 * c11 - c01 * c01;
    double alpha1 = 0.0, alpha2 = 0.0;
    if (std::abs(det) > 1e-12) {
        alpha1 = (x0 * c11 - x1 * c01) / det;
        alpha2 = (c00 * x1 - c01 * x0) / det;
    }
    double poly_len = 0.0;
    for (size_t i = first; i < last; ++i)
        poly_len += distance(pts[i], pts[i + 1]);
    double seg_len = std::max(distance(p0, p3), 1e-12);
    double cap = 3.0 * std::max(seg_len, poly_len);
    double eps = 1e-6 * seg_len;
    if (alpha1 < eps || alpha2 < eps || alpha1 > cap || alpha2 > cap ||
        !std::isfinite(alpha1) || !std::isfinite(alpha2)) {
        alpha1 = alpha2 = seg_len / 3.0;  // Wu/Barsky fallback
    }
    return {p0, p0 + alpha1 * t_hat1, p3 + alpha2 * t_hat2, p3};
}

double newton_root_find(const BezierSegment& q, Point p, double u) {
    Point d = q.eval(u) - p;
    Point q1 = q.derivative(u);
    // second derivative of the cubic
    Point q2 = 6.0 * ((1 - u) * (q.p2 - 2.0 * q.p1 + q.p0) +
                      u * (q.p3 - 2.0 * q.p2 + q.p1));
    double num = dot(d, q1);
    double den = dot(q1, q1) + dot(d, q2);
    if (std::abs(den) < 1e-12) return u;
    return std::clamp(u - num / den, 0.0, 1.0);
}

double max_error(const std::vector<Point>& pts, size_t first, size_t last,
                 const BezierSegment& q, const std::vector<double>& u,
                 size_t& split) {
    double worst = 0.0;
    split = (first + last) / 2;
    for (size_t i = first + 1; i < last; ++i) {
        double d = distance(q.eval(u[i - first]), pts[i]);
        if (d > worst) {
            worst = d;
            split = i;
        }
    }
    return worst;
}

void fit_cubic(const std::vector<Point>& pts, size_t first, size_t last,
               Point t_hat1, Point t_hat2, double tol,
               std::vector<BezierSegment>& out, int depth) {
    size_t n = last - first + 1;
    if (n == 2 || depth > 24) {
        out.push_back(line_fit(pts[first], pts[last]));
        return;
    }
    std::vector<double> u(n, 0.0);
    for (size_t i = 1; i < n; ++i)
        u[i] = u[i - 1] + distance(pts[first + i], pts[first + i - 1]);
    if (u.back() < 1e-12) {
        out.push_back(line_fit(pts[first], pts[last]));
        return;
    }
    for (double& v : u) v /= u.back();

    BezierSegment q = generate_bezier(pts, first, last, u, t_hat1, t_hat2);
    size_t split;
    double err = max_error(pts, first, last, q, u, split);
    if (err <= tol) {
        out.push_back(q);
        return;
    }
    if (err <= 4.0 * tol) {
        for (int it = 0; it < 4; ++it) {
            for (size_t i = 0; i < n; ++i)
                u[i] = newton_root_find(q, pts[first + i], u[i]);
            // keep the parameterization monotone; otherwise give up
            bool ok = u.front() <= 1e-9;
            for (size_t i = 1; i < n; ++i)
                if (u[i] < u[i - 1]) ok = false;
            if (!ok) break;
            q = generate_bezier(pts, first, last, u, t_hat1, t_hat2);
            err = max_error(pts, first, last, q, u, split);
            if (err <= tol) {
                out.push_back(q);
                return;
            }
        }
    }
    // split at the worst point with a centered tangent (pointing backward
    // for the left half, forward for the right)
    split = std::clamp(split, first + 1, last - 1);
    Point t_center = normalize_dir(pts[split - 1] - pts[split + 1]);
    if (t_center.x == 0 && t_center.y == 0) t_center = {1.0, 0.0};
    fit_cubic(pts, first, split, t_hat1, t_center, tol, out, depth + 1);
    fit_cubic(pts, split, last, {-t_center.x, -t_center.y}, t_hat2, tol, out,
              depth + 1);
}

}  // namespace

Bezigon fit_bezigon(const std::vector<Point>& contour, double err_tol,
                    double corner_angle_deg) {
    size_t n = contour.size();
    // degenerate input collapses to a minimal two-segment bezigon
    Point lo{1e30, 1e30}, hi{-1e30, -1e30};
    for (const Point& p : contour) {
        lo.x = std::min(lo.x, p.x);
        lo.y = std::min(lo.y, p.y);
        hi.x = std::max(hi.x, p.x);
        hi.y = std::max(hi.y, p.y);
    }
    if (n < 4 || distance(lo, hi) < std::max(err_tol, 1e-9)) {
        Point a = lo, b = hi;
        if (distance(a, b) < 1e-12) b = a + Point{1e-6, 0.0};
        std::vector<BezierSegment> segs = {line_fit(a, b), line_fit(b, a)};
        return Bezigon::from_segments(segs);
    }

    // corner candidates from windowed turning angles
    int w = std::clamp(static_cast<int>(n / 8), 2, 8);
    double threshold = corner_angle_deg * M_PI / 180.0;
    std::vector<double> turn(n, 0.0);
    for (size_t i = 0; i < n; ++i) {
        Point prev = contour[(i + n - w) % n];
        Point next = contour[(i + w) % n];
        Point v1 = contour[i] - prev;
        Point v2 = next - contour[i];
        if (norm(v1) < 1e-12 || norm(v2) < 1e-12) continue;
        turn[i] = std::abs(std::atan2(cross(v1, v2), dot(v1, v2)));
    }
    std::vector<size_t> corners;
    for (size_t i = 0; i < n; ++i) {
        if (turn[i] < threshold) continue;
        bool peak = true;
        for (int d = -w; d <= w; ++d) {
            size_t j = (i + n + d) % n;
            if (turn[j] > turn[i] ||
                (turn[j] == turn[i] && j < i))
                peak = j == i ? peak : false;
        }
        if (peak) corners.push_back(i);
    }
    if (corners.size() < 2) {
        // seed two sections: the farthest point pair is robust enough
        size_t i0 = corners.empty() ? 0 : corners[0];
        size_t i1 = i0;
        double best = -1.0;
        for (size_t i = 0; i < n; ++i) {
            double d = distance(contour[i], contour[i0]);
            if (d > best) {
                best = d;
                i1 = i;
            }
        }
        corners = {std::min(i0, i1), std::max(i0, i1)};
        if (corners[0] == corners[1]) corners = {0, n / 2};
    }
    std::sort(corners.begin(), corners.end());
    corners.erase(std::unique(corners.begin(), corners.end()), corners.end());

    // smooth split points reuse a centered tangent on both sides
    auto tangent_at = [&](size_t i, bool incoming) {
        Point a = contour[(i + n - w) % n];
        Point b = contour[(i + w) % n];
        bool corner = turn[i] >= threshold;
        if (!corner) return normalize_dir(b - a);
        return incoming ? normalize_dir(contour[i] - a)
                        : normalize_dir(b - contour[i]);
    };

    std::vector<BezierSegment> segments;
    for (size_t c = 0; c < corners.size(); ++c) {
        size_t a = corners[c];
        size_t b = corners[(c + 1) % corners.size()];
        // unwrap the section a..b
        std::vector<Point> section;
        size_t i = a;
        while (true) {
            section.push_back(contour[i]);
            if (i == b && section.size() > 1) break;
            i = (i + 1) % n;
            if (section.size() > n + 1) break;
        }
        Point t1 = tangent_at(a, false);
        Point t2 = tangent_at(b, true);
        fit_cubic(section, 0, section.size() - 1, t1,
                  {-t2.x, -t2.y}, err_tol, segments, 0);
    }
    // weld exactly: each segment starts where the previous one ended
    for (size_t i = 0; i < segments.size(); ++i)
        segments[(i + 1) % segments.size()].p0 = segments[i].p3;
    if (segments.size() == 1) {
        auto [l, r] = segments[0].split(0.5);
        segments = {l, r};
    }
    return Bezigon::from_segments(segments);
}

std::vector<InitShape> initialize(const RasterImage& image,
                                  const InitParams& params) {
    LabelMap labels = segment_regions(image, params.k, params.min_size);
    int regions = labels.region_count;
    std::vector<double> area(regions, 0.0);
    std::vector<std::array<double, 3>> mean(regions, {0, 0, 0});
    for (int y = 0; y < image.height; ++y)
        for (int x = 0; x < image.width; ++x) {
            int r = labels.label(x, y);
            area[r] += 1.0;
            auto c = image.rgb(x, y);
            for (int k = 0; k < 3; ++k) mean[r][k] += c[k];
        }
    for (int r = 0; r < regions; ++r)
        if (area[r] > 0)
            for (int k = 0; k < 3; ++k) mean[r][k] /= area[r];

    int background = -1;
    if (!params.keep_background) {
        double best = -1.0;
        for (int r = 0; r < regions; ++r)
            if (area[r] > best) {
                best = area[r];
                background = r;
            }
    }

    std::vector<int> order;
    for (int r = 0; r < regions; ++r)
        if (r != background) order.push_back(r);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return area[a] > area[b]; });

    std::vector<InitShape> shapes;
    for (int r : order) {
        auto contours = trace_boundary(labels, r);
        if (contours.empty() || !contours.front().outer) continue;
        std::vector<Point> pts = contours.front().points;
        if (pts.size() < 4) continue;
        // circular binomial smoothing tames the staircase before fitting
        for (int pass = 0; pass < params.smooth_passes; ++pass) {
            if (pts.size() < 8) break;
            std::vector<Point> s(pts.size());
            size_t m = pts.size();
            for (size_t i = 0; i < m; ++i) {
                s[i] = (1.0 / 16.0) *
                       (1.0 * pts[(i + m - 2) % m] + 4.0 * pts[(i + m - 1) % m] +
                        6.0 * pts[i] + 4.0 * pts[(i + 1) % m] +
                        1.0 * pts[(i + 2) % m]);
            }
            pts.swap(s);
        }
        Bezigon bz = fit_bezigon(pts, params.err_tol_px,
                                 params.corner_angle_deg)
                         .normalized_orientation();
        shapes.push_back({std::move(bz), mean[r], r, area[r]});
    }
    return shapes;
}

}  // namespace bezitrace
