#include "bezitrace/shapes.hpp"

#include <cmath>
#include <random>

namespace bezitrace {

Bezigon circle_bezigon(Point center, double radius, int segments) {
    std::vector<Point> pts;
    pts.reserve(3 * segments);
    double step = 2.0 * M_PI / segments;
    // Handle length for a circular arc of the segment's angular span.
    double k = 4.0 / 3.0 * std::tan(step / 4.0);
    for (int j = 0; j < segments; ++j) {
        double a = j * step;
        Point anchor{center.x + radius * std::cos(a),
                     center.y + radius * std::sin(a)};
        Point tangent{-std::sin(a), std::cos(a)};
        double b = (j + 1) * step;
        Point next{center.x + radius * std::cos(b),
                   center.y + radius * std::sin(b)};
        Point tangent_next{-std::sin(b), std::cos(b)};
        pts.push_back(anchor);
        pts.push_back(anchor + radius * k * tangent);
        pts.push_back(next - radius * k * tangent_next);
    }
    return Bezigon(std::move(pts));
}

namespace {

void add_line(std::vector<Point>& pts, Point a, Point b) {
    pts.push_back(a);
    pts.push_back(a + (1.0 / 3.0) * (b - a));
    pts.push_back(a + (2.0 / 3.0) * (b - a));
}

}  // namespace

Bezigon rectangle_bezigon(Point lo, Point hi) {
    std::vector<Point> pts;
    add_line(pts, {lo.x, lo.y}, {hi.x, lo.y});
    add_line(pts, {hi.x, lo.y}, {hi.x, hi.y});
    add_line(pts, {hi.x, hi.y}, {lo.x, hi.y});
    add_line(pts, {lo.x, hi.y}, {lo.x, lo.y});
    return Bezigon(std::move(pts));
}

Bezigon rounded_square_bezigon(Point center, double half, double corner) {
    double c = std::min(corner, half * 0.9);
    double k = kCircleHandle * c;
    double x0 = center.x - half, x1 = center.x + half;
    double y0 = center.y - half, y1 = center.y + half;
    std::vector<Point> pts;
    auto arc = [&](Point from, Point from_dir, Point to, Point to_dir) {
        pts.push_back(from);
        pts.push_back(from + k * from_dir);
        pts.push_back(to - k * to_dir);
    };
    // clockwise-in-screen traversal; orientation normalized by callers
    add_line(pts, {x0 + c, y0}, {x1 - c, y0});
    arc({x1 - c, y0}, {1, 0}, {x1, y0 + c}, {0, 1});
    add_line(pts, {x1, y0 + c}, {x1, y1 - c});
    arc({x1, y1 - c}, {0, 1}, {x1 - c, y1}, {-1, 0});
    add_line(pts, {x1 - c, y1}, {x0 + c, y1});
    arc({x0 + c, y1}, {-1, 0}, {x0, y1 - c}, {0, -1});
    add_line(pts, {x0, y1 - c}, {x0, y0 + c});
    arc({x0, y0 + c}, {0, -1}, {x0 + c, y0}, {1, 0});
    return Bezigon(std::move(pts));
}

Bezigon star_bezigon(Point center, double r_outer, double r_inner, int points,
                     double smoothness) {
    std::vector<Point> pts;
    int n = 2 * points;
    std::vector<Point> anchors(n);
    for (int i = 0; i < n; ++i) {
        double a = i * M_PI / points;
        double r = (i % 2 == 0) ? r_outer : r_inner;
        anchors[i] = {center.x + r * std::cos(a), center.y + r * std::sin(a)};
    }
    for (int i = 0; i < n; ++i) {
        Point prev = anchors[(i + n - 1) % n];
        Point next = anchors[(i + 1) % n];
        Point tangent = next - prev;
        Point cur = anchors[i];
        Point nxt = anchors[(i + 1) % n];
        Point tangent_next =
            anchors[(i + 2) % n] - anchors[i];
        pts.push_back(cur);
        pts.push_back(cur + smoothness * 0.5 * tangent);
        pts.push_back(nxt - smoothness * 0.5 * tangent_next);
    }
    return Bezigon(std::move(pts));
}

Bezigon random_blob(uint64_t seed, int segments, Point center,
                    double base_radius, double radial_jitter) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    int n = segments;
    std::vector<Point> anchors(n);
    std::vector<double> radii(n);
    for (int i = 0; i < n; ++i)
        radii[i] = base_radius * (1.0 + radial_jitter * uni(rng));
    for (int i = 0; i < n; ++i) {
        double a = 2.0 * M_PI * i / n + 0.25 * uni(rng) / n;
        anchors[i] = {center.x + radii[i] * std::cos(a),
                      center.y + radii[i] * std::sin(a)};
    }
    std::vector<Point> pts;
    for (int i = 0; i < n; ++i) {
        Point prev = anchors[(i + n - 1) % n];
        Point cur = anchors[i];
        Point next = anchors[(i + 1) % n];
        Point t_cur = next - prev;
        Point t_next = anchors[(i + 2) % n] - cur;
        double c1 = 0.18 * (1.0 + 0.3 * uni(rng));
        double c2 = 0.18 * (1.0 + 0.3 * uni(rng));
        pts.push_back(cur);
        pts.push_back(cur + c1 * t_cur);
        pts.push_back(next - c2 * t_next);
    }
    return Bezigon(std::move(pts)).normalized_orientation();
}

}  // namespace bezitrace
