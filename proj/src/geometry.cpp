#include "bezitrace/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bezitrace {

double norm(Point p) { return std::hypot(p.x, p.y); }
double distance(Point a, Point b) { return norm(a - b); }

std::array<double, 4> bernstein3(double t) {
    double u = 1.0 - t;
    return {u * u * u, 3.0 * u * u * t, 3.0 * u * t * t, t * t * t};
}

std::array<double, 4> bernstein3_deriv(double t) {
    double u = 1.0 - t;
    return {-3.0 * u * u, 3.0 * u * u - 6.0 * u * t, 6.0 * u * t - 3.0 * t * t,
            3.0 * t * t};
}

Point BezierSegment::eval(double t) const {
    auto b = bernstein3(t);
    return b[0] * p0 + b[1] * p1 + b[2] * p2 + b[3] * p3;
}

Point BezierSegment::derivative(double t) const {
    double u = 1.0 - t;
    Point d0 = p1 - p0, d1 = p2 - p1, d2 = p3 - p2;
    return 3.0 * (u * u * d0 + 2.0 * u * t * d1 + t * t * d2);
}

std::array<double, 4> BezierSegment::x_poly() const {
    return {p0.x, 3.0 * (p1.x - p0.x), 3.0 * (p2.x - 2.0 * p1.x + p0.x),
            p3.x - 3.0 * p2.x + 3.0 * p1.x - p0.x};
}

std::array<double, 4> BezierSegment::y_poly() const {
    return {p0.y, 3.0 * (p1.y - p0.y), 3.0 * (p2.y - 2.0 * p1.y + p0.y),
            p3.y - 3.0 * p2.y + 3.0 * p1.y - p0.y};
}

BezierSegment BezierSegment::reversed() const { return {p3, p2, p1, p0}; }

std::pair<BezierSegment, BezierSegment> BezierSegment::split(double u) const {
    Point q0 = (1 - u) * p0 + u * p1;
    Point q1 = (1 - u) * p1 + u * p2;
    Point q2 = (1 - u) * p2 + u * p3;
    Point r0 = (1 - u) * q0 + u * q1;
    Point r1 = (1 - u) * q1 + u * q2;
    Point s = (1 - u) * r0 + u * r1;
    return {BezierSegment{p0, q0, r0, s}, BezierSegment{s, r1, q2, p3}};
}

void BezierSegment::control_bbox(Point& lo, Point& hi) const {
    lo.x = std::min({p0.x, p1.x, p2.x, p3.x});
    lo.y = std::min({p0.y, p1.y, p2.y, p3.y});
    hi.x = std::max({p0.x, p1.x, p2.x, p3.x});
    hi.y = std::max({p0.y, p1.y, p2.y, p3.y});
}

Bezigon::Bezigon(std::vector<Point> points) : pts_(std::move(points)) {
    if (pts_.size() % 3 != 0 || pts_.size() < 6)
        throw std::invalid_argument("bezigon needs 3N points with N >= 2");
    for (const Point& p : pts_)
        if (!std::isfinite(p.x) || !std::isfinite(p.y))
            throw std::invalid_argument("bezigon has non-finite control point");
}

Bezigon Bezigon::from_segments(const std::vector<BezierSegment>& segments) {
    if (segments.size() < 2)
        throw std::invalid_argument("bezigon needs at least two segments");
    std::vector<Point> pts;
    pts.reserve(segments.size() * 3);
    for (size_t j = 0; j < segments.size(); ++j) {
        const BezierSegment& s = segments[j];
        const BezierSegment& next = segments[(j + 1) % segments.size()];
        if (!(s.p3 == next.p0))
            throw std::invalid_argument("bezigon segments are not joined");
        pts.push_back(s.p0);
        pts.push_back(s.p1);
        pts.push_back(s.p2);
    }
    return Bezigon(std::move(pts));
}

BezierSegment Bezigon::segment(int j) const {
    j = wrap(j);
    int n = segment_count();
    return {pts_[3 * j], pts_[3 * j + 1], pts_[3 * j + 2],
            pts_[3 * ((j + 1) % n)]};
}

Point Bezigon::eval(double t) const {
    int n = segment_count();
    if (!(t >= 0.0 && t <= n))
        throw std::invalid_argument("global parameter out of [0, N]");
    int j = std::min(static_cast<int>(std::floor(t)), n - 1);
    return segment(j).eval(t - j);
}

Point Bezigon::derivative(double t) const {
    int n = segment_count();
    if (!(t >= 0.0 && t <= n))
        throw std::invalid_argument("global parameter out of [0, N]");
    int j = std::min(static_cast<int>(std::floor(t)), n - 1);
    return segment(j).derivative(t - j);
}

double Bezigon::signed_area() const {
    // Green's theorem: area = integral of X dY; exact per cubic segment.
    // For cubics the integrand X(t) Y'(t) is quintic, so 4-node
    // Gauss-Legendre is exact.
    static const double gx[4] = {-0.8611363115940525752, -0.3399810435848562648,
                                 0.3399810435848562648, 0.8611363115940525752};
    static const double gw[4] = {0.3478548451374538574, 0.6521451548625461426,
                                 0.3478548451374538574, 0.6521451548625461426};
    double area = 0.0;
    for (int j = 0; j < segment_count(); ++j) {
        BezierSegment s = segment(j);
        for (int q = 0; q < 4; ++q) {
            double t = 0.5 * (gx[q] + 1.0);
            area += 0.5 * gw[q] * s.eval(t).x * s.derivative(t).y;
        }
    }
    return area;
}

Bezigon Bezigon::reversed() const {
    int n = segment_count();
    std::vector<Point> pts;
    pts.reserve(pts_.size());
    // Reversed segment j' = n-1-j is (A_{j+1}, H2_j, H1_j, A_j).
    for (int j = n - 1; j >= 0; --j) {
        pts.push_back(anchor(j + 1));
        pts.push_back(handle2(j));
        pts.push_back(handle1(j));
    }
    return Bezigon(std::move(pts));
}

Bezigon Bezigon::normalized_orientation() const {
    return signed_area() >= 0.0 ? *this : reversed();
}

std::vector<double> Bezigon::to_params() const {
    std::vector<double> p(pts_.size() * 2);
    for (size_t i = 0; i < pts_.size(); ++i) {
        p[2 * i] = pts_[i].x;
        p[2 * i + 1] = pts_[i].y;
    }
    return p;
}

Bezigon Bezigon::from_params(std::span<const double> params) {
    if (params.size() % 6 != 0 || params.size() < 12)
        throw std::invalid_argument("parameter vector must hold 6N scalars");
    std::vector<Point> pts(params.size() / 2);
    for (size_t i = 0; i < pts.size(); ++i)
        pts[i] = {params[2 * i], params[2 * i + 1]};
    return Bezigon(std::move(pts));
}

void Bezigon::set_params(std::span<const double> params) {
    if (params.size() != pts_.size() * 2)
        throw std::invalid_argument("parameter vector size mismatch");
    for (size_t i = 0; i < pts_.size(); ++i)
        pts_[i] = {params[2 * i], params[2 * i + 1]};
}

Point eval(const BezierSegment& segment, double t) { return segment.eval(t); }

Point eval_bezigon(const Bezigon& bezigon, double t) { return bezigon.eval(t); }

namespace {

const double kGL7Nodes[7] = {
    -0.9491079123427585245, -0.7415311855993944399, -0.4058451513773971669,
    0.0,
    0.4058451513773971669,  0.7415311855993944399,  0.9491079123427585245};
const double kGL7Weights[7] = {
    0.1294849661688696933, 0.2797053914892766679, 0.3818300505051189450,
    0.4179591836734693878,
    0.3818300505051189450, 0.2797053914892766679, 0.1294849661688696933};

double gl7_speed(const BezierSegment& s, double a, double b) {
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double acc = 0.0;
    for (int q = 0; q < 7; ++q)
        acc += kGL7Weights[q] * norm(s.derivative(mid + half * kGL7Nodes[q]));
    return acc * half;
}

double adaptive_length(const BezierSegment& s, double a, double b, double tol,
                       double whole, int depth) {
    double m = 0.5 * (a + b);
    double left = gl7_speed(s, a, m);
    double right = gl7_speed(s, m, b);
    if (depth >= 24 || std::abs(left + right - whole) <= tol)
        return left + right;
    return adaptive_length(s, a, m, 0.5 * tol, left, depth + 1) +
           adaptive_length(s, m, b, 0.5 * tol, right, depth + 1);
}

}  // namespace

double segment_length(const BezierSegment& segment, double t0, double t1,
                      double tol) {
    if (t1 <= t0) return 0.0;
    return adaptive_length(segment, t0, t1, tol, gl7_speed(segment, t0, t1), 0);
}

double arc_length(const Bezigon& bezigon, double t1, double t2, double tol) {
    if (t2 < t1) throw std::invalid_argument("arc_length needs t1 <= t2");
    int n = bezigon.segment_count();
    double total = 0.0;
    int j0 = std::max(0, static_cast<int>(std::floor(t1)));
    int j1 = std::min(n - 1, static_cast<int>(std::ceil(t2)) - 1);
    if (t2 == t1) return 0.0;
    double per_seg_tol = tol / std::max(1, j1 - j0 + 1);
    for (int j = j0; j <= j1; ++j) {
        double a = std::max(t1 - j, 0.0);
        double b = std::min(t2 - j, 1.0);
        if (b > a)
            total += segment_length(bezigon.segment(j), a, b, per_seg_tol);
    }
    return total;
}

std::pair<Point, Point> joint_tangents(const Bezigon& bezigon, int j) {
    Point a = bezigon.anchor(j) - bezigon.handle2(j - 1);
    Point b = bezigon.handle1(j) - bezigon.anchor(j);
    return {a, b};
}

namespace {

double point_line_distance(Point p, Point a, Point b) {
    Point d = b - a;
    double len = norm(d);
    if (len < 1e-300) return distance(p, a);
    return std::abs(cross(d, p - a)) / len;
}

// Flat when both interior controls lie within tol of the chord line and
// project onto the chord span; monotone in tol so refinement only deepens.
bool flat_enough(const BezierSegment& s, double tol) {
    Point d = s.p3 - s.p0;
    double len = norm(d);
    if (len < 1e-14)
        return distance(s.p1, s.p0) <= tol && distance(s.p2, s.p0) <= tol;
    if (point_line_distance(s.p1, s.p0, s.p3) > tol) return false;
    if (point_line_distance(s.p2, s.p0, s.p3) > tol) return false;
    double u1 = dot(d, s.p1 - s.p0) / len;
    double u2 = dot(d, s.p2 - s.p0) / len;
    return u1 >= -tol && u1 <= len + tol && u2 >= -tol && u2 <= len + tol;
}

void flatten_segment(const BezierSegment& s, double t_lo, double t_hi,
                     double tol, int depth, std::vector<Point>& verts,
                     std::vector<double>& params) {
    if (depth >= 30 || flat_enough(s, tol)) {
        verts.push_back(s.p3);
        params.push_back(t_hi);
        return;
    }
    auto [left, right] = s.split(0.5);
    double mid = 0.5 * (t_lo + t_hi);
    flatten_segment(left, t_lo, mid, tol, depth + 1, verts, params);
    flatten_segment(right, mid, t_hi, tol, depth + 1, verts, params);
}

}  // namespace

FlattenedBezigon flatten(const Bezigon& bezigon, double chord_tol) {
    if (!(chord_tol > 0.0))
        throw std::invalid_argument("flatten needs chord_tol > 0");
    FlattenedBezigon out;
    out.vertices.push_back(bezigon.anchor(0));
    out.params.push_back(0.0);
    for (int j = 0; j < bezigon.segment_count(); ++j)
        flatten_segment(bezigon.segment(j), j, j + 1, chord_tol, 0,
                        out.vertices, out.params);
    return out;
}

namespace {

// Proper (transverse) intersection of open segments ab and cd.
bool segment_intersection(Point a, Point b, Point c, Point d, double& u,
                          double& v) {
    Point r = b - a, s = d - c;
    double denom = cross(r, s);
    if (std::abs(denom) < 1e-300) return false;
    Point qp = c - a;
    u = cross(qp, s) / denom;
    v = cross(qp, r) / denom;
    return u > -1e-12 && u < 1.0 + 1e-12 && v > -1e-12 && v < 1.0 + 1e-12;
}

}  // namespace

std::vector<IntersectionPair> self_intersections(const Bezigon& bezigon,
                                                 double tol) {
    if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
    const int n = bezigon.segment_count();
    FlattenedBezigon flat = flatten(bezigon, 0.25 * tol);
    const size_t m = flat.vertices.size() - 1;  // edge count

    struct Edge {
        double xmin, xmax, ymin, ymax;
        size_t i;
    };
    std::vector<Edge> edges(m);
    for (size_t i = 0; i < m; ++i) {
        Point a = flat.vertices[i], b = flat.vertices[i + 1];
        edges[i] = {std::min(a.x, b.x), std::max(a.x, b.x),
                    std::min(a.y, b.y), std::max(a.y, b.y), i};
    }
    std::sort(edges.begin(), edges.end(),
              [](const Edge& a, const Edge& b) { return a.xmin < b.xmin; });

    const double param_guard = 1e-3;
    std::vector<std::pair<double, double>> candidates;
    // Sweep over x-sorted edge boxes; only overlapping boxes are tested.
    for (size_t ia = 0; ia < m; ++ia) {
        for (size_t ib = ia + 1; ib < m; ++ib) {
            if (edges[ib].xmin > edges[ia].xmax) break;
            const Edge& ea = edges[ia];
            const Edge& eb = edges[ib];
            if (ea.ymin > eb.ymax || eb.ymin > ea.ymax) continue;
            size_t i = std::min(ea.i, eb.i), k = std::max(ea.i, eb.i);
            if (k == i + 1 || (i == 0 && k == m - 1)) continue;
            double u, v;
            if (!segment_intersection(flat.vertices[i], flat.vertices[i + 1],
                                      flat.vertices[k], flat.vertices[k + 1],
                                      u, v))
                continue;
            double t1 = flat.params[i] +
                        u * (flat.params[i + 1] - flat.params[i]);
            double t2 = flat.params[k] +
                        v * (flat.params[k + 1] - flat.params[k]);
            double gap = std::min(std::abs(t2 - t1),
                                  n - std::abs(t2 - t1));
            if (gap < param_guard) continue;
            candidates.emplace_back(std::min(t1, t2), std::max(t1, t2));
        }
    }

    std::vector<IntersectionPair> result;
    for (auto [t1, t2] : candidates) {
        // Newton on F(t1,t2) = S(t1) - S(t2).
        bool ok = true;
        for (int it = 0; it < 30; ++it) {
            Point f = bezigon.eval(t1) - bezigon.eval(t2);
            if (std::abs(f.x) < 1e-13 && std::abs(f.y) < 1e-13) break;
            Point d1 = bezigon.derivative(t1);
            Point d2 = bezigon.derivative(t2);
            double det = -d1.x * d2.y + d1.y * d2.x;
            if (std::abs(det) < 1e-300) {
                ok = false;
                break;
            }
            double dt1 = (-f.x * d2.y + f.y * d2.x) / det;
            double dt2 = (d1.x * f.y - d1.y * f.x) / det;
            t1 = std::clamp(t1 - dt1, 0.0, static_cast<double>(n));
            t2 = std::clamp(t2 - dt2, 0.0, static_cast<double>(n));
            if (it == 29) ok = false;
        }
        Point f = bezigon.eval(t1) - bezigon.eval(t2);
        if (!ok || norm(f) > tol) continue;
        if (t1 > t2) std::swap(t1, t2);
        double gap = std::min(t2 - t1, n - (t2 - t1));
        if (gap < param_guard) continue;
        bool dup = false;
        for (const IntersectionPair& p : result)
            if (std::abs(p.t1 - t1) < tol * 10.0 + 1e-6 &&
                std::abs(p.t2 - t2) < tol * 10.0 + 1e-6)
                dup = true;
        if (dup) continue;
        result.push_back({t1, t2, bezigon.eval(t1)});
    }
    std::sort(result.begin(), result.end(),
              [](const IntersectionPair& a, const IntersectionPair& b) {
                  return a.t1 < b.t1 || (a.t1 == b.t1 && a.t2 < b.t2);
              });
    return result;
}

}  // namespace bezitrace
