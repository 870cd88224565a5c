#ifndef BEZITRACE_GEOMETRY_HPP
#define BEZITRACE_GEOMETRY_HPP

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace bezitrace {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point p) { return {s * p.x, s * p.y}; }
inline Point operator*(Point p, double s) { return {s * p.x, s * p.y}; }
inline bool operator==(Point a, Point b) { return a.x == b.x && a.y == b.y; }
inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
double norm(Point p);
double distance(Point a, Point b);

/// One cubic Bezier curve given by its four control points.
struct BezierSegment {
    Point p0, p1, p2, p3;

    Point eval(double t) const;
    /// First derivative dS/dt (a quadratic in t).
    Point derivative(double t) const;
    /// Power-basis coefficients of one coordinate: c[0] + c[1] t + c[2] t^2 + c[3] t^3.
    std::array<double, 4> x_poly() const;
    std::array<double, 4> y_poly() const;
    BezierSegment reversed() const;
    /// de Casteljau split at parameter u into the [0,u] and [u,1] halves.
    std::pair<BezierSegment, BezierSegment> split(double u) const;
    /// Axis-aligned bounding box of the control polygon (contains the curve).
    void control_bbox(Point& lo, Point& hi) const;
};

/// Cubic Bernstein basis values b_0..b_3 at t, and their t-derivatives.
std::array<double, 4> bernstein3(double t);
std::array<double, 4> bernstein3_deriv(double t);

/// Closed chain of N >= 2 cubic segments with shared joints.
///
/// Storage is 3N points laid out as [A_0, H1_0, H2_0, A_1, H1_1, H2_1, ...]:
/// segment j runs from anchor A_j through interior handles H1_j, H2_j to
/// anchor A_{j+1 mod N}, so closure holds by construction. The global
/// parameter t in [0, N] maps segment j onto [j, j+1].
class Bezigon {
  public:
    /// Build from the 3N-point layout above. Throws std::invalid_argument on
    /// size not a multiple of 3, fewer than 6 points, or non-finite values.
    explicit Bezigon(std::vector<Point> points);
    /// Build from explicit segments; consecutive endpoints must be bitwise
    /// equal (including the wrap-around pair).
    static Bezigon from_segments(const std::vector<BezierSegment>& segments);

    int segment_count() const { return static_cast<int>(pts_.size() / 3); }
    BezierSegment segment(int j) const;
    const std::vector<Point>& points() const { return pts_; }
    Point anchor(int j) const { return pts_[3 * wrap(j)]; }
    Point handle1(int j) const { return pts_[3 * wrap(j) + 1]; }
    Point handle2(int j) const { return pts_[3 * wrap(j) + 2]; }

    /// Evaluate at global parameter t in [0, N]; t = N wraps to t = 0.
    /// Out-of-range t throws std::invalid_argument.
    Point eval(double t) const;
    Point derivative(double t) const;

    /// Signed area enclosed by the curve (positive for the orientation that
    /// the rasterizer treats as "filled").
    double signed_area() const;
    Bezigon reversed() const;
    /// Returns a copy oriented so signed_area() >= 0.
    Bezigon normalized_orientation() const;

    /// Flat parameter layout: 6N scalars, [x(A_0), y(A_0), x(H1_0), y(H1_0),
    /// x(H2_0), y(H2_0), x(A_1), ...]. Shared by the energy and the solver.
    std::vector<double> to_params() const;
    static Bezigon from_params(std::span<const double> params);
    void set_params(std::span<const double> params);

    int wrap(int j) const {
        int n = segment_count();
        return ((j % n) + n) % n;
    }

  private:
    std::vector<Point> pts_;
};

/// Transverse self-crossing S(t1) = S(t2) with t1 < t2.
struct IntersectionPair {
    double t1 = 0.0;
    double t2 = 0.0;
    Point point;
};

/// Polyline approximation with the global parameter of every vertex.
/// Closed: the last vertex repeats the first (params run 0..N).
struct FlattenedBezigon {
    std::vector<Point> vertices;
    std::vector<double> params;
};

Point eval(const BezierSegment& segment, double t);
Point eval_bezigon(const Bezigon& bezigon, double t);

/// Arc length between global parameters t1 <= t2, by adaptive Gauss-Legendre
/// quadrature to absolute tolerance `tol`.
double arc_length(const Bezigon& bezigon, double t1, double t2,
                  double tol = 1e-8);
double segment_length(const BezierSegment& segment, double t0 = 0.0,
                      double t1 = 1.0, double tol = 1e-8);

/// Handle-difference vectors at joint j: a_j points from the previous
/// segment's second handle to the joint, b_j from the joint to this
/// segment's first handle. Zero vectors are possible; callers guard.
std::pair<Point, Point> joint_tangents(const Bezigon& bezigon, int j);

/// Recursive-subdivision flattening; every curve point lies within
/// chord_tol of the returned polyline.
FlattenedBezigon flatten(const Bezigon& bezigon, double chord_tol);

/// All transverse self-crossings, found on a flattened polyline (at
/// chord_tol = tol/4) and refined by bivariate Newton on S(t1) - S(t2) = 0.
/// Candidates closer than 1e-3 in parameter (modulo N) to the diagonal are
/// joint artifacts and dropped; duplicates within `tol` merged.
std::vector<IntersectionPair> self_intersections(const Bezigon& bezigon,
                                                 double tol = 1e-4);

}  // namespace bezitrace

#endif
