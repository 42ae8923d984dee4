#include "crossway/geometry.hpp"

#include <algorithm>
#include <limits>

namespace crossway {

double wrap_angle(double a) {
    a = std::fmod(a + M_PI, 2.0 * M_PI);
    if (a <= 0.0) a += 2.0 * M_PI;
    return a - M_PI;
}

std::array<Vec2, 4> OrientedRect::corners() const {
    const Vec2 fwd = Vec2{1.0, 0.0}.rotated(heading) * half_length;
    const Vec2 left = Vec2{0.0, 1.0}.rotated(heading) * half_width;
    return {center + fwd + left, center + fwd - left, center - fwd - left,
            center - fwd + left};
}

namespace {

struct Interval {
    double lo, hi;
};

Interval project_onto(const std::array<Vec2, 4>& pts, const Vec2& axis) {
    Interval iv{std::numeric_limits<double>::max(),
                std::numeric_limits<double>::lowest()};
    for (const Vec2& p : pts) {
        const double t = p.dot(axis);
        iv.lo = std::min(iv.lo, t);
        iv.hi = std::max(iv.hi, t);
    }
    return iv;
}

}  // namespace

bool rects_overlap(const OrientedRect& a, const OrientedRect& b) {
    const auto ca = a.corners();
    const auto cb = b.corners();
    const std::array<Vec2, 4> axes = {
        Vec2{1.0, 0.0}.rotated(a.heading), Vec2{0.0, 1.0}.rotated(a.heading),
        Vec2{1.0, 0.0}.rotated(b.heading), Vec2{0.0, 1.0}.rotated(b.heading)};
    for (const Vec2& axis : axes) {
        const Interval ia = project_onto(ca, axis);
        const Interval ib = project_onto(cb, axis);
        if (ia.hi < ib.lo || ib.hi < ia.lo) return false;
    }
    return true;
}

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
    const Vec2 ab = b - a;
    const double len2 = ab.squared_norm();
    if (len2 <= 0.0) return (p - a).norm();
    const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
    return (p - (a + ab * t)).norm();
}

double point_polyline_distance(const Vec2& p, const std::vector<Vec2>& pts) {
    double best = std::numeric_limits<double>::max();
    for (size_t i = 0; i + 1 < pts.size(); ++i) {
        best = std::min(best, point_segment_distance(p, pts[i], pts[i + 1]));
    }
    if (pts.size() == 1) best = (p - pts[0]).norm();
    return best;
}

bool point_in_polygon(const Vec2& p, const std::vector<Vec2>& poly) {
    constexpr double kEdgeTol = 1e-9;
    const size_t n = poly.size();
    if (n < 3) return false;
    bool inside = false;
    for (size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vec2& a = poly[j];
        const Vec2& b = poly[i];
        if (point_segment_distance(p, a, b) <= kEdgeTol) return true;
        const bool crosses = (a.y > p.y) != (b.y > p.y);
        if (crosses) {
            const double xint = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if (p.x < xint) inside = !inside;
        }
    }
    return inside;
}

double polyline_length(const std::vector<Vec2>& pts) {
    double len = 0.0;
    for (size_t i = 0; i + 1 < pts.size(); ++i) len += (pts[i + 1] - pts[i]).norm();
    return len;
}

double three_point_curvature(const Vec2& a, const Vec2& b, const Vec2& c) {
    const Vec2 ab = b - a;
    const Vec2 bc = c - b;
    const Vec2 ac = c - a;
    const double denom = ab.norm() * bc.norm() * ac.norm();
    if (denom <= 1e-12) return 0.0;
    return 2.0 * ab.cross(bc) / denom;
}

}  // namespace crossway
